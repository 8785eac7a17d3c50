import json
import math

import numpy as np
import pytest

from scramblelab.experiments import (REGISTRY, Check, ConfigError, ExperimentConfig,
                                     ExperimentResult, _fmt, _crisscross_witness, build_unitary,
                                     prop4_row, renyi_d0, run_experiment, run_mimo, run_oto,
                                     run_prop2, run_prop4, run_redistribution, run_renyi_gap,
                                     run_typicality)


def test_format_helpers():
    assert _fmt(0.0) == "0"
    assert _fmt(-0.0) == "0"
    assert _fmt(1 / 3) == "0.333333333333"
    assert _fmt(7) == "7"
    assert _fmt(True) == "true"
    assert _fmt("x") == "x"


def test_check_directions():
    assert Check.make("a", 1.0, 2.0, "<=").passed
    assert not Check.make("a", 3.0, 2.0, "<=").passed
    assert Check.make("a", 2.0 - 1e-13, 2.0, ">=", 1e-12).passed


def test_result_rendering():
    res = ExperimentResult("x", {"d": 3}, ["d", "v"], [{"d": 3, "v": 0.5}], {"s": 1.0},
                           [Check.make("c", 0.5, 1.0, "<=")])
    assert res.to_csv() == "d,v\n3,0.5\n"
    doc = json.loads(res.to_json())
    assert doc["rows"] == [{"d": 3, "v": 0.5}]
    assert doc["checks"][0]["passed"] is True
    assert res.passed and not res.failures()


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig("nope")
    with pytest.raises(ConfigError):
        ExperimentConfig("prop2", {"bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig("prop2", format="xml")
    with pytest.raises(ConfigError):
        ExperimentConfig("typicality", {"n": 2})
    cfg = ExperimentConfig("prop2", {"seed": 3, "d_max": 5})
    assert "seed" not in cfg.resolved()
    assert cfg.resolved()["d_max"] == 5


def test_prop2_small_range():
    res = run_prop2(d_s=3, d_max=9)
    assert res.columns == ["d", "i3", "choi_dist", "bound_4dS_over_d", "diamond_witness", "bound_lemma1"]
    assert [r["d"] for r in res.rows] == list(range(3, 10))
    assert res.passed
    for r in res.rows:
        assert r["choi_dist"] <= r["bound_4dS_over_d"] + 1e-12
    # at d = d_s the counter is the scrambler itself
    assert res.rows[0]["i3"] == pytest.approx(-2 * math.log2(3), abs=1e-9)


def test_prop2_rejects_bad_parameters():
    with pytest.raises(ConfigError):
        run_prop2(d_s=4)
    with pytest.raises(ConfigError):
        run_prop2(d_max=30)
    with pytest.raises(ConfigError):
        run_prop2(d_s=5, d_min=3)


def test_crisscross_witness_value():
    # derived: the pure probe moves the d_s - 1 nontrivial pairs, distance 2 (d_s - 1) / d
    for d in (5, 8, 12):
        assert _crisscross_witness(d, 3) == pytest.approx(4 / d, abs=1e-10)


def test_crisscross_witness_beyond_cap():
    d, d_s = 37, 3
    bound = 1 - (2 + 2 * math.log2(d_s)) / math.log2(d)
    assert bound > 0
    assert _crisscross_witness(d, d_s) >= bound


def test_prop4_default_and_other_d0():
    res = run_prop4()
    assert res.passed
    assert all(r["code_ok"] for r in res.rows)
    assert all(r["code_rate_log_d0"] == 0 for r in res.rows)
    row, checks = prop4_row(7, 2)
    assert row["code_ok"]
    assert row["code_rate_log_d0"] == pytest.approx(1.0)
    assert all(c.passed for c in checks)
    with pytest.raises(ConfigError):
        run_prop4(d_values=(5,), d0=1)


def test_renyi_d0_parity():
    for d in range(8, 25):
        d0, adj = renyi_d0(d)
        assert (d - d0) % 2 == 1
        assert d0 - round(d ** 0.25) == int(adj)


def test_renyi_gap_small_range():
    res = run_renyi_gap(8, 12)
    assert res.passed
    assert all(r["gap"] >= 0 for r in res.rows)


def test_typicality_small_and_deterministic():
    a = run_typicality(n=3, d=5, trials=20, seed=3)
    b = run_typicality(n=3, d=5, trials=20, seed=3)
    assert a.to_csv() == b.to_csv()
    assert a.summary["bound"] == pytest.approx(1 - 25 / 25)
    assert 0 <= a.summary["empirical_rate"] <= 1
    with pytest.raises(ConfigError):
        run_typicality(n=5, d=5, trials=1)


def test_mimo_experiment():
    res = run_mimo(2, 5)
    assert res.passed
    assert len(res.rows) == 4
    with pytest.raises(ConfigError):
        run_mimo(4, 7)


def test_redistribution_and_oto_experiments():
    res = run_redistribution("identity", d=3)
    assert res.rows[0]["qubit_rate"] == pytest.approx(0, abs=1e-9)
    assert res.rows[0]["ebit_rate"] == pytest.approx(math.log2(3), abs=1e-9)
    o = run_oto("scrambler", d=3)
    assert o.rows[0]["ratio"] == pytest.approx(1 / 9)
    with pytest.raises(ConfigError):
        run_oto("scrambler", d=9)


def test_build_unitary():
    for name in ("identity", "swap", "scrambler", "scrambler2", "counter", "capacity_gap",
                 "crisscross", "haar"):
        u = build_unitary(name, d=3, d_s=3, d0=1, seed=1)
        assert np.abs(u.matrix.conj().T @ u.matrix - np.eye(9)).max() < 1e-10
    assert np.array_equal(build_unitary("haar", seed=4).matrix, build_unitary("haar", seed=4).matrix)
    with pytest.raises(ConfigError):
        build_unitary("scrambler", d=4)
    with pytest.raises(ConfigError):
        build_unitary("nope")
    with pytest.raises(ConfigError):
        build_unitary("identity", d=26)
    assert build_unitary("identity", d=26, unsafe_large=True).matrix.shape == (676, 676)


def test_run_experiment_dispatch():
    res = run_experiment(ExperimentConfig("prop4", {"d_values": "4, 6", "d0": 1}))
    assert [r["d"] for r in res.rows] == [4, 6]
    assert set(REGISTRY) >= {"prop2", "prop4", "renyi_gap", "typicality", "mimo"}
