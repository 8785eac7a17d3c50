import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scramblelab.channels import choi_state
from scramblelab.info import (InfoReport, binary_entropy, cmi, entropy, fannes_audenaert_bound,
                              info_report, mimo_cmi_forms, mimo_tripartite, mutual_information,
                              pinsker_bound, redistribution_rates, renyi2_entropy,
                              renyi2_tripartite, tripartite_information)
from scramblelab.linalg import DensityMatrix, PureState, partial_trace, product_state, trace_norm
from scramblelab.zoo import (haar_bipartite, haar_matrix, haar_state, identity, make_rng,
                             mimo_wired, swap, u_counter, u_crisscross, u_scrambler)

LOG3 = math.log2(3)


def test_entropy_examples():
    rho = DensityMatrix([("A", 2)], np.diag([1 / 3, 2 / 3]))
    assert entropy(rho) == pytest.approx(LOG3 - 2 / 3)
    assert entropy(DensityMatrix.maximally_mixed([("A", 5)])) == pytest.approx(math.log2(5))
    psi = PureState([("A", 2), ("B", 2)], np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert entropy(psi) == 0
    assert entropy(psi, "A") == pytest.approx(1)
    assert renyi2_entropy(rho) == pytest.approx(-math.log2(5 / 9))


def test_scrambler_choi_cmi_forms_agree():
    rho = choi_state(u_scrambler(3))
    forms = [cmi(rho, "A", "B", "C"), cmi(rho, "A", "B", "D"),
             cmi(rho, "C", "D", "A"), cmi(rho, "C", "D", "B")]
    assert forms == pytest.approx([2 * LOG3] * 4, abs=1e-9)
    assert tripartite_information(rho, "A", "C", "D") == pytest.approx(-2 * LOG3, abs=1e-9)


def test_disjoint_groups_required():
    rho = choi_state(identity(2, 2))
    with pytest.raises(ValueError):
        mutual_information(rho, "A", ["A", "C"])


def test_strong_subadditivity_and_renyi_order():
    rng = make_rng(21)
    labels = [("A", 2), ("B", 2), ("C", 2), ("D", 2)]
    for _ in range(1000):
        psi = PureState(labels, haar_state(16, rng))
        rho = partial_trace(psi.density(), ["A", "B", "C"])
        assert cmi(rho, "A", "C", "B") >= -1e-10
        assert renyi2_entropy(psi, ["A", "B"]) <= entropy(psi, ["A", "B"]) + 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_i3_invariant_under_local_unitaries(seed):
    rng = make_rng(seed)
    u = haar_bipartite(2, 3, rng)
    va, vb = haar_matrix(2, rng), haar_matrix(3, rng)
    wc, wd = haar_matrix(2, rng), haar_matrix(3, rng)
    dressed = type(u)(u.in_register, u.out_register,
                      np.kron(wc, wd) @ u.matrix @ np.kron(va, vb))
    i3 = tripartite_information(choi_state(u), "A", "C", "D")
    assert tripartite_information(choi_state(dressed), "A", "C", "D") == pytest.approx(i3, abs=1e-9)
    # symmetric in which output pair we call C
    assert tripartite_information(choi_state(u), "A", "D", "C") == pytest.approx(i3, abs=1e-9)


def test_renyi2_tripartite_examples():
    assert renyi2_tripartite(choi_state(u_scrambler(3))) == pytest.approx(-2 * LOG3, abs=1e-9)
    assert renyi2_tripartite(choi_state(identity(3, 3))) == pytest.approx(0, abs=1e-9)


def test_fannes_audenaert_on_random_pairs():
    rng = make_rng(3)
    dim = 4
    for _ in range(1000):
        a, b = haar_matrix(dim, rng)[:, :2], haar_matrix(dim, rng)[:, :3]
        w = rng.random(5)
        rho = (a * w[:2]) @ a.conj().T
        sig = (b * w[2:]) @ b.conj().T
        rho, sig = rho / np.trace(rho).real, sig / np.trace(sig).real
        t = 0.5 * trace_norm(rho - sig)
        gap = abs(entropy(DensityMatrix([("A", dim)], rho)) - entropy(DensityMatrix([("A", dim)], sig)))
        assert gap <= fannes_audenaert_bound(min(t, 1.0), dim) + 1e-10


def test_bound_helpers():
    assert binary_entropy(0.5) == 1
    assert binary_entropy(0) == 0
    assert fannes_audenaert_bound(0, 4) == 0
    assert fannes_audenaert_bound(1, 4) == pytest.approx(math.log2(3))
    with pytest.raises(ValueError):
        fannes_audenaert_bound(1.5, 4)
    with pytest.raises(ValueError):
        pinsker_bound(-1)


@pytest.mark.parametrize("d,d_s", [(4, 3), (6, 3), (9, 5)])
def test_pinsker_on_counter(d, d_s):
    rho = choi_state(u_counter(d, d_s))
    rho_ac = partial_trace(rho, ["A", "C"])
    prod = product_state(partial_trace(rho, ["A"]), partial_trace(rho, ["C"]))
    dist = trace_norm(rho_ac.matrix - prod.matrix)
    assert dist <= pinsker_bound(mutual_information(rho, "A", "C")) + 1e-10


def test_redistribution_examples():
    d = 3
    assert redistribution_rates(choi_state(identity(d, d))) == pytest.approx((0, math.log2(d)), abs=1e-9)
    assert redistribution_rates(choi_state(u_scrambler(d))) == pytest.approx((math.log2(d), 0), abs=1e-9)
    assert redistribution_rates(choi_state(swap(d))) == pytest.approx((0, -math.log2(d)), abs=1e-9)
    rng = make_rng(0)
    u = u_crisscross(*(haar_matrix(k, rng) for k in (4, 2, 2, 1)))
    q, e = redistribution_rates(choi_state(u))
    assert q == pytest.approx(0, abs=1e-9)
    assert e == pytest.approx(math.log2(4 / 2), abs=1e-9)


def test_mimo_blocks_of_two_bipartite_unitaries():
    rng = make_rng(6)
    u = mimo_wired({(0, 0): haar_matrix(2, rng), (1, 1): haar_matrix(3, rng),
                    (2, 2): haar_matrix(2, rng)}, 3, 3)
    rho = choi_state(u)
    for i in range(1, 4):
        for j in range(1, 4):
            assert mimo_tripartite(rho, i, j) == pytest.approx(0, abs=1e-9)
            f1, f2 = mimo_cmi_forms(rho, i, j)
            assert f1 == pytest.approx(0, abs=1e-9) and f2 == pytest.approx(0, abs=1e-9)
    with pytest.raises(IndexError):
        mimo_tripartite(rho, 4, 1)


def test_info_report_and_clamping():
    r = info_report(choi_state(u_scrambler(3)))
    assert r["I3"] == pytest.approx(-2 * LOG3, abs=1e-9)
    assert r["I(A;C)"] == 0
    assert r["S(AC)"] == pytest.approx(2 * LOG3)
    doc = json.loads(r.to_json())
    assert set(doc) == set(r)
    rep = InfoReport({"I(A;C)": -1e-12, "I3": -1e-12})
    assert rep["I(A;C)"] == 0 and rep.raw["I(A;C)"] == -1e-12
    assert rep["I3"] == -1e-12
