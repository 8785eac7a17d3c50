"""Named, seeded experiments producing the tables behind the bounds.

Each experiment returns an ExperimentResult: fixed columns, rows, a summary and
a list of checks. A check records a measured value, its bound and the
direction of the comparison, so a table always carries both sides.

Finite-size slack constants used by the checks:

* renyi_gap: ``I3_renyi2 >= -1.5 log2 d - RENYI_SLACK`` at the largest d.
* typicality: ``pass rate >= bound - 2 / sqrt(trials)`` (binomial slack).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import qubit_i3_samples, verify_subspace_code
from .channels import (choi_state, depolarizing, diamond_witness, residual_channel,
                       unitary_witness)
from .info import info_report, mimo_tripartite, redistribution_rates
from .linalg import DensityMatrix, UnitaryOp, partial_trace, trace_norm
from .oto import oto_report, renyi_gap
from .zoo import (find_mimo_matrix, haar_bipartite, haar_matrix, haar_state, identity, make_rng,
                  mimo_criteria, swap, u_capacity_gap, u_counter,
                  u_crisscross, u_mimo, u_scrambler)

RENYI_SLACK = 0.5
BIPARTITE_CAP = 25
MIMO_CAP = 10 ** 6
OTO_CAP = 7


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    params: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"
    unsafe_large: bool = False

    def __post_init__(self):
        if self.name not in REGISTRY:
            raise ConfigError(f"unknown experiment {self.name!r}; choose from {sorted(REGISTRY)}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        spec = REGISTRY[self.name]
        unknown = set(self.params) - set(spec.defaults) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        if spec.stochastic and self.params.get("seed") is None:
            raise ConfigError(f"experiment {self.name} is stochastic and needs a seed")

    def resolved(self) -> dict:
        spec = REGISTRY[self.name]
        p = dict(spec.defaults)
        p.update({k: v for k, v in self.params.items() if v is not None})
        if not spec.takes_seed:
            p.pop("seed", None)
        return {k: v for k, v in p.items() if v is not None}


@dataclass
class Check:
    name: str
    measured: float
    bound: float
    direction: str  # "<=" or ">="
    passed: bool

    @classmethod
    def make(cls, name, measured, bound, direction, tol=0.0):
        measured, bound = float(measured), float(bound)
        ok = measured <= bound + tol if direction == "<=" else measured >= bound - tol
        return cls(name, measured, bound, direction, bool(ok))


@dataclass
class ExperimentResult:
    name: str
    params: dict
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "experiment": self.name,
            "params": {k: _num(v) for k, v in sorted(self.params.items())},
            "columns": self.columns,
            "rows": [{c: _num(r[c]) for c in self.columns} for r in self.rows],
            "summary": {k: _num(v) for k, v in self.summary.items()},
            "checks": [{"name": c.name, "measured": _num(c.measured), "bound": _num(c.bound),
                        "direction": c.direction, "passed": c.passed} for c in self.checks],
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0:
            return "0"
        return f"{v:.12g}"
    return str(v)


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.12g}") + 0.0
    return v


def _pure_trace_distance(psi, phi) -> float:
    ov = abs(np.vdot(psi, phi))
    return 2 * math.sqrt(max(0.0, 1 - ov ** 2))


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _cap_bipartite(d: int, unsafe: bool):
    _require(unsafe or d <= BIPARTITE_CAP, f"d = {d} exceeds the desk-scale cap {BIPARTITE_CAP} (use --unsafe-large)")


# --- counter family: nearly minimal, yet far from every criss-cross unitary -----

def _identity_crisscross(d: int, a_l: int) -> UnitaryOp:
    """Criss-cross with identity factors and |A_L| = |B_R| = a_l, |A_R| = |B_L| = d / a_l."""
    a_r = d // a_l
    eye = np.eye
    return u_crisscross(eye(a_l), eye(a_r), eye(a_r), eye(a_l))


def _crisscross_witness(d: int, d_s: int) -> float:
    """min over identity-factor criss-cross candidates of ||U_d s U_d^+ - U_0 s U_0^+||_1
    at the probe s = sigma_{A_S} (x) tau_B (roles of A, B swapped when |C_R| < sqrt(d)).

    sigma_{A_S} = |0><0|; the maximally mixed choice is invariant under U_d and
    would give distance 0 against the identity candidate.
    """
    u = u_counter(d, d_s)
    sig = np.zeros((d, d))
    sig[0, 0] = 1
    tau = np.eye(d) / d
    best = math.inf
    for a_l in [k for k in range(1, d + 1) if d % k == 0]:
        u0 = _identity_crisscross(d, a_l)
        c_r = d // a_l  # |C_R| = |B_L|
        probe = np.kron(sig, tau) if c_r * c_r >= d else np.kron(tau, sig)
        best = min(best, unitary_witness(u, u0, probe))
    return best


def run_prop2(d_s: int = 3, d_min: int | None = None, d_max: int = 24, unsafe_large: bool = False) -> ExperimentResult:
    _require(d_s >= 1 and d_s % 2 == 1, f"d_s must be odd, got {d_s}")
    d_min = d_s if d_min is None else d_min
    _require(d_min >= d_s, f"d_min = {d_min} must be at least d_s = {d_s}")
    _require(d_max >= d_min, "empty d range")
    _cap_bipartite(d_max, unsafe_large)
    cols = ["d", "i3", "choi_dist", "bound_4dS_over_d", "diamond_witness", "bound_lemma1"]
    rows, checks = [], []
    for d in range(d_min, d_max + 1):
        u = u_counter(d, d_s)
        rho = choi_state(u)
        i3 = info_report(rho).raw["I3"]
        phi = choi_state(identity(d, d)).amplitudes
        dist = _pure_trace_distance(rho.amplitudes, phi)
        bound = 4 * d_s / d
        wit = _crisscross_witness(d, d_s)
        lb = 1 - (2 + 2 * math.log2(d_s)) / math.log2(d) if d > 1 else -math.inf
        rows.append(dict(zip(cols, [d, i3, dist, bound, wit, lb])))
        checks.append(Check.make(f"choi_dist d={d}", dist, bound, "<=", 1e-12))
        if lb > 0:
            checks.append(Check.make(f"diamond_witness d={d}", wit, lb, ">=", 1e-12))
    checks.append(Check.make("i3 trend (last - first)", rows[-1]["i3"] - rows[0]["i3"], 0.0, ">=")
                  if len(rows) > 1 else Check.make("i3 trend", 0, 0, ">="))
    summary = {"witness_bound_positive_rows": sum(r["bound_lemma1"] > 0 for r in rows)}
    return ExperimentResult("prop2", {"d_s": d_s, "d_min": d_min, "d_max": d_max}, cols, rows, summary, checks)


# --- counter family: nearly maximal, yet far from depolarizing -------------------

def prop4_row(d: int, d0: int) -> tuple[dict, list]:
    d_s = d - d0
    u = u_counter(d, d_s)
    rho = choi_state(u)
    rep = info_report(rho)
    tau = np.eye(d * d) / (d * d)
    rho_ad = partial_trace(rho, ["A", "D"]).matrix
    rho_ac = partial_trace(rho, ["A", "C"]).matrix
    ad = trace_norm(rho_ad - tau)
    ac = trace_norm(rho_ac - tau)
    ch = residual_channel(u, ("B", np.eye(d) / d), ["D"])
    probe = np.zeros((d, d))
    probe[d - 1, d - 1] = 1
    wit = diamond_witness(ch, depolarizing(("A", d), ("C", d)), DensityMatrix([("A", d)], probe))
    code = [np.eye(d)[k] for k in range(d_s, d)]
    ok = verify_subspace_code(u, ("B", np.eye(d) / d), code, ["C"])
    rate = math.log2(d0) if ok else float("nan")
    row = {"d": d, "d0": d0, "i3_plus_2logd": rep.raw["I3"] + 2 * math.log2(d), "rho_AD_dist": ad,
           "rho_AC_dist": ac, "bound_8d0_over_d": 8 * d0 / d, "diamond_to_depol": wit,
           "bound_2_minus_2_over_d": 2 - 2 / d, "code_ok": ok, "code_rate_log_d0": rate}
    checks = [Check.make(f"rho_AD_dist d={d}", ad, 1e-9, "<="),
              Check.make(f"rho_AC_dist d={d}", ac, 8 * d0 / d, "<=", 1e-12),
              Check.make(f"diamond_to_depol d={d}", wit, 2 - 2 / d, ">=", 1e-9),
              Check.make(f"code d={d}", float(ok), 1.0, ">=")]
    return row, checks


def run_prop4(d_values=(4, 6, 8, 10, 12), d0: int = 1, unsafe_large: bool = False) -> ExperimentResult:
    d_values = list(d_values)
    _require(d0 >= 1, "d0 must be positive")
    for d in d_values:
        _require((d - d0) % 2 == 1 and d - d0 >= 3, f"d - d0 must be odd and >= 3, got d={d}, d0={d0}")
        _cap_bipartite(d, unsafe_large)
    cols = ["d", "d0", "i3_plus_2logd", "rho_AD_dist", "rho_AC_dist", "bound_8d0_over_d",
            "diamond_to_depol", "bound_2_minus_2_over_d", "code_ok", "code_rate_log_d0"]
    rows, checks = [], []
    for d in d_values:
        row, ch = prop4_row(d, d0)
        rows.append(row)
        checks.extend(ch)
    return ExperimentResult("prop4", {"d0": d0, "d_values": " ".join(map(str, d_values))},
                            cols, rows, {}, checks)


# --- Renyi-2 versus von Neumann tripartite information ---------------------------

def renyi_d0(d: int) -> tuple[int, bool]:
    """d0 = round(d^(1/4)), moved up by one when d - d0 is even."""
    d0 = max(1, int(round(d ** 0.25)))
    if (d - d0) % 2 == 0:
        return d0 + 1, True
    return d0, False


def run_renyi_gap(d_min: int = 8, d_max: int = 24, unsafe_large: bool = False) -> ExperimentResult:
    _require(d_min >= 4 and d_max >= d_min, "need 4 <= d_min <= d_max")
    _cap_bipartite(d_max, unsafe_large)
    cols = ["d", "d0", "d0_adjusted", "i3", "i3_2", "gap", "lower_bound"]
    rows, checks = [], []
    for d in range(d_min, d_max + 1):
        d0, adj = renyi_d0(d)
        i3, i3_2, gap = renyi_gap(u_counter(d, d - d0))
        lb = -1.5 * math.log2(d) - RENYI_SLACK
        rows.append(dict(zip(cols, [d, d0, adj, i3, i3_2, gap, lb])))
        checks.append(Check.make(f"gap d={d}", gap, 0.0, ">=", 1e-9))
    checks.append(Check.make("gap trend (last - first)", rows[-1]["gap"] - rows[0]["gap"], 0.0, ">=")
                  if len(rows) > 1 else Check.make("gap trend", 0, 0, ">="))
    if len(rows) > 1:
        checks[-1].passed = rows[-1]["gap"] > rows[0]["gap"]
    checks.append(Check.make(f"i3_2 at d={d_max}", rows[-1]["i3_2"], rows[-1]["lower_bound"], ">="))
    return ExperimentResult("renyi_gap", {"d_min": d_min, "d_max": d_max}, cols, rows, {}, checks)


# --- typicality of residual Choi states -------------------------------------------

def _grouped_mimo(n: int, d: int) -> UnitaryOp:
    u = u_mimo(find_mimo_matrix(n, d))
    rest = d ** (n - 1)
    return UnitaryOp([("A", d), ("B", rest)], [("C", d), ("D", rest)], u.matrix, check=False)


def run_typicality(n: int = 4, d: int = 5, trials: int = 200, epsilon: float = 1.0, seed: int = 0,
                   unsafe_large: bool = False) -> ExperimentResult:
    _require(n >= 2 and trials >= 1 and epsilon > 0, "need n >= 2, trials >= 1, epsilon > 0")
    _require(unsafe_large or d ** (2 * n) <= MIMO_CAP, f"d^(2n) = {d ** (2 * n)} exceeds {MIMO_CAP}")
    u = _grouped_mimo(n, d)
    rest = d ** (n - 1)
    tau = np.eye(d * d) / (d * d)
    cols = ["trial", "dist", "pass", "hs_dist", "gurvits_separable"]
    rows = []
    for t in range(trials):
        sigma = haar_state(rest, make_rng([seed, t]))
        ch = residual_channel(u, ("B", sigma), ["D"])
        dist = trace_norm(ch.choi - tau)
        hs = float(np.linalg.norm(ch.choi - tau))
        rows.append({"trial": t, "dist": dist, "pass": dist <= epsilon, "hs_dist": hs,
                     "gurvits_separable": hs <= 1 / (d * d)})
    rate = sum(r["pass"] for r in rows) / trials
    bound = 1 - d * d / (epsilon ** 2 * rest)
    slack = 2 / math.sqrt(trials)
    summary = {"empirical_rate": rate, "bound": bound, "slack": slack,
               "gurvits_rate": sum(r["gurvits_separable"] for r in rows) / trials}
    checks = [Check.make("pass rate", rate, bound - slack, ">=")]
    params = {"n": n, "d": d, "trials": trials, "epsilon": epsilon, "seed": seed}
    return ExperimentResult("typicality", params, cols, rows, summary, checks)


# --- other tables ---------------------------------------------------------------

def run_mimo(n: int = 2, d: int = 5, unsafe_large: bool = False) -> ExperimentResult:
    _require(unsafe_large or d ** (2 * n) <= MIMO_CAP, f"d^(2n) = {d ** (2 * n)} exceeds {MIMO_CAP}")
    try:
        m = find_mimo_matrix(n, d)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    crit = mimo_criteria(m)
    rho = choi_state(u_mimo(m))
    cols = ["i", "j", "i3", "target"]
    rows, checks = [], [Check.make("criteria", float(all(crit)), 1.0, ">=")]
    target = -2 * math.log2(d)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            v = mimo_tripartite(rho, i, j)
            rows.append({"i": i, "j": j, "i3": v, "target": target})
            checks.append(Check.make(f"|i3 - target| ({i},{j})", abs(v - target), 1e-9, "<="))
    summary = {"matrix": str(m.tolist()), "c1": crit[0], "c2": crit[1], "c3": crit[2]}
    return ExperimentResult("mimo", {"n": n, "d": d}, cols, rows, summary, checks)


def run_qubit_sampling(samples: int = 100_000, seed: int = 0, unsafe_large: bool = False) -> ExperimentResult:
    """Sampling evidence (not a proof) that no two-qubit unitary reaches I_3 = -2."""
    _require(samples >= 1, "samples must be positive")
    vals = qubit_i3_samples(samples, seed)
    cols = ["samples", "max_neg_i3", "maximal_value", "perfect_found"]
    best = float(-vals.min())
    rows = [{"samples": samples, "max_neg_i3": best, "maximal_value": 2.0,
             "perfect_found": bool(best >= 2 - 1e-6)}]
    checks = [Check.make("max -I3 below 2", best, 2 - 1e-6, "<=")]
    return ExperimentResult("qubit_sampling", {"samples": samples, "seed": seed}, cols, rows,
                            {"note": "sampling evidence only, not a proof"}, checks)


def run_redistribution(unitary: str = "scrambler", d: int = 3, d_s: int = 3, d0: int = 1,
                       seed: int = 0, unsafe_large: bool = False) -> ExperimentResult:
    u = build_unitary(unitary, d=d, d_s=d_s, d0=d0, seed=seed, unsafe_large=unsafe_large)
    q, e = redistribution_rates(choi_state(u, ("A", "B"), ("C", "D")))
    cols = ["unitary", "qubit_rate", "ebit_rate"]
    return ExperimentResult("redistribution", {"unitary": unitary, "d": d}, cols,
                            [{"unitary": unitary, "qubit_rate": q, "ebit_rate": e}])


def run_oto(unitary: str = "scrambler", d: int = 3, d_s: int = 3, d0: int = 1, seed: int = 0,
            unsafe_large: bool = False) -> ExperimentResult:
    _require(unsafe_large or d <= OTO_CAP, f"OTO runs are capped at d <= {OTO_CAP}")
    u = build_unitary(unitary, d=d, d_s=d_s, d0=d0, seed=seed, unsafe_large=unsafe_large)
    r = oto_report(u)
    cols = ["unitary", "avg_AC", "avg_AD", "product", "i3_renyi2", "ratio"]
    row = {"unitary": unitary, "avg_AC": r.avg_AC, "avg_AD": r.avg_AD, "product": r.product,
           "i3_renyi2": r.i3_renyi2, "ratio": r.ratio}
    return ExperimentResult("oto", {"unitary": unitary, "d": d}, cols, [row])


# --- unitary registry -------------------------------------------------------------

UNITARIES = ("identity", "swap", "scrambler", "scrambler2", "counter", "capacity_gap", "crisscross", "haar")


def build_unitary(name: str, d: int = 3, d_s: int = 3, d0: int = 1, seed: int = 0,
                  unsafe_large: bool = False) -> UnitaryOp:
    """Bipartite unitary by name; the parameters a family does not use are ignored."""
    _cap_bipartite(d, unsafe_large)
    try:
        if name == "identity":
            return identity(d, d)
        if name == "swap":
            return swap(d)
        if name == "scrambler":
            return u_scrambler(d)
        if name == "scrambler2":
            return u_scrambler(d) @ u_scrambler(d)
        if name == "counter":
            return u_counter(d, d_s)
        if name == "capacity_gap":
            return u_capacity_gap(d, d0)
        if name == "crisscross":
            rng = make_rng(seed)
            a_l = min((k for k in range(2, d + 1) if d % k == 0), default=1)
            a_r = d // a_l
            return u_crisscross(*(haar_matrix(k, rng) for k in (a_l, a_r, a_r, a_l)))
        if name == "haar":
            return haar_bipartite(d, d, make_rng(seed))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    raise ConfigError(f"unknown unitary {name!r}; choose from {', '.join(UNITARIES)}")


@dataclass(frozen=True)
class _Spec:
    func: object
    defaults: dict
    stochastic: bool
    doc: str

    @property
    def takes_seed(self) -> bool:
        return "seed" in self.defaults


REGISTRY = {
    "prop2": _Spec(run_prop2, {"d_s": 3, "d_min": None, "d_max": 24}, False,
                   "counter family: Choi distance and criss-cross witness"),
    "prop4": _Spec(run_prop4, {"d_values": "4 6 8 10 12", "d0": 1}, False,
                   "counter family near the maximal value: marginals, witness, code"),
    "renyi_gap": _Spec(run_renyi_gap, {"d_min": 8, "d_max": 24}, False,
                       "Renyi-2 minus von Neumann tripartite information"),
    "typicality": _Spec(run_typicality, {"n": 4, "d": 5, "trials": 200, "epsilon": 1.0, "seed": 0}, True,
                        "residual Choi states for random pure inputs on the other parts"),
    "mimo": _Spec(run_mimo, {"n": 2, "d": 5}, False,
                  "tripartite information of the modular MIMO scrambler"),
    "qubit_sampling": _Spec(run_qubit_sampling, {"samples": 100_000, "seed": 0}, True,
                            "Haar sampling of two-qubit unitaries (evidence, not proof)"),
    "redistribution": _Spec(run_redistribution, {"unitary": "scrambler", "d": 3, "d_s": 3, "d0": 1,
                                                 "seed": 0}, False,
                            "state redistribution rates of a named unitary"),
}


def _coerce(name: str, params: dict) -> dict:
    out = dict(params)
    if name == "prop4" and "d_values" in out:
        v = out["d_values"]
        if isinstance(v, str):
            v = [int(x) for x in v.replace(",", " ").split()]
        out["d_values"] = tuple(int(x) for x in v)
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    params = _coerce(cfg.name, cfg.resolved())
    return REGISTRY[cfg.name].func(unsafe_large=cfg.unsafe_large, **params)
