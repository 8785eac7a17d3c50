"""Entropies, mutual informations and the analytic bounds built from them.

All logarithms are base 2. Quantities take a PureState or DensityMatrix plus
label groups; a group is a single label or an iterable of labels.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .linalg import PureState, marginal_spectrum

NEG_TOL = 1e-9


def _labels(group) -> list[str]:
    if isinstance(group, str):
        return [group]
    return list(group)


def _disjoint(*groups):
    seen = set()
    for g in groups:
        for label in g:
            if label in seen:
                raise ValueError(f"label {label!r} appears in more than one group")
            seen.add(label)


def shannon(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def entropy(state, labels=None) -> float:
    """Von Neumann entropy of the marginal on ``labels`` (whole state if None)."""
    if labels is None:
        if isinstance(state, PureState):
            return 0.0
        labels = state.register.labels
    return shannon(marginal_spectrum(state, _labels(labels)))


def von_neumann(rho) -> float:
    return entropy(rho)


def renyi2_entropy(state, labels=None) -> float:
    if labels is None:
        labels = state.register.labels
    p = marginal_spectrum(state, _labels(labels))
    return float(-np.log2(np.sum(p ** 2))) + 0.0


def renyi2(rho) -> float:
    return renyi2_entropy(rho)


def mutual_information(rho, a, b) -> float:
    a, b = _labels(a), _labels(b)
    _disjoint(a, b)
    return entropy(rho, a) + entropy(rho, b) - entropy(rho, a + b)


def cmi(rho, a, b, c) -> float:
    """I(a;b|c) = S(ac) + S(bc) - S(c) - S(abc)."""
    a, b, c = _labels(a), _labels(b), _labels(c)
    _disjoint(a, b, c)
    return (entropy(rho, a + c) + entropy(rho, b + c)
            - entropy(rho, c) - entropy(rho, a + b + c))


def tripartite_information(rho, a, b, c) -> float:
    """I(a;b) + I(a;c) - I(a;bc)."""
    a, b, c = _labels(a), _labels(b), _labels(c)
    _disjoint(a, b, c)
    return (mutual_information(rho, a, b) + mutual_information(rho, a, c)
            - mutual_information(rho, a, b + c))


def renyi2_tripartite(rho, a="A", b="B", c="C", d="D") -> float:
    """S_2(a) + S_2(b) - S_2(ac) - S_2(ad)."""
    a, b, c, d = _labels(a), _labels(b), _labels(c), _labels(d)
    _disjoint(a, b, c, d)
    return (renyi2_entropy(rho, a) + renyi2_entropy(rho, b)
            - renyi2_entropy(rho, a + c) - renyi2_entropy(rho, a + d))


def _mimo_groups(rho, i: int, j: int):
    labels = rho.register.labels
    a_i, c_j = f"A{i}", f"C{j}"
    if a_i not in labels or c_j not in labels:
        raise IndexError(f"no parts {a_i}/{c_j} in {labels}")
    a_rest = [l for l in labels if l.startswith("A") and l != a_i]
    c_rest = [l for l in labels if l.startswith("C") and l != c_j]
    return [a_i], a_rest, [c_j], c_rest


def mimo_tripartite(rho, i: int, j: int) -> float:
    """I_3(A_i; A_i^c; C_j) on a multi-input Choi state (1-based indices)."""
    a, ac, c, _ = _mimo_groups(rho, i, j)
    if not ac:
        return tripartite_information(rho, a, c, [l for l in rho.register.labels if l not in a + c])
    return tripartite_information(rho, a, ac, c)


def mimo_cmi_forms(rho, i: int, j: int) -> tuple[float, float]:
    """(I(A_i; A_i^c | C_j), I(C_j; C_j^c | A_i)); both equal -I_3 on unitary Choi states."""
    a, ac, c, cc = _mimo_groups(rho, i, j)
    return cmi(rho, a, ac, c), cmi(rho, c, cc, a)


def binary_entropy(t: float) -> float:
    if t <= 0 or t >= 1:
        return 0.0
    return -t * math.log2(t) - (1 - t) * math.log2(1 - t)


def fannes_audenaert_bound(t: float, dim: int) -> float:
    """T log(D-1) + h(T) for T = half the trace distance."""
    if not 0 <= t <= 1:
        raise ValueError(f"T must lie in [0, 1], got {t}")
    if dim < 1:
        raise ValueError("dimension must be positive")
    log_term = t * math.log2(dim - 1) if dim > 1 and t > 0 else 0.0
    return log_term + binary_entropy(t)


def pinsker_bound(mi: float) -> float:
    """Trace-norm bound sqrt(2 ln 2 * I) for a mutual information in bits."""
    if mi < 0:
        raise ValueError(f"mutual information must be nonnegative, got {mi}")
    return math.sqrt(2 * math.log(2) * mi)


def redistribution_rates(rho, a="A", b="B", c="C", d="D") -> tuple[float, float]:
    """(qubit rate, ebit rate) for sending ``a`` from the holder of ``ac`` to ``d``."""
    qubits = 0.5 * cmi(rho, a, b, d)
    ebits = 0.5 * mutual_information(rho, a, c) - 0.5 * mutual_information(rho, a, d)
    return _clean(qubits), ebits


def _clean(x: float) -> float:
    return 0.0 if -NEG_TOL <= x < 0 else x


class InfoReport(dict):
    """Named quantities in bits. Tiny negative MI/CMI values are clamped to 0;
    the unclamped numbers stay available in ``raw``."""

    def __init__(self, values=None):
        super().__init__()
        self.raw = {}
        for k, v in (values or {}).items():
            self[k] = v

    def __setitem__(self, key, value):
        value = float(value)
        self.raw[key] = value
        if key.startswith(("I(", "S(", "S2(")):
            value = _clean(value)
        super().__setitem__(key, value)

    def to_json(self, **kw) -> str:
        return json.dumps({k: float(v) for k, v in self.items()}, **kw)


def info_report(choi, a="A", b="B", c="C", d="D") -> InfoReport:
    """Standard diagnostics of a four-party (Choi) state."""
    r = InfoReport()
    for name, g in (("A", a), ("B", b), ("C", c), ("D", d)):
        r[f"S({name})"] = entropy(choi, g)
    a, b, c, d = (_labels(x) for x in (a, b, c, d))
    r["S(AC)"] = entropy(choi, a + c)
    r["S(AD)"] = entropy(choi, a + d)
    r["I(A;C)"] = mutual_information(choi, a, c)
    r["I(A;D)"] = mutual_information(choi, a, d)
    r["I(B;C)"] = mutual_information(choi, b, c)
    r["I(B;D)"] = mutual_information(choi, b, d)
    r["I(A;B|C)"] = cmi(choi, a, b, c)
    r["I(A;B|D)"] = cmi(choi, a, b, d)
    r["I(C;D|A)"] = cmi(choi, c, d, a)
    r["I(C;D|B)"] = cmi(choi, c, d, b)
    r["I3"] = tripartite_information(choi, a, c, d)
    r["I3_renyi2"] = renyi2_tripartite(choi, a, b, c, d)
    return r
