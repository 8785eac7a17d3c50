"""Scrambling classification, criss-cross normal-form extraction, perfect-tensor
checks and explicit zero-error code verification.

Extraction works on operator algebras. For an input part ``A`` and an output
part ``C`` the residual channel A -> C (other inputs maximally mixed, other
outputs traced) of a criss-cross unitary is ``X_L (x) Y_R -> tr(Y_R) U X_L U^dag
(x) tau``, so the top right singular vectors of its superoperator span the
factor algebra ``B(A_L) (x) I``. A generic Hermitian element of that algebra
splits A into the blocks ``|e_k> (x) A_R``; a generic element of the algebra
then moves block 0 to block k without touching ``A_R``. That yields a basis
change ``A = A_L (x) A_R`` without ever solving for the factors directly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import choi_state, residual_channel
from .info import InfoReport, info_report, mimo_tripartite, mutual_information
from .linalg import (PureState, Register, UnitaryOp, equal_up_to_phase, kron, reduced_density)
from .zoo import make_rng, mimo_wired, u_crisscross

CLASSIFY_TOL = 1e-6
DIM_TOL = 1e-6
REASSEMBLY_TOL = 1e-8


class NotMinimal(ValueError):
    pass


class NonIntegerDims(ValueError):
    pass


class ExtractionError(RuntimeError):
    pass


# --- classification ------------------------------------------------------------

@dataclass
class ScramblingVerdict:
    i3: float
    classification: str
    witnesses: InfoReport = field(repr=False)

    def to_dict(self) -> dict:
        return {"i3": self.i3, "classification": self.classification, "witnesses": dict(self.witnesses)}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _classify_value(i3: float, min_dim: int, tol: float = CLASSIFY_TOL) -> str:
    if abs(i3) <= tol:
        return "minimal"
    if abs(i3 + 2 * math.log2(min_dim)) <= tol:
        return "maximal"
    return "intermediate"


def classify(u: UnitaryOp, tol: float = CLASSIFY_TOL) -> ScramblingVerdict:
    """Minimal iff |I_3| <= tol, maximal iff |I_3 + 2 log min-dim| <= tol."""
    if len(u.in_register) != 2 or len(u.out_register) != 2:
        raise ValueError("classify expects a bipartite unitary AB -> CD")
    report = info_report(choi_state(u, ("A", "B"), ("C", "D")))
    i3 = report.raw["I3"]
    min_dim = min(u.in_register.dims + u.out_register.dims)
    return ScramblingVerdict(i3, _classify_value(i3, min_dim, tol), report)


# --- algebra helpers -----------------------------------------------------------

def _routed_algebra(u: UnitaryOp, src: str, dst: str, size: int) -> np.ndarray:
    """Orthonormal basis (size, d, d) of the operator algebra on input ``src``
    carried to output ``dst``."""
    others = {l: np.eye(u.in_register.dim(l)) / u.in_register.dim(l)
              for l in u.in_register.labels if l != src}
    traced = [l for l in u.out_register.labels if l != dst]
    if others:
        ch = residual_channel(u, others, traced)
    else:
        ch = residual_channel(u, {}, traced)
    s = ch.superoperator()
    d = u.in_register.dim(src)
    _, sv, vh = np.linalg.svd(s)
    if size < len(sv) and sv[size] > 1e-6 * sv[0]:
        raise ExtractionError(f"routed algebra {src}->{dst} is larger than expected ({size})")
    return vh[:size].conj().reshape(size, d, d)


def _random_element(basis: np.ndarray, rng) -> np.ndarray:
    c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    return np.einsum("k,kab->ab", c, basis)


def _split_basis(basis: np.ndarray, n_left: int, rng) -> np.ndarray:
    """Unitary V with columns |k>|l> -> basis of the factorization d = n_left * n_right
    in which ``basis`` spans B(C^n_left) (x) I."""
    d = basis.shape[1]
    n_right = d // n_left
    if n_left == 1:
        return np.eye(d, dtype=complex)
    x = _random_element(basis, rng)
    h = x + x.conj().T
    evals, vecs = np.linalg.eigh(h)
    groups = [slice(k * n_right, (k + 1) * n_right) for k in range(n_left)]
    spread = max(evals[g].max() - evals[g].min() for g in groups)
    gaps = [evals[groups[k + 1]].min() - evals[groups[k]].max() for k in range(n_left - 1)]
    if gaps and min(gaps) < 1e3 * max(spread, 1e-14):
        raise ExtractionError("eigenvalue blocks of the routed algebra are not separated")
    e0 = vecs[:, groups[0]]
    y = _random_element(basis, rng)
    cols = []
    for g in groups:
        p = vecs[:, g] @ vecs[:, g].conj().T
        block = p @ y @ e0
        # all columns of the block share one norm since y acts as y_L (x) I
        cols.append(block / np.linalg.norm(block[:, 0]))
    v = np.concatenate(cols, axis=1)
    # polish to an exactly unitary matrix
    w, _, zh = np.linalg.svd(v)
    return w @ zh


def _kron_split(m: np.ndarray, left: tuple[int, int], right: tuple[int, int]) -> tuple[np.ndarray, np.ndarray, float]:
    """Nearest Kronecker factors m ~ x (x) y; returns (x, y, relative residual)."""
    (r1, c1), (r2, c2) = left, right
    t = m.reshape(r1, r2, c1, c2).transpose(0, 2, 1, 3).reshape(r1 * c1, r2 * c2)
    u, s, vh = np.linalg.svd(t, full_matrices=False)
    x = (u[:, 0] * np.sqrt(s[0])).reshape(r1, c1)
    y = (vh[0] * np.sqrt(s[0])).reshape(r2, c2)
    # rescale so x is unitary when m is a product of unitaries
    scale = np.sqrt(np.linalg.norm(x) ** 2 / max(r1, 1))
    if scale > 0:
        x, y = x / scale, y * scale
    resid = float(np.sqrt(max(np.sum(s[1:] ** 2), 0.0)) / max(np.linalg.norm(s), 1e-300))
    return x, y, resid


def _kron_factors(m: np.ndarray, dims: list[int]) -> list[np.ndarray]:
    """Split a square matrix on (x)_k C^dims[k] into per-factor square matrices."""
    out = []
    rest = m
    for k, dk in enumerate(dims[:-1]):
        drest = int(np.prod(dims[k + 1:]))
        x, rest, resid = _kron_split(rest, (dk, dk), (drest, drest))
        if resid > 1e-6:
            raise ExtractionError("transformed unitary does not factorize")
        out.append(x)
    out.append(rest)
    return out


def _int_dim(mi: float, what: str) -> int:
    val = 2.0 ** (mi / 2)
    k = int(round(val))
    if k < 1 or abs(val - k) > DIM_TOL:
        raise NonIntegerDims(f"2^(I/2) = {val:.9g} for {what} is not an integer")
    return k


def _dagger(u: UnitaryOp) -> UnitaryOp:
    return UnitaryOp(u.out_register, u.in_register, u.matrix.conj().T, check=False)


# --- bipartite extraction ------------------------------------------------------

@dataclass
class CrissCrossForm:
    """U = (W_C (x) W_D) CrissCross(f_LL, f_LR, f_RL, f_RR) (V_A (x) V_B)^dag."""
    dims: tuple[int, int, int, int]
    factors: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    basis_changes: dict = field(repr=False)

    def reassemble(self) -> np.ndarray:
        core = u_crisscross(*self.factors).matrix
        bc = self.basis_changes
        return kron(bc["C"], bc["D"]) @ core @ kron(bc["A"], bc["B"]).conj().T

    def log_dims(self) -> tuple[float, ...]:
        return tuple(math.log2(k) for k in self.dims)

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "log2_dims": list(self.log_dims())}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def extract_crisscross(u: UnitaryOp, seed=0) -> CrissCrossForm:
    """Normal form of a minimally scrambling bipartite unitary.

    Raises NotMinimal when |I_3| > 1e-6 and NonIntegerDims when a mutual
    information does not correspond to an integer dimension.
    """
    if len(u.in_register) != 2 or len(u.out_register) != 2:
        raise ValueError("extract_crisscross expects a bipartite unitary")
    la, lb = u.in_register.labels
    lc, ld = u.out_register.labels
    dA, dB = u.in_register.dims
    dC, dD = u.out_register.dims
    report = info_report(choi_state(u, ("A", "B"), ("C", "D")))
    if abs(report.raw["I3"]) > CLASSIFY_TOL:
        raise NotMinimal(f"I_3 = {report.raw['I3']:.6g} is not zero")
    aL = _int_dim(report.raw["I(A;C)"], "A-C")
    aR = _int_dim(report.raw["I(A;D)"], "A-D")
    bL = _int_dim(report.raw["I(B;C)"], "B-C")
    bR = _int_dim(report.raw["I(B;D)"], "B-D")
    if aL * aR != dA or bL * bR != dB or aL * bL != dC or aR * bR != dD:
        raise NonIntegerDims(f"dims {(aL, aR, bL, bR)} inconsistent with {(dA, dB, dC, dD)}")
    rng = make_rng(seed)
    ud = _dagger(u)
    v_a = _split_basis(_routed_algebra(u, la, lc, aL * aL), aL, rng)
    v_b = _split_basis(_routed_algebra(u, lb, lc, bL * bL), bL, rng)
    w_c = _split_basis(_routed_algebra(ud, lc, la, aL * aL), aL, rng)
    w_d = _split_basis(_routed_algebra(ud, ld, la, aR * aR), aR, rng)
    ut = kron(w_c, w_d).conj().T @ u.matrix @ kron(v_a, v_b)
    # outputs (C_L, C_R, D_L, D_R) -> (C_L, D_L, C_R, D_R); inputs stay (A_L, A_R, B_L, B_R)
    t = ut.reshape(aL, bL, aR, bR, dA * dB).transpose(0, 2, 1, 3, 4).reshape(dA * dB, dA * dB)
    factors = tuple(_kron_factors(t, [aL, aR, bL, bR]))
    form = CrissCrossForm((aL, aR, bL, bR), factors, {"A": v_a, "B": v_b, "C": w_c, "D": w_d})
    if not equal_up_to_phase(form.reassemble(), u.matrix, REASSEMBLY_TOL):
        raise ExtractionError("criss-cross reassembly failed")
    return form


# --- multi-input multi-output --------------------------------------------------

@dataclass
class MimoVerdict:
    i3: np.ndarray
    pair_classes: list
    classification: str

    def to_dict(self) -> dict:
        return {"i3": self.i3.tolist(), "pair_classes": self.pair_classes,
                "classification": self.classification}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def classify_mimo(u: UnitaryOp, tol: float = CLASSIFY_TOL) -> MimoVerdict:
    """I_3(A_i; A_i^c; C_j) for all pairs; labels must be A1..An and C1..Cm."""
    rho = choi_state(u)
    n, m = len(u.in_register), len(u.out_register)
    vals = np.zeros((n, m))
    classes = []
    for i in range(n):
        row = []
        for j in range(m):
            vals[i, j] = mimo_tripartite(rho, i + 1, j + 1)
            d_ic = u.in_register.total_dim // u.in_register.dims[i]
            d_jc = u.out_register.total_dim // u.out_register.dims[j]
            md = min(u.in_register.dims[i], d_ic, u.out_register.dims[j], d_jc)
            row.append(_classify_value(vals[i, j], md, tol))
        classes.append(row)
    flat = {c for row in classes for c in row}
    glob = flat.pop() if len(flat) == 1 else "intermediate"
    return MimoVerdict(vals, classes, glob)


@dataclass
class MimoForm:
    """U = ((x)_j W_j) Wired({f_ij}) ((x)_i V_i)^dag with A_i = (x)_j A_{i->j}."""
    dims: np.ndarray
    factors: dict = field(repr=False)
    in_changes: list = field(repr=False)
    out_changes: list = field(repr=False)

    def reassemble(self) -> np.ndarray:
        n, m = self.dims.shape
        core = mimo_wired(self.factors, n, m).matrix
        return kron(*self.out_changes) @ core @ kron(*self.in_changes).conj().T


def _peel(u: UnitaryOp, src: str, targets: list[str], sizes: list[int], rng) -> np.ndarray:
    """Basis change on ``src`` aligning it with (x)_k factors routed to targets[k]."""
    d = u.in_register.dim(src)
    v = np.eye(d, dtype=complex)
    done = 1
    for tgt, size in zip(targets[:-1], sizes[:-1]):
        rest = d // done
        alg = _routed_algebra(u, src, tgt, size * size)
        # express in the current basis and strip the already peeled factors
        alg = np.einsum("ba,kbc,cd->kad", v.conj(), alg, v)
        alg = alg.reshape(len(alg), done, rest, done, rest)
        alg = np.einsum("kiaib->kab", alg) / done
        alg = alg / np.linalg.norm(alg.reshape(len(alg), -1), axis=1)[:, None, None]
        v = v @ kron(np.eye(done), _split_basis(alg, size, rng))
        done *= size
    return v


def extract_mimo_factors(u: UnitaryOp, seed=0) -> MimoForm:
    """Factor a minimal MIMO unitary into wires U_{i->j}, peeling one output at a time."""
    verdict = classify_mimo(u)
    if np.abs(verdict.i3).max() > CLASSIFY_TOL:
        raise NotMinimal(f"max |I_3| = {np.abs(verdict.i3).max():.6g} is not zero")
    ins, outs = u.in_register.labels, u.out_register.labels
    n, m = len(ins), len(outs)
    rho = choi_state(u)
    dims = np.zeros((n, m), dtype=int)
    for i in range(n):
        for j in range(m):
            dims[i, j] = _int_dim(mutual_information(rho, ins[i], outs[j]), f"{ins[i]}-{outs[j]}")
    if (list(dims.prod(axis=1)) != list(u.in_register.dims)
            or list(dims.prod(axis=0)) != list(u.out_register.dims)):
        raise NonIntegerDims(f"wire dims {dims.tolist()} inconsistent with the registers")
    rng = make_rng(seed)
    ud = _dagger(u)
    v_in = [_peel(u, ins[i], list(outs), list(dims[i]), rng) for i in range(n)]
    w_out = [_peel(ud, outs[j], list(ins), list(dims[:, j]), rng) for j in range(m)]
    ut = kron(*w_out).conj().T @ u.matrix @ kron(*v_in)
    total = u.in_register.total_dim
    # output axes are (j, i) j-major; bring them to (i, j) order
    t = ut.reshape([int(dims[i, j]) for j in range(m) for i in range(n)] + [total])
    perm = [j * n + i for i in range(n) for j in range(m)]
    t = t.transpose(perm + [n * m]).reshape(total, total)
    flat = _kron_factors(t, [int(dims[i, j]) for i in range(n) for j in range(m)])
    factors = {(i, j): flat[i * m + j] for i in range(n) for j in range(m)}
    form = MimoForm(dims, factors, v_in, w_out)
    if not equal_up_to_phase(form.reassemble(), u.matrix, REASSEMBLY_TOL):
        raise ExtractionError("MIMO reassembly failed")
    return form


# --- perfect tensors and codes -------------------------------------------------

def perfect_tensor_check(psi: PureState, tol: float = 1e-8) -> bool:
    """All three balanced bipartitions of a four-part pure state maximally mixed."""
    reg = psi.register
    if len(reg) != 4 or len(set(reg.dims)) != 1:
        raise ValueError("perfect tensor check needs four parts of equal dimension")
    labels = reg.labels
    d2 = reg.dims[0] ** 2
    for other in labels[1:]:
        rho = reduced_density(psi, [labels[0], other]).matrix
        if np.abs(rho - np.eye(d2) / d2).max() > tol:
            return False
    return True


def verify_subspace_code(u: UnitaryOp, fixed_input, code_subspace, out_keep, tol: float = 1e-8) -> bool:
    """True iff the residual channel restricted to the code is an isometry into ``out_keep``.

    The check sends half of a maximally entangled state on R (x) code through
    the channel and tests purity of the output.
    """
    keep = [out_keep] if isinstance(out_keep, str) else list(out_keep)
    traced = [l for l in u.out_register.labels if l not in keep]
    ch = residual_channel(u, fixed_input, traced)
    if len(ch.in_register) != 1:
        raise ValueError("code verification needs exactly one free input part")
    code = np.array([np.asarray(c, dtype=complex).reshape(-1) for c in code_subspace]).T
    d = ch.in_register.total_dim
    if code.shape[0] != d:
        raise ValueError(f"code vectors must have length {d}")
    k = code.shape[1]
    if np.abs(code.conj().T @ code - np.eye(k)).max() > 1e-10:
        raise ValueError("code basis is not orthonormal")
    label = ch.in_register.labels[0]
    reg = Register([("R", k), (label, d)])
    psi = PureState(reg, code.T.reshape(-1) / np.sqrt(k))
    out = ch(psi)
    purity = float(np.real(np.trace(out.matrix @ out.matrix)))
    return abs(purity - 1) <= tol


# --- qubit perfect tensors by sampling ----------------------------------------

def _batched_entropy(rho: np.ndarray) -> np.ndarray:
    p = np.clip(np.linalg.eigvalsh(rho), 0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.sum(np.where(p > 0, p * np.log2(p), 0.0), axis=-1)


def qubit_i3_samples(n_samples: int, seed, batch: int = 10_000) -> np.ndarray:
    """I_3 of the Choi states of Haar-random two-qubit unitaries, sampled in batches.

    Sampling evidence only: the most negative value stays away from -2.
    """
    from .zoo import complex_gaussian

    out = np.empty(n_samples)
    for start in range(0, n_samples, batch):
        size = min(batch, n_samples - start)
        rng = make_rng([*np.atleast_1d(seed).tolist(), start])
        q, r = np.linalg.qr(complex_gaussian(rng, (size, 4, 4)))
        diag = np.diagonal(r, axis1=1, axis2=2)
        q = q * (diag / np.abs(diag))[:, None, :]
        # Choi amplitudes psi[a, b, c, d] = U[(c, d), (a, b)] / 2
        psi = q.transpose(0, 2, 1).reshape(size, 2, 2, 2, 2) / 2
        rho_ac = np.einsum("nabcd,nebfd->nacef", psi, psi.conj()).reshape(size, 4, 4)
        rho_ad = np.einsum("nabcd,nebcf->nadef", psi, psi.conj()).reshape(size, 4, 4)
        rho_c = np.einsum("nabcd,nabed->nce", psi, psi.conj())
        rho_d = np.einsum("nabcd,nabce->nde", psi, psi.conj())
        # S(A) = S(B) = 1 and S(CD) = 2 for unitary Choi states
        out[start:start + size] = (2 + _batched_entropy(rho_c) + _batched_entropy(rho_d)
                                   - _batched_entropy(rho_ac) - _batched_entropy(rho_ad) - 2)
    return out
