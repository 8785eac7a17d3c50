"""Subsystem bookkeeping and the dense complex linear algebra everything else uses.

Index convention: a register with parts ``(X1, d1), ..., (Xn, dn)`` maps the
multi-index ``(i1, ..., in)`` to the flat index ``((i1 * d2 + i2) * d3 + ...)``,
i.e. the leftmost part is the most significant digit (numpy row-major order).
``np.kron(a, b)`` follows the same convention, with ``a`` acting on the left part.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-10
HERM_TOL = 1e-8
EIG_CLAMP = 1e-10


class RegisterError(ValueError):
    pass


@dataclass(frozen=True)
class Register:
    parts: tuple[tuple[str, int], ...]

    def __init__(self, parts: Iterable[tuple[str, int]]):
        parts = tuple((str(label), int(dim)) for label, dim in parts)
        labels = [p[0] for p in parts]
        if len(set(labels)) != len(labels):
            raise RegisterError(f"duplicate labels in register: {labels}")
        for label, dim in parts:
            if dim < 1:
                raise RegisterError(f"part {label!r} has dimension {dim}")
        object.__setattr__(self, "parts", parts)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p[0] for p in self.parts)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p[1] for p in self.parts)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.parts else 1

    def __len__(self):
        return len(self.parts)

    def __contains__(self, label):
        return label in self.labels

    def dim(self, labels) -> int:
        """Total dimension of one label or a collection of labels."""
        if isinstance(labels, str):
            labels = [labels]
        d = 1
        for label in labels:
            d *= self.parts[self.index(label)][1]
        return d

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise RegisterError(f"unknown label {label!r}; register has {self.labels}") from None

    def indices(self, labels) -> list[int]:
        if isinstance(labels, str):
            labels = [labels]
        return [self.index(label) for label in labels]

    def sub(self, labels) -> "Register":
        """Sub-register of the given labels, kept in this register's order."""
        idx = sorted(set(self.indices(labels)))
        return Register(self.parts[i] for i in idx)

    def complement(self, labels) -> tuple[str, ...]:
        keep = set(self.indices(labels))
        return tuple(l for i, l in enumerate(self.labels) if i not in keep)

    def __add__(self, other: "Register") -> "Register":
        return Register(self.parts + other.parts)

    def rename(self, mapping: dict[str, str]) -> "Register":
        return Register((mapping.get(l, l), d) for l, d in self.parts)


def _as_register(reg) -> Register:
    return reg if isinstance(reg, Register) else Register(reg)


@dataclass(frozen=True)
class PureState:
    register: Register
    amplitudes: np.ndarray = field(repr=False)

    def __init__(self, register, amplitudes, check: bool = True):
        register = _as_register(register)
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.size != register.total_dim:
            raise RegisterError(
                f"{amps.size} amplitudes for register of dimension {register.total_dim}")
        if check and abs(np.linalg.norm(amps) - 1) > NORM_TOL:
            raise ValueError(f"state not normalized: norm {np.linalg.norm(amps)!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "register", register)
        object.__setattr__(self, "amplitudes", amps)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.register.dims)

    def density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(self.register, np.outer(v, v.conj()), check=False)

    def overlap(self, other: "PureState") -> complex:
        if self.register.dims != other.register.dims:
            raise RegisterError("overlap between states of different shape")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    register: Register
    matrix: np.ndarray = field(repr=False)

    def __init__(self, register, matrix, check: bool = True):
        register = _as_register(register)
        m = np.asarray(matrix, dtype=complex)
        n = register.total_dim
        if m.shape != (n, n):
            raise RegisterError(f"matrix shape {m.shape} does not match register dimension {n}")
        if check:
            if np.abs(m - m.conj().T).max(initial=0) > NORM_TOL:
                raise ValueError("density matrix not Hermitian")
            if abs(np.trace(m) - 1) > NORM_TOL:
                raise ValueError(f"density matrix has trace {np.trace(m).real!r}")
            if np.linalg.eigvalsh(m).min() < -NORM_TOL:
                raise ValueError("density matrix not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "register", register)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def maximally_mixed(cls, register) -> "DensityMatrix":
        register = _as_register(register)
        n = register.total_dim
        return cls(register, np.eye(n) / n, check=False)

    def tensor(self) -> np.ndarray:
        dims = self.register.dims
        return self.matrix.reshape(dims + dims)


@dataclass(frozen=True)
class UnitaryOp:
    """Isometry ``in_register -> out_register`` stored densely.

    ``perm`` is set by constructors of permutation unitaries: input basis index
    ``k`` is mapped to output basis index ``perm[k]``.
    """
    in_register: Register
    out_register: Register
    matrix: np.ndarray = field(repr=False)
    perm: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __init__(self, in_register, out_register, matrix, perm=None, check: bool = True):
        in_register = _as_register(in_register)
        out_register = _as_register(out_register)
        m = np.asarray(matrix, dtype=complex)
        shape = (out_register.total_dim, in_register.total_dim)
        if m.shape != shape:
            raise RegisterError(f"matrix shape {m.shape}, registers require {shape}")
        if shape[0] < shape[1]:
            raise RegisterError("output dimension smaller than input dimension")
        if check:
            if np.abs(m.conj().T @ m - np.eye(shape[1])).max() > NORM_TOL:
                raise ValueError("matrix is not an isometry")
            if shape[0] == shape[1] and np.abs(m @ m.conj().T - np.eye(shape[0])).max() > NORM_TOL:
                raise ValueError("matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "in_register", in_register)
        object.__setattr__(self, "out_register", out_register)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "perm", None if perm is None else np.asarray(perm, dtype=np.int64))

    @property
    def is_unitary(self) -> bool:
        return self.in_register.total_dim == self.out_register.total_dim

    def __matmul__(self, other: "UnitaryOp") -> "UnitaryOp":
        """Composition ``self after other``; requires matching middle dims."""
        if other.out_register.dims != self.in_register.dims:
            raise RegisterError("cannot compose: dimension mismatch")
        perm = None
        if self.perm is not None and other.perm is not None:
            perm = self.perm[other.perm]
        return UnitaryOp(other.in_register, self.out_register,
                         self.matrix @ other.matrix, perm=perm, check=False)

    def tensor(self) -> np.ndarray:
        """Matrix reshaped to ``out_dims + in_dims``."""
        return self.matrix.reshape(self.out_register.dims + self.in_register.dims)


def kron(*mats) -> np.ndarray:
    if not mats:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, [np.asarray(m) for m in mats])


def _split(register: Register, keep) -> tuple[list[int], list[int]]:
    k = sorted(set(register.indices(keep)))
    drop = [i for i in range(len(register)) if i not in k]
    return k, drop


def partial_trace(rho, keep) -> DensityMatrix:
    """Reduced density matrix on ``keep``; accepts a DensityMatrix or a PureState."""
    if isinstance(rho, PureState):
        return reduced_density(rho, keep)
    reg = rho.register
    k, drop = _split(reg, keep)
    dims = reg.dims
    n = len(dims)
    dk = int(np.prod([dims[i] for i in k], dtype=np.int64))
    dd = int(np.prod([dims[i] for i in drop], dtype=np.int64))
    t = rho.matrix.reshape(dims + dims)
    t = t.transpose(k + drop + [n + i for i in k] + [n + i for i in drop])
    t = t.reshape(dk, dd, dk, dd)
    return DensityMatrix(reg.sub(reg.labels[i] for i in k), np.einsum("ijkj->ik", t), check=False)


def _bipartite_matrix(psi: PureState, keep) -> tuple[np.ndarray, Register, Register]:
    reg = psi.register
    k, drop = _split(reg, keep)
    t = psi.tensor().transpose(k + drop)
    left = Register(reg.parts[i] for i in k)
    right = Register(reg.parts[i] for i in drop)
    return t.reshape(left.total_dim, right.total_dim), left, right


def reduced_density(psi: PureState, keep) -> DensityMatrix:
    m, left, _ = _bipartite_matrix(psi, keep)
    return DensityMatrix(left, m @ m.conj().T, check=False)


def clamp_spectrum(evals: np.ndarray) -> np.ndarray:
    evals = np.asarray(evals, dtype=float)
    return np.where((evals < 0) & (evals >= -EIG_CLAMP), 0.0, evals)


def marginal_spectrum(state, labels) -> np.ndarray:
    """Eigenvalues (descending) of the reduced state on ``labels``.

    Pure states go through an SVD of the smaller side of the cut, so large Choi
    states never materialize a full density matrix.
    """
    reg = state.register
    labels = list(labels)
    if isinstance(state, PureState):
        if not labels:
            return np.ones(1)
        if len(set(labels)) == len(reg):
            return np.ones(1)
        m, _, _ = _bipartite_matrix(state, labels)
        s = np.linalg.svd(m, compute_uv=False)
        return clamp_spectrum(s ** 2)
    if not labels:
        return np.array([np.trace(state.matrix).real])
    red = partial_trace(state, labels)
    return clamp_spectrum(np.linalg.eigvalsh(red.matrix)[::-1])


def _check_hermitian(m: np.ndarray, tol: float = HERM_TOL):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if np.abs(m - m.conj().T).max(initial=0) > tol:
        raise ValueError("matrix is not Hermitian")


def jacobi_eigh(m, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each 2x2 pivot is first made real by a phase on the second basis vector,
    then annihilated by a real plane rotation. Stops once the off-diagonal
    Frobenius mass drops below ``tol * max(1, ||m||_F)``.
    """
    a = np.array(m, dtype=complex)
    _check_hermitian(a)
    a = (a + a.conj().T) / 2
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, np.linalg.norm(a))
    mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if np.sqrt(np.sum(np.abs(a[mask]) ** 2)) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                z = a[p, q]
                r = abs(z)
                if r < 1e-300:
                    continue
                phase = z / r
                theta = 0.5 * np.arctan2(2 * r, (a[q, q] - a[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ rot
                a[cols, :] = rot.conj().T @ a[cols, :]
                a[p, q] = a[q, p] = 0
                v[:, cols] = v[:, cols] @ rot
    else:
        if np.sqrt(np.sum(np.abs(a[mask]) ** 2)) > tol * scale:
            raise RuntimeError("Jacobi iteration did not converge")
    evals = np.diag(a).real
    order = np.argsort(evals)[::-1]
    return evals[order], v[:, order]


def eig_hermitian(m, method: str = "lapack") -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching unitary eigenvector matrix."""
    m = np.asarray(m, dtype=complex)
    _check_hermitian(m)
    if method == "jacobi":
        return jacobi_eigh(m)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    evals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    return evals[::-1], vecs[:, ::-1]


def trace_norm(m) -> float:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("trace norm needs a square matrix")
    if np.abs(m - m.conj().T).max(initial=0) <= 1e-12 * max(1.0, np.abs(m).max(initial=0)):
        return float(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2)).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def schmidt(psi: PureState, cut) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt decomposition across ``cut`` versus the remaining labels.

    Returns ``(coeffs, left, right)`` with ``psi = sum_k coeffs[k] left[:, k] (x) right[:, k]``.
    """
    cut = [cut] if isinstance(cut, str) else list(cut)
    k, drop = _split(psi.register, cut)
    if not k or not drop:
        raise RegisterError("Schmidt cut must be a nonempty proper subset of the labels")
    m, _, _ = _bipartite_matrix(psi, cut)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return s, u, vh.T


def maximally_entangled(a: tuple[str, int], b: tuple[str, int]) -> PureState:
    (la, da), (lb, db) = a, b
    if da != db:
        raise RegisterError(f"maximally entangled state needs equal dims, got {da} and {db}")
    return PureState([(la, da), (lb, db)], np.eye(da).reshape(-1) / np.sqrt(da))


def product_state(*states):
    """Tensor product of PureStates or DensityMatrices (all of the same kind)."""
    reg = reduce(lambda r, s: r + s.register, states[1:], states[0].register)
    if all(isinstance(s, PureState) for s in states):
        return PureState(reg, kron(*[s.amplitudes[:, None] for s in states]).reshape(-1))
    mats = [s.density().matrix if isinstance(s, PureState) else s.matrix for s in states]
    return DensityMatrix(reg, kron(*mats), check=False)


def permute_state(state, order: Sequence[str]):
    """Reorder the parts of a state to ``order`` (a permutation of its labels)."""
    reg = state.register
    idx = reg.indices(order)
    if sorted(idx) != list(range(len(reg))):
        raise RegisterError(f"{order} is not a permutation of {reg.labels}")
    new = Register(reg.parts[i] for i in idx)
    if isinstance(state, PureState):
        return PureState(new, state.tensor().transpose(idx).reshape(-1), check=False)
    n = len(reg)
    t = state.tensor().transpose(idx + [n + i for i in idx])
    return DensityMatrix(new, t.reshape(new.total_dim, new.total_dim), check=False)


def basis_state(register, index) -> PureState:
    """Computational basis state; ``index`` is flat or a tuple of digits."""
    register = _as_register(register)
    if not isinstance(index, (int, np.integer)):
        index = int(np.ravel_multi_index(tuple(index), register.dims))
    v = np.zeros(register.total_dim, dtype=complex)
    v[index] = 1
    return PureState(register, v)


def equal_up_to_phase(a, b, tol: float = 1e-8) -> bool:
    """Operator 2-norm test of ``a == e^{i phi} b``, phase fixed by the largest entry of ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) == 0:
        return np.linalg.norm(a, 2) <= tol
    phase = a[k] / b[k]
    if abs(abs(phase) - 1) > 1e-6:
        return False
    phase /= abs(phase)
    return np.linalg.norm(a - phase * b, 2) <= tol
