"""Constructors for the unitary and isometry families, Haar sampling, and
integer matrices modulo a prime for the multi-input construction."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import UnitaryOp, kron

# Convention for bipartite unitaries: inputs ("A", "B"), outputs ("C", "D").
IN_LABELS = ("A", "B")
OUT_LABELS = ("C", "D")


def bipartite(matrix, dA: int, dB: int, dC: int | None = None, dD: int | None = None,
              perm=None, check: bool = True) -> UnitaryOp:
    dC = dA if dC is None else dC
    dD = dB if dD is None else dD
    return UnitaryOp([("A", dA), ("B", dB)], [("C", dC), ("D", dD)], matrix, perm=perm, check=check)


def permutation_unitary(in_register, out_register, perm) -> UnitaryOp:
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.size
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("not a permutation")
    m = np.zeros((n, n), dtype=complex)
    m[perm, np.arange(n)] = 1
    return UnitaryOp(in_register, out_register, m, perm=perm, check=False)


def identity(dA: int, dB: int) -> UnitaryOp:
    n = dA * dB
    return permutation_unitary([("A", dA), ("B", dB)], [("C", dA), ("D", dB)], np.arange(n))


def swap(d: int) -> UnitaryOp:
    a, b = np.divmod(np.arange(d * d), d)
    return permutation_unitary([("A", d), ("B", d)], [("C", d), ("D", d)], b * d + a)


def _scrambler_perm(d: int) -> np.ndarray:
    a, b = np.divmod(np.arange(d * d), d)
    return ((a + b) % d) * d + (a - b) % d


def u_scrambler(d: int) -> UnitaryOp:
    """|i>|j> -> |i+j>|i-j> (mod d); a permutation only for odd d."""
    if d < 1 or d % 2 == 0:
        raise ValueError(f"scrambler needs odd d, got {d}")
    return permutation_unitary([("A", d), ("B", d)], [("C", d), ("D", d)], _scrambler_perm(d))


def u_counter(d: int, d_s: int) -> UnitaryOp:
    """Scrambler on the block a, b < d_s, identity on every other basis pair."""
    if d_s < 1 or d_s % 2 == 0 or d_s > d:
        raise ValueError(f"need odd d_s with 1 <= d_s <= d, got d_s={d_s}, d={d}")
    a, b = np.divmod(np.arange(d * d), d)
    perm = a * d + b
    block = (a < d_s) & (b < d_s)
    inner = _scrambler_perm(d_s)[a[block] * d_s + b[block]]
    c, e = np.divmod(inner, d_s)
    perm[block] = c * d + e
    return permutation_unitary([("A", d), ("B", d)], [("C", d), ("D", d)], perm)


def u_capacity_gap(d: int, d0: int) -> UnitaryOp:
    """Swap |a>|b> exactly when one index lies below d0 and the other does not."""
    if not 1 <= d0 < d:
        raise ValueError(f"need 1 <= d0 < d, got d0={d0}, d={d}")
    a, b = np.divmod(np.arange(d * d), d)
    straddle = (a < d0) != (b < d0)
    perm = np.where(straddle, b * d + a, a * d + b)
    return permutation_unitary([("A", d), ("B", d)], [("C", d), ("D", d)], perm)


def _mat(u):
    return u.matrix if isinstance(u, UnitaryOp) else np.asarray(u, dtype=complex)


def u_crisscross(u_ll, u_lr, u_rl, u_rr) -> UnitaryOp:
    """Criss-cross unitary A_L->C_L, A_R->D_L, B_L->C_R, B_R->D_R.

    Inputs ordered A = A_L (x) A_R, B = B_L (x) B_R; outputs C = C_L (x) C_R,
    D = D_L (x) D_R.
    """
    fs = [_mat(u) for u in (u_ll, u_lr, u_rl, u_rr)]
    for f in fs:
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError("criss-cross factors must be square unitaries")
        if np.abs(f.conj().T @ f - np.eye(f.shape[0])).max() > 1e-10:
            raise ValueError("criss-cross factor is not unitary")
    aL, aR, bL, bR = (f.shape[0] for f in fs)
    # kron order is (A_L, A_R, B_L, B_R) -> (C_L, D_L, C_R, D_R)
    k = kron(*fs).reshape(aL, aR, bL, bR, aL, aR, bL, bR)
    k = k.transpose(0, 2, 1, 3, 4, 5, 6, 7).reshape(aL * bL * aR * bR, -1)
    return bipartite(k, aL * aR, bL * bR, aL * bL, aR * bR, check=False)


def ghz_isometry() -> UnitaryOp:
    """Isometry |0> -> |00>, |1> -> |11> from A into C (x) D."""
    m = np.zeros((4, 2), dtype=complex)
    m[0, 0] = 1
    m[3, 1] = 1
    return UnitaryOp([("A", 2)], [("C", 2), ("D", 2)], m)


# --- Haar sampling -------------------------------------------------------------

def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; ``seed`` may be an int, a sequence of ints (substreams)
    or an existing Generator, which is returned unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def complex_gaussian(rng, shape) -> np.ndarray:
    """Standard complex normal samples, E|z|^2 = 1, via Box-Muller on PCG64 uniforms."""
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def haar_matrix(n: int, rng) -> np.ndarray:
    rng = make_rng(rng)
    if n < 1:
        raise ValueError("dimension must be positive")
    q, r = np.linalg.qr(complex_gaussian(rng, (n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(n: int, rng, in_register=None, out_register=None) -> UnitaryOp:
    in_register = in_register or [("A", n)]
    out_register = out_register or [("C", n)]
    return UnitaryOp(in_register, out_register, haar_matrix(n, rng), check=False)


def haar_bipartite(dA: int, dB: int, rng, dC: int | None = None, dD: int | None = None) -> UnitaryOp:
    return bipartite(haar_matrix(dA * dB, rng), dA, dB, dC, dD, check=False)


def haar_state(n: int, rng) -> np.ndarray:
    v = complex_gaussian(make_rng(rng), n)
    return v / np.linalg.norm(v)


# --- integer matrices modulo a prime -------------------------------------------

class NotInvertible(ValueError):
    pass


class NonPrimeModulus(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, int(n ** 0.5) + 1):
        if n % p == 0:
            return False
    return True


@dataclass(frozen=True)
class ModMatrix:
    d: int
    entries: np.ndarray = field(compare=False)

    def __init__(self, d: int, entries):
        e = np.asarray(entries, dtype=np.int64) % d
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("ModMatrix must be square")
        e.setflags(write=False)
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        return (isinstance(other, ModMatrix) and self.d == other.d
                and np.array_equal(self.entries, other.entries))

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        return ModMatrix(self.d, self.entries @ other.entries)

    def tolist(self):
        return self.entries.tolist()


def _require_prime(d: int):
    if not is_prime(d):
        raise NonPrimeModulus(f"modulus {d} is not prime")


def _rank_mod(a: np.ndarray, p: int) -> int:
    a = a.copy() % p
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if a[r, c]), None)
        if piv is None:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank] = a[rank] * pow(int(a[rank, c]), -1, p) % p
        for r in range(rows):
            if r != rank and a[r, c]:
                a[r] = (a[r] - a[r, c] * a[rank]) % p
        rank += 1
    return rank


def mod_inverse(m: ModMatrix) -> ModMatrix:
    """Gauss-Jordan inverse over the field Z_d."""
    p = m.d
    _require_prime(p)
    n = m.n
    aug = np.concatenate([m.entries.copy(), np.eye(n, dtype=np.int64)], axis=1)
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r, c] % p), None)
        if piv is None:
            raise NotInvertible(f"matrix is singular modulo {p}")
        aug[[c, piv]] = aug[[piv, c]]
        aug[c] = aug[c] * pow(int(aug[c, c]), -1, p) % p
        for r in range(n):
            if r != c and aug[r, c]:
                aug[r] = (aug[r] - aug[r, c] * aug[c]) % p
    return ModMatrix(p, aug[:, n:])


def mimo_criteria(m: ModMatrix) -> tuple[bool, bool, bool]:
    """(invertible, invertible after any elementary-row replacement, all entries units)."""
    p = m.d
    _require_prime(p)
    n = m.n
    c1 = _rank_mod(m.entries, p) == n
    c2 = True
    for j in range(n):
        for i in range(n):
            r = m.entries.copy()
            r[j] = 0
            r[j, i] = 1
            if _rank_mod(r, p) < n:
                c2 = False
                break
        if not c2:
            break
    c3 = bool(np.all(m.entries % p != 0))
    return c1, c2, c3


def m_n(n: int, d: int) -> ModMatrix:
    """I_n + (all-ones) modulo d."""
    return ModMatrix(d, np.eye(n, dtype=np.int64) + np.ones((n, n), dtype=np.int64))


def m_n_inverse_closed_form(n: int, d: int) -> ModMatrix:
    """-(n+1)^{-1} (E_n - (n+1) I_n), valid whenever n+1 is a unit mod d."""
    inv = pow(n + 1, -1, d)
    body = np.ones((n, n), dtype=np.int64) - (n + 1) * np.eye(n, dtype=np.int64)
    return ModMatrix(d, -inv * body)


def find_mimo_matrix(n: int, d: int, seed=0, max_tries: int = 200_000) -> ModMatrix:
    """A matrix passing all three criteria: M_n when it qualifies, else a seeded search."""
    _require_prime(d)
    m = m_n(n, d)
    if d > 2 and all(mimo_criteria(m)):
        return m
    rng = make_rng(seed)
    for _ in range(max_tries):
        cand = ModMatrix(d, rng.integers(1, d, size=(n, n)))
        if all(mimo_criteria(cand)):
            return cand
    raise NotInvertible(f"no matrix satisfying the criteria found for n={n}, d={d}")


def u_mimo(m: ModMatrix) -> UnitaryOp:
    """|x> -> |M x mod d| on n parts A_1..A_n -> C_1..C_n of dimension d."""
    _require_prime(m.d)
    if _rank_mod(m.entries, m.d) < m.n:
        raise NotInvertible("matrix is not invertible modulo d")
    d, n = m.d, m.n
    digits = np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64)
    images = digits @ m.entries.T % d
    weights = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    perm = images @ weights
    in_reg = [(f"A{i + 1}", d) for i in range(n)]
    out_reg = [(f"C{j + 1}", d) for j in range(n)]
    return permutation_unitary(in_reg, out_reg, perm)


def mimo_wired(factors: dict, n: int, m: int) -> UnitaryOp:
    """Tensor product of local unitaries U_{i->j}, A_i = (x)_j A_{i->j}, C_j = (x)_i C_{i->j}.

    ``factors[(i, j)]`` is a square matrix (0-based indices); missing pairs are
    trivial (dimension 1).
    """
    dims = np.ones((n, m), dtype=int)
    mats = {}
    for (i, j), f in factors.items():
        f = _mat(f)
        dims[i, j] = f.shape[0]
        mats[i, j] = f
    order = [(i, j) for i in range(n) for j in range(m)]
    big = kron(*[mats.get(k, np.ones((1, 1))) for k in order])
    ndim = len(order)
    t = big.reshape([dims[k] for k in order] * 2)
    # output axes currently (i, j) row-major; regroup to j-major (C_j = (x)_i C_{i->j})
    out_axes = [order.index((i, j)) for j in range(m) for i in range(n)]
    t = t.transpose(out_axes + list(range(ndim, 2 * ndim)))
    in_reg = [(f"A{i + 1}", int(np.prod(dims[i, :]))) for i in range(n)]
    out_reg = [(f"C{j + 1}", int(np.prod(dims[:, j]))) for j in range(m)]
    total = int(np.prod(dims))
    return UnitaryOp(in_reg, out_reg, t.reshape(total, total), check=False)
