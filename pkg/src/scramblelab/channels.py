"""Choi states, channels, residual channels, Petz recovery and distance witnesses.

A Channel is stored through its normalized Choi matrix
``J = (id (x) N)(Phi+)``, ordered input-then-output. Its action is
``N(|i><i'|) = d_in * J[i, :, i', :]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .info import entropy
from .linalg import (DensityMatrix, PureState, Register, RegisterError, UnitaryOp,
                     permute_state, trace_norm)

PINV_TOL = 1e-12


def choi_state(u: UnitaryOp, in_split=None, out_split=None) -> PureState:
    """(U (x) id)(Phi+ (x) ... ) as a pure state on inputs-then-outputs.

    ``in_split`` / ``out_split`` optionally relabel the parts; they must name
    as many parts as the corresponding register has.
    """
    in_reg, out_reg = u.in_register, u.out_register
    if in_split is not None:
        in_split = list(in_split)
        if len(in_split) != len(in_reg):
            raise RegisterError(f"input split {in_split} does not match {in_reg.labels}")
        in_reg = Register(zip(in_split, in_reg.dims))
    if out_split is not None:
        out_split = list(out_split)
        if len(out_split) != len(out_reg):
            raise RegisterError(f"output split {out_split} does not match {out_reg.labels}")
        out_reg = Register(zip(out_split, out_reg.dims))
    reg = in_reg + out_reg
    # amplitude at (in=k, out=o) is U[o, k] / sqrt(d_in)
    amps = u.matrix.T.reshape(-1) / np.sqrt(in_reg.total_dim)
    return PureState(reg, amps, check=False)


def mimo_choi(u: UnitaryOp) -> PureState:
    return choi_state(u)


@dataclass(frozen=True)
class Channel:
    in_register: Register
    out_register: Register
    choi: np.ndarray = field(repr=False)

    def __init__(self, in_register, out_register, choi, check: bool = True):
        in_register = in_register if isinstance(in_register, Register) else Register(in_register)
        out_register = out_register if isinstance(out_register, Register) else Register(out_register)
        j = np.asarray(choi, dtype=complex)
        n = in_register.total_dim * out_register.total_dim
        if j.shape != (n, n):
            raise RegisterError(f"Choi matrix shape {j.shape}, expected {(n, n)}")
        if check:
            if np.abs(j - j.conj().T).max() > 1e-10:
                raise ValueError("Choi matrix not Hermitian")
            if np.linalg.eigvalsh(j).min() < -1e-10:
                raise ValueError("Choi matrix not positive (channel not CP)")
            din = in_register.total_dim
            marg = np.einsum("iaja->ij", self._t(j, din, out_register.total_dim))
            if np.abs(marg - np.eye(din) / din).max() > 1e-10:
                raise ValueError("channel is not trace preserving")
        j.setflags(write=False)
        object.__setattr__(self, "in_register", in_register)
        object.__setattr__(self, "out_register", out_register)
        object.__setattr__(self, "choi", j)

    @staticmethod
    def _t(j, din, dout):
        return j.reshape(din, dout, din, dout)

    @property
    def d_in(self) -> int:
        return self.in_register.total_dim

    @property
    def d_out(self) -> int:
        return self.out_register.total_dim

    def choi_tensor(self) -> np.ndarray:
        """Unnormalized Choi tensor ``N(|i><i'|)[o, o'] = T[i, o, i', o']``."""
        return self._t(self.choi, self.d_in, self.d_out) * self.d_in

    def choi_state(self) -> DensityMatrix:
        """Normalized Choi state; clashing input labels get a trailing prime."""
        out_labels = set(self.out_register.labels)
        ren = {l: l + "'" for l in self.in_register.labels if l in out_labels}
        return DensityMatrix(self.in_register.rename(ren) + self.out_register, self.choi, check=False)

    def superoperator(self) -> np.ndarray:
        """Matrix S with vec(N(X)) = S vec(X), row-major vec."""
        t = self.choi_tensor()
        return t.transpose(1, 3, 0, 2).reshape(self.d_out ** 2, self.d_in ** 2)

    def __call__(self, rho):
        return apply_channel(self, rho)


def apply_channel(ch: Channel, rho) -> DensityMatrix:
    """Apply ``ch`` to the channel-input parts of ``rho``.

    Other parts act as a reference (identity channel). The output parts take
    the position of the first input part.
    """
    if isinstance(rho, PureState):
        rho = rho.density()
    reg = rho.register
    ins = list(ch.in_register.labels)
    for l in ins:
        if reg.dim(l) != ch.in_register.dim(l):
            raise RegisterError(f"part {l!r} has the wrong dimension for the channel input")
    others = [l for l in reg.labels if l not in ins]
    first = min(reg.index(l) for l in ins)
    pos = sum(1 for l in reg.labels[:first] if l in others)
    if list(reg.labels) != others + ins:
        rho = permute_state(rho, others + ins)
    do = reg.dim(others) if others else 1
    t = rho.matrix.reshape(do, ch.d_in, do, ch.d_in)
    out = np.einsum("aibj,icjd->acbd", t, ch.choi_tensor(), optimize=True)
    m = out.reshape(do * ch.d_out, do * ch.d_out)
    res = DensityMatrix([p for p in reg.parts if p[0] in others] + list(ch.out_register.parts),
                        m, check=False)
    outs = list(ch.out_register.labels)
    order = others[:pos] + outs + others[pos:]
    return permute_state(res, order) if order != list(res.register.labels) else res


def _fixed_state_matrix(state) -> np.ndarray:
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    if isinstance(state, DensityMatrix):
        return np.asarray(state.matrix)
    m = np.asarray(state, dtype=complex)
    if m.ndim == 1:
        m = np.outer(m, m.conj())
    return m


def residual_channel(u: UnitaryOp, fixed_input, traced_outputs) -> Channel:
    """Channel from the free input parts to the kept output parts of ``u`` with
    the other inputs fixed and the listed outputs traced away.

    ``fixed_input`` is ``(label, state)`` or a dict ``{label: state}``; a state
    may be a PureState, a DensityMatrix, or a raw vector/matrix.
    """
    if isinstance(fixed_input, tuple):
        fixed_input = {fixed_input[0]: fixed_input[1]}
    in_reg, out_reg = u.in_register, u.out_register
    fixed = list(fixed_input)
    traced = [traced_outputs] if isinstance(traced_outputs, str) else list(traced_outputs)
    for l in fixed:
        in_reg.index(l)
    for l in traced:
        out_reg.index(l)
    free = [l for l in in_reg.labels if l not in fixed]
    kept = [l for l in out_reg.labels if l not in traced]
    sigma = np.ones((1, 1), dtype=complex)
    for l in [l for l in in_reg.labels if l in fixed]:
        s = _fixed_state_matrix(fixed_input[l])
        dl = in_reg.dim(l)
        if s.shape != (dl, dl):
            raise RegisterError(f"fixed state for {l!r} has shape {s.shape}, expected {(dl, dl)}")
        if (abs(np.trace(s) - 1) > 1e-10 or np.abs(s - s.conj().T).max() > 1e-10
                or np.linalg.eigvalsh(s).min() < -1e-10):
            raise ValueError(f"fixed input for {l!r} is not a state")
        sigma = np.kron(sigma, s)
    nout = len(out_reg)
    t = u.tensor()
    ax_out = [out_reg.index(l) for l in kept + traced]
    ax_in = [nout + in_reg.index(l) for l in free + [l for l in in_reg.labels if l in fixed]]
    dk = out_reg.dim(kept) if kept else 1
    dt = out_reg.dim(traced) if traced else 1
    df = in_reg.dim(free) if free else 1
    dx = sigma.shape[0]
    k = t.transpose(ax_out + ax_in).reshape(dk, dt, df, dx)
    j = np.einsum("ktfx,xy,ltgy->fkgl", k, sigma, k.conj(), optimize=True)
    j = j.reshape(df * dk, df * dk) / df
    return Channel(in_reg.sub(free) if free else Register([]),
                   Register(p for p in out_reg.parts if p[0] in kept),
                   j, check=False)


def _single_part(part):
    if isinstance(part, tuple):
        return Register([part])
    return part if isinstance(part, Register) else Register(part)


def identity_channel(in_part, out_part=None) -> Channel:
    ri = _single_part(in_part)
    ro = ri if out_part is None else _single_part(out_part)
    if ri.total_dim != ro.total_dim:
        raise RegisterError("identity channel needs equal dimensions")
    d = ri.total_dim
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    return Channel(ri, ro, np.outer(phi, phi))


def depolarizing(in_part, out_part=None) -> Channel:
    ri = _single_part(in_part)
    ro = ri if out_part is None else _single_part(out_part)
    n = ri.total_dim * ro.total_dim
    return Channel(ri, ro, np.eye(n) / n)


def dephasing(part, out_part=None) -> Channel:
    ri = _single_part(part)
    ro = ri if out_part is None else _single_part(out_part)
    if ri.total_dim != ro.total_dim:
        raise RegisterError("dephasing channel needs equal dimensions")
    d = ri.total_dim
    j = np.zeros((d * d, d * d), dtype=complex)
    idx = np.arange(d) * d + np.arange(d)
    j[idx, idx] = 1 / d
    return Channel(ri, ro, j)


def _psd_power(m: np.ndarray, power: float) -> np.ndarray:
    evals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(evals > PINV_TOL, np.abs(evals) ** power, 0.0)
    return (vecs * f) @ vecs.conj().T


def petz_recovery(rho_bd: DensityMatrix, b, d) -> Channel:
    """Petz transpose map R_{D->BD}(X) = rho_BD^1/2 (I_B (x) rho_D^-1/2 X rho_D^-1/2) rho_BD^1/2.

    ``rho_D`` is inverted on its support (eigenvalues below 1e-12 dropped).
    Output parts are ordered B then D.
    """
    b = [b] if isinstance(b, str) else list(b)
    d = [d] if isinstance(d, str) else list(d)
    rho_bd = permute_state(rho_bd, b + d)
    reg = rho_bd.register
    db, dd = reg.dim(b), reg.dim(d)
    rho_d = np.einsum("ijik->jk", rho_bd.matrix.reshape(db, dd, db, dd))
    k = _psd_power(rho_d, -0.5)
    s = _psd_power(rho_bd.matrix, 0.5)
    # w[x, :, b] = S (|b> (x) K|x>)
    cols = np.einsum("bc,dx->xbcd", np.eye(db), k).reshape(dd, db, db * dd)
    w = np.einsum("ij,xbj->xib", s, cols)
    j = np.einsum("xib,yjb->xiyj", w, w.conj()).reshape(dd * db * dd, dd * db * dd) / dd
    return Channel(reg.sub(d), Register(reg.parts), j, check=False)


def diamond_witness(ch1: Channel, ch2: Channel, probe) -> float:
    """||(id (x) N1)(probe) - (id (x) N2)(probe)||_1, a lower bound on ||N1 - N2||_diamond."""
    if ch1.in_register.dims != ch2.in_register.dims or ch1.out_register.dims != ch2.out_register.dims:
        raise RegisterError("channels act between different spaces")
    o1 = apply_channel(ch1, probe)
    o2 = apply_channel(ch2, probe)
    return trace_norm(o1.matrix - o2.matrix)


def unitary_witness(u: UnitaryOp, v: UnitaryOp, probe) -> float:
    """||U s U^dag - V s V^dag||_1 for a probe state on the common input space."""
    if u.matrix.shape != v.matrix.shape:
        raise RegisterError("unitaries of different shape")
    s = _fixed_state_matrix(probe)
    return trace_norm(u.matrix @ s @ u.matrix.conj().T - v.matrix @ s @ v.matrix.conj().T)


def coherent_information(ch: Channel, psi: PureState) -> float:
    """S(C) - S(RC) on (id (x) N)(psi), with R = every part of psi that is not the channel input."""
    out = apply_channel(ch, psi)
    c = list(ch.out_register.labels)
    return entropy(out, c) - entropy(out)


def gurvits_distance(rho: DensityMatrix) -> float:
    n = rho.register.total_dim
    return float(np.linalg.norm(rho.matrix - np.eye(n) / n))


def gurvits_separable(rho: DensityMatrix) -> bool:
    """Sufficient separability test ||rho - tau||_2 <= 1/(d_1 d_2) for a two-part state."""
    if len(rho.register) != 2:
        raise RegisterError("Gurvits ball test needs a two-part state")
    return gurvits_distance(rho) <= 1.0 / rho.register.total_dim
