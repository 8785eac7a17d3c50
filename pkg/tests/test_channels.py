import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scramblelab.analysis import extract_crisscross
from scramblelab.channels import (Channel, apply_channel, choi_state, coherent_information,
                                  depolarizing, dephasing, diamond_witness, gurvits_distance,
                                  gurvits_separable, identity_channel, mimo_choi, petz_recovery,
                                  residual_channel, unitary_witness)
from scramblelab.info import cmi, mutual_information
from scramblelab.linalg import (DensityMatrix, PureState, RegisterError, maximally_entangled,
                                partial_trace, permute_state, trace_norm)
from scramblelab.zoo import (haar_bipartite, haar_matrix, identity, m_n, make_rng, mimo_wired,
                             u_counter, u_crisscross, u_mimo, u_scrambler)

CI_TARGET = 12 / 9 - 5 / 9 * math.log2(5)


def test_choi_identity_is_product_of_bell_pairs():
    psi = choi_state(identity(3, 2))
    t = psi.tensor()
    expect = np.einsum("ac,bd->abcd", np.eye(3), np.eye(2)) / np.sqrt(6)
    assert np.allclose(t, expect)


def test_choi_marginals_maximally_mixed_for_haar():
    rng = make_rng(5)
    for _ in range(100):
        u = haar_bipartite(2, 3, rng)
        rho = choi_state(u)
        assert np.abs(partial_trace(rho, ["A", "B"]).matrix - np.eye(6) / 6).max() < 1e-9
        assert np.abs(partial_trace(rho, ["C", "D"]).matrix - np.eye(6) / 6).max() < 1e-9


def test_choi_split_errors():
    with pytest.raises(RegisterError):
        choi_state(identity(2, 2), in_split=("A",))


def test_mimo_choi_examples():
    u = mimo_wired({(0, 0): np.eye(2), (1, 1): np.eye(3)}, 2, 2)
    psi = mimo_choi(u)
    t = psi.tensor()
    assert np.allclose(t, np.einsum("ac,bd->abcd", np.eye(2), np.eye(3)) / np.sqrt(6))
    rho = mimo_choi(u_mimo(m_n(2, 5)))
    assert np.allclose(partial_trace(rho, ["A1", "C1"]).matrix, np.eye(25) / 25, atol=1e-12)
    assert np.allclose(partial_trace(rho, ["A1", "A2"]).matrix, np.eye(25) / 25, atol=1e-12)


def test_residual_scrambler_depolarizing_and_dephasing():
    d = 3
    u = u_scrambler(d)
    depol = residual_channel(u, ("B", np.eye(d) / d), ["D"])
    assert np.allclose(depol.choi, depolarizing(("A", d), ("C", d)).choi)
    deph = residual_channel(u, ("B", np.eye(d)[0]), ["D"])
    assert np.allclose(deph.choi, dephasing(("A", d), ("C", d)).choi)


def test_residual_crisscross_structure():
    rng = make_rng(8)
    f_ll, f_lr, f_rl, f_rr = (haar_matrix(k, rng) for k in (2, 3, 2, 3))
    u = u_crisscross(f_ll, f_lr, f_rl, f_rr)
    sig_b = np.zeros((6, 6))
    sig_b[0, 0] = 1
    ch = residual_channel(u, ("B", sig_b), ["D"])
    rng2 = make_rng(9)
    g = haar_matrix(6, rng2)[:, 0]
    rho_a = np.outer(g, g.conj())
    out = apply_channel(ch, DensityMatrix([("A", 6)], rho_a)).matrix
    rho_al = np.einsum("ikjk->ij", rho_a.reshape(2, 3, 2, 3))
    b_l = f_rl @ np.eye(2)[:, [0]]
    expect = np.kron(f_ll @ rho_al @ f_ll.conj().T, b_l @ b_l.conj().T)
    assert np.allclose(out, expect)


def test_residual_consistent_with_choi_marginal():
    u = haar_bipartite(2, 3, 4)
    ch = residual_channel(u, ("B", np.eye(3) / 3), ["D"])
    rho_ac = partial_trace(choi_state(u), ["A", "C"]).matrix
    assert np.allclose(ch.choi, rho_ac, atol=1e-12)


def test_residual_errors():
    u = u_scrambler(3)
    with pytest.raises(RegisterError):
        residual_channel(u, ("Q", np.eye(3) / 3), ["D"])
    with pytest.raises(ValueError):
        residual_channel(u, ("B", np.eye(3)), ["D"])


def test_apply_channel_examples():
    psi = PureState([("A", 2)], [0.6, 0.8])
    assert np.allclose(apply_channel(depolarizing(("A", 2)), psi).matrix, np.eye(2) / 2)
    rho = DensityMatrix([("A", 2)], np.array([[0.3, 0.1j], [-0.1j, 0.7]]))
    assert np.allclose(apply_channel(identity_channel(("A", 2)), rho).matrix, rho.matrix)
    plus = PureState([("A", 2)], np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(apply_channel(dephasing(("A", 2)), plus).matrix, np.eye(2) / 2)
    with pytest.raises(RegisterError):
        apply_channel(depolarizing(("A", 3)), psi)


def test_apply_channel_trace_preserving_with_reference():
    ch = residual_channel(haar_bipartite(2, 2, 1), ("B", np.eye(2) / 2), ["D"])
    rng = make_rng(2)
    for _ in range(10):
        g = haar_matrix(6, rng)[:, 0]
        psi = PureState([("R", 3), ("A", 2)], g)
        out = apply_channel(ch, psi)
        assert out.register.labels == ("R", "C")
        assert abs(np.trace(out.matrix) - 1) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_channel_choi_marginal_is_tau(seed):
    u = haar_bipartite(2, 3, make_rng(seed))
    for fixed, traced, free in ((("B", np.eye(3) / 3), ["D"], 2), (("A", np.eye(2) / 2), ["C"], 3)):
        ch = residual_channel(u, fixed, traced)
        marg = np.einsum("iaja->ij", ch.choi.reshape(free, ch.d_out, free, ch.d_out))
        assert np.abs(marg - np.eye(free) / free).max() < 1e-10


def test_channel_rejects_non_cptp():
    with pytest.raises(ValueError):
        Channel([("A", 2)], [("C", 2)], np.eye(4) / 2)


def _petz_error(u, a="A", b="B", d="D"):
    rho = choi_state(u)
    rho_abd = partial_trace(rho, [a, b, d])
    rho_bd = partial_trace(rho, [b, d])
    rho_ad = partial_trace(rho, [a, d])
    r = petz_recovery(rho_bd, b, d)
    rec = apply_channel(r, rho_ad)
    rec = permute_state(rec, rho_abd.register.labels)
    return trace_norm(rec.matrix - rho_abd.matrix), cmi(rho, a, b, d)


def test_petz_exact_on_identity():
    err, c = _petz_error(identity(3, 2))
    assert c == pytest.approx(0, abs=1e-10)
    assert err <= 1e-8


def test_petz_exact_on_crisscross():
    rng = make_rng(12)
    for dims in ((2, 3, 2, 1), (1, 2, 2, 2), (2, 2, 1, 3)):
        u = u_crisscross(*(haar_matrix(k, rng) for k in dims))
        err, c = _petz_error(u)
        assert c <= 1e-10
        assert err <= 1e-8


def test_petz_reported_on_counter():
    err, c = _petz_error(u_counter(12, 3))
    assert c > 0
    # reported, not asserted against the bound
    assert np.isfinite(err) and err >= 0
    assert np.isfinite(math.sqrt(2 * c))


def test_diamond_witness_examples():
    d = 4
    dep = depolarizing(("A", d), ("C", d))
    probe = DensityMatrix([("A", d)], np.diag([1.0, 0, 0, 0]))
    assert diamond_witness(dep, dep, probe) == 0
    ident = identity_channel(("A", d), ("C", d))
    assert diamond_witness(ident, dep, probe) == pytest.approx(2 - 2 / d)


def test_diamond_witness_monotone_in_reference():
    d = 3
    ch1 = residual_channel(u_scrambler(d), ("B", np.eye(d)[0]), ["D"])
    ch2 = identity_channel(("A", d), ("C", d))
    rng = make_rng(4)
    for _ in range(10):
        psi = PureState([("R", d), ("A", d)], haar_matrix(d * d, rng)[:, 0])
        rho_a = partial_trace(psi.density(), ["A"])
        assert diamond_witness(ch1, ch2, rho_a) <= diamond_witness(ch1, ch2, psi) + 1e-10


def test_unitary_witness_counter_vs_identity():
    # derived: sigma = |0><0| (x) tau moves exactly the pairs b = 1 .. d_s - 1
    d, d_s = 8, 3
    probe = np.kron(np.diag(np.eye(d)[0]), np.eye(d) / d)
    w = unitary_witness(u_counter(d, d_s), identity(d, d), probe)
    assert w == pytest.approx(2 * (d_s - 1) / d)


def test_coherent_information_examples():
    d = 3
    phi = maximally_entangled(("R", d), ("A", d))
    assert coherent_information(identity_channel(("A", d), ("C", d)), phi) == pytest.approx(math.log2(d))
    rng = make_rng(1)
    dep = depolarizing(("A", d), ("C", d))
    for _ in range(5):
        psi = PureState([("R", d), ("A", d)], haar_matrix(d * d, rng)[:, 0])
        assert coherent_information(dep, psi) <= 1e-12


def _coherent_info_oracle(u, sigma_b, phi):
    """Direct contraction: rho_RC = tr_D[(1 (x) U)(phi (x) sigma)(...)^dag]."""
    t = u.matrix.reshape(3, 3, 3, 3)  # (c, d, a, b)
    out = np.einsum("cdab,ra,b->rcd", t, phi.reshape(3, 3), sigma_b)
    rho_rc = np.einsum("rcd,sed->rcse", out, out.conj()).reshape(9, 9)
    rho_c = np.einsum("rcre->ce", rho_rc.reshape(3, 3, 3, 3))

    def s(m):
        p = np.linalg.eigvalsh(m)
        p = p[p > 1e-15]
        return float(-(p * np.log2(p)).sum())
    return s(rho_c) - s(rho_rc)


def _ci(sigma_b, phi, traced="D"):
    u = u_scrambler(3)
    ch = residual_channel(u, ("B", sigma_b), [traced])
    return coherent_information(ch, PureState([("R", 3), ("A", 3)], phi))


S2 = math.sqrt(2)


def test_coherent_information_literal_example_matches_oracle():
    sigma = np.array([1, S2, 0]) / math.sqrt(3)
    phi = np.zeros(9)
    phi[0], phi[4] = 1 / math.sqrt(3), S2 / math.sqrt(3)
    got = _ci(sigma, phi)
    assert got == pytest.approx(_coherent_info_oracle(u_scrambler(3), sigma, phi), abs=1e-12)
    # the literal configuration gives the negated value (see acceptance criterion 5)
    assert got == pytest.approx(-CI_TARGET, abs=1e-9)


@pytest.mark.parametrize("sigma,phi_w,traced", [
    ((1, 0, S2), (1, S2), "D"),
    ((S2, 1, 0), (1, S2), "D"),
    ((1, S2, 0), (S2, 1), "D"),
    ((1, S2, 0), (1, S2), "C"),
])
def test_coherent_information_positive_neighbours(sigma, phi_w, traced):
    sigma = np.array(sigma) / math.sqrt(3)
    phi = np.zeros(9)
    phi[0], phi[4] = phi_w[0] / math.sqrt(3), phi_w[1] / math.sqrt(3)
    assert _ci(sigma, phi, traced) == pytest.approx(CI_TARGET, abs=1e-9)


def test_gurvits_examples():
    tau = DensityMatrix.maximally_mixed([("A", 2), ("B", 2)])
    assert gurvits_separable(tau)
    bell = maximally_entangled(("A", 2), ("B", 2)).density()
    assert gurvits_distance(bell) == pytest.approx(math.sqrt(3) / 2)
    assert not gurvits_separable(bell)
    mix = DensityMatrix(tau.register, 0.99 * tau.matrix + 0.01 * bell.matrix)
    assert gurvits_distance(mix) == pytest.approx(0.01 * math.sqrt(3) / 2)
    assert gurvits_separable(mix)


def test_extract_after_petz_imports():
    # smoke: the analysis module shares the channel code path
    assert extract_crisscross(identity(2, 2)).dims == (2, 1, 1, 2)
    assert mutual_information(choi_state(identity(2, 2)), "A", "C") == pytest.approx(2)
