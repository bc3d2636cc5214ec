import numpy as np
import pytest

from oracles import SM, SP, X, Y, Z, dipolar_oracle, gr_pairs_oracle, kron_op, two_body
from spinamp import hamiltonians as ham
from spinamp.statevec import basis_state, random_state


def random_couplings(rng, n):
    b = rng.uniform(0.2, 1.5, size=(n, n))
    b = np.triu(b, 1)
    return ham.CouplingModel.from_matrix(b + b.T)


def test_linear_chain_couplings():
    c = ham.CouplingModel.linear_chain(4, b0=2.0)
    assert c.b[0, 1] == 2.0 and c.b[0, 2] == pytest.approx(2.0 / 8) and c.b[0, 3] == pytest.approx(2.0 / 27)
    assert np.all(c.b == c.b.T) and np.all(np.diag(c.b) == 0)
    nn = ham.CouplingModel.linear_chain(4, decay_exponent=np.inf)
    assert nn.b[0, 1] == 1 and nn.b[0, 2] == 0


def test_from_matrix_rejects_asymmetric():
    with pytest.raises(ValueError):
        ham.CouplingModel.from_matrix([[0, 1], [2, 0]])


def test_dipolar_two_spins_dense():
    m = ham.materialize_dense(ham.dipolar(ham.CouplingModel.linear_chain(2)))
    expected = np.array([[1, 0, 0, 0], [0, -1, -1, 0], [0, -1, -1, 0], [0, 0, 0, 1]])
    assert np.allclose(m, expected, atol=1e-14)


@pytest.mark.parametrize("n", range(2, 7))
def test_dipolar_matches_kron_oracle(n, rng):
    c = random_couplings(rng, n)
    m = ham.materialize_dense(ham.dipolar(c))
    assert np.max(np.abs(m - dipolar_oracle(c.b))) < 1e-12


@pytest.mark.parametrize("n", range(2, 7))
def test_dipolar_conserves_total_z(n, rng):
    m = ham.materialize_dense(ham.dipolar(random_couplings(rng, n)))
    sz = sum(kron_op(n, {q: Z}) for q in range(n))
    assert np.linalg.norm(m @ sz - sz @ m) < 1e-12


def test_dipolar_all_up_expectation(rng):
    c = random_couplings(rng, 5)
    s = basis_state(5, "00000")
    e = np.vdot(s.amplitudes, ham.dipolar(c).apply(s).amplitudes)
    assert abs(e - np.sum(np.triu(c.b, 1))) < 1e-12


def test_dipolar_needs_two_spins():
    with pytest.raises(ValueError):
        ham.dipolar(ham.CouplingModel.linear_chain(1))


def test_gr2_two_spins_dense():
    m = ham.materialize_dense(ham.gr2(ham.CouplingModel.linear_chain(2)))
    expected = np.zeros((4, 4))
    expected[0, 3] = expected[3, 0] = 1
    assert np.allclose(m, expected)


def test_gr2_raises_coherence_order():
    out = ham.gr2(ham.CouplingModel.linear_chain(2)).apply(basis_state(2, "00"))
    assert np.allclose(out.amplitudes, basis_state(2, "11").amplitudes)


@pytest.mark.parametrize("n", range(2, 7))
def test_gr2_matches_oracle_and_real_expectation(n, rng):
    c = random_couplings(rng, n)
    h = ham.gr2(c)
    pairs = [(i, j, c.b[i, j]) for i in range(n) for j in range(i + 1, n)]
    assert np.max(np.abs(ham.materialize_dense(h) - gr_pairs_oracle(n, pairs))) < 1e-12
    s = random_state(n, rng)
    assert abs(np.vdot(s.amplitudes, h.apply(s).amplitudes).imag) < 1e-12


def test_gr1_term_count_and_restriction():
    c = ham.CouplingModel.linear_chain(3)
    h = ham.gr1(c, 0)
    supports = {sup for _, _, sup in h.terms}
    assert supports == {(0, 1), (0, 2)} and len(h.terms) == 4
    restricted = [t for t in ham.gr2(c).terms if 0 in t[2]]
    assert sorted(h.terms) == sorted(restricted)


def test_gr1_dense_three_spin_chain():
    c = ham.CouplingModel.linear_chain(3)
    ref = (two_body(3, SP, 0, SP, 1) + two_body(3, SM, 0, SM, 1)) + c.b[0, 2] * (
        two_body(3, SP, 0, SP, 2) + two_body(3, SM, 0, SM, 2)
    )
    assert np.max(np.abs(ham.materialize_dense(ham.gr1(c, 0)) - ref)) < 1e-14


def test_gr1_index_error():
    with pytest.raises(IndexError):
        ham.gr1(ham.CouplingModel.linear_chain(3), 3)


def test_grn_dense():
    m = ham.materialize_dense(ham.grn(3, 1.0))
    expected = np.zeros((8, 8))
    expected[0, 7] = expected[7, 0] = 1
    assert np.array_equal(m, expected)


def test_grn_squared_on_all_up():
    h = ham.grn(4, 0.7)
    s = basis_state(4, "0000")
    assert np.allclose(h.apply(h.apply(s)).amplitudes, 0.49 * s.amplitudes)


def test_grn_single_spin_is_sigma_x():
    assert np.allclose(ham.materialize_dense(ham.grn(1)), X)


@pytest.mark.parametrize("n", range(2, 7))
def test_builders_hermitian_and_coherence_order(n, rng):
    c = random_couplings(rng, n)
    idx = np.arange(2**n)
    weight = np.array([bin(k).count("1") for k in idx])
    dw = np.abs(weight[:, None] - weight[None, :])
    for h, order in [(ham.dipolar(c), 0), (ham.gr2(c), 2), (ham.gr1(c, n - 1), 2), (ham.grn(n), n)]:
        m = ham.materialize_dense(h)
        assert np.linalg.norm(m - m.conj().T) < 1e-12
        assert h.is_formally_hermitian()
        assert np.all(m[dw != order] == 0)


def test_matvec_matches_dense(rng):
    c = random_couplings(rng, 5)
    for h in (ham.dipolar(c), ham.gr2(c), ham.grn(5)):
        s = random_state(5, rng)
        assert np.allclose(h.apply(s).amplitudes, ham.materialize_dense(h) @ s.amplitudes, atol=1e-12)


def test_empty_operator_is_zero():
    assert np.array_equal(ham.materialize_dense(ham.HamiltonianOperator(2)), np.zeros((4, 4)))


def test_dense_cap():
    with pytest.raises(ham.DenseCapError):
        ham.materialize_dense(ham.grn(5), cap=16)


def test_formal_hermiticity_detects_missing_adjoint():
    h = ham.HamiltonianOperator(2, ((1.0, "++", (0, 1)),))
    assert not h.is_formally_hermitian()


def test_embed_adds_idle_high_qubits(rng):
    c = random_couplings(rng, 3)
    h = ham.dipolar(c)
    big = ham.materialize_dense(h.embed(4))
    assert np.allclose(big, np.kron(np.eye(2), ham.materialize_dense(h)))
    r = ham.rotate_y90(h)
    assert np.allclose(ham.materialize_dense(r.embed(4)), np.kron(np.eye(2), r.dense))


# -- collective rotation ----------------------------------------------------


def _rotated_identity_residual(n, b, prefactor, sign=ham.ROTATION_SIGN):
    c = ham.CouplingModel.from_matrix(b)
    rot = ham.materialize_dense(ham.rotate_y90(ham.dipolar(c), sign=sign))
    target = prefactor * ham.materialize_dense(ham.gr2(c)) - 0.5 * ham.materialize_dense(ham.dipolar(c))
    return np.linalg.norm(rot - target)


@pytest.mark.parametrize("n", range(2, 7))
def test_rotated_dipolar_identity(n, rng):
    b = random_couplings(rng, n).b
    assert _rotated_identity_residual(n, b, ham.EQ2_GR_PREFACTOR) < 1e-10
    # the other reading of the constant does not hold for Pauli-normalized operators
    assert _rotated_identity_residual(n, b, 3 / 8) > 1e-2


def test_rotated_identity_is_independent_of_rotation_sense(rng):
    b = random_couplings(rng, 3).b
    assert _rotated_identity_residual(3, b, ham.EQ2_GR_PREFACTOR, sign=-1) < 1e-10


def test_rotate_identity_operator():
    ident = ham.HamiltonianOperator(3, ((1.0, "", ()),))
    assert np.allclose(ham.materialize_dense(ham.rotate_y90(ident)), np.eye(8))


def test_double_rotation_flips_z_terms():
    # R_y(pi/2) twice is R_y(pi): sigma_z -> -sigma_z on every spin
    h = ham.total_z(3)
    twice = ham.rotate_y90(ham.rotate_y90(h))
    ref = -sum(kron_op(3, {q: Z}) for q in range(3))
    assert np.allclose(ham.materialize_dense(twice), ref, atol=1e-12)
    zz = ham.HamiltonianOperator(3, ((1.0, "ZX", (0, 2)),))
    ref = kron_op(3, {0: -Z, 2: -X})
    assert np.allclose(ham.materialize_dense(ham.rotate_y90(ham.rotate_y90(zz))), ref, atol=1e-12)
