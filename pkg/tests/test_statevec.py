import numpy as np
import pytest

from oracles import X, dense_local, dense_partial_trace_single
from spinamp.metrics import magnetization
from spinamp.propagate import CNOT_MATRIX
from spinamp.statevec import (
    QubitRegister,
    SizeError,
    apply_local,
    basis_state,
    inner,
    project_qubit,
    random_state,
    reduce_single,
    tensor,
)


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / abs(np.diag(r)))


def test_basis_state_single():
    assert np.allclose(basis_state(1, "0").amplitudes, [1, 0])


def test_basis_state_bit_order():
    # bits[0] is qubit 0, the least significant bit
    s = basis_state(2, "10")
    assert s.amplitudes[1] == 1 and np.sum(np.abs(s.amplitudes)) == 1


def test_basis_state_all_up_magnetization():
    assert magnetization(basis_state(3, "000")) == 3


@pytest.mark.parametrize("n", [0, 15])
def test_basis_state_size_errors(n):
    with pytest.raises(SizeError):
        basis_state(n, "0" * n)


def test_basis_state_configurable_cap():
    with pytest.raises(SizeError):
        basis_state(5, "00000", max_qubits=4)


def test_x_on_qubit0():
    out = apply_local(basis_state(2, "00"), X, [0])
    assert np.allclose(out.amplitudes, basis_state(2, "10").amplitudes)


def test_identity_leaves_state(rng):
    s = random_state(3, rng)
    assert np.allclose(apply_local(s, np.eye(4), [2, 0]).amplitudes, s.amplitudes)


def test_cnot_makes_bell_state():
    # (|00> + |10>)/sqrt2 in qubit-0-first notation, control 0 -> target 1
    s = QubitRegister(2, np.array([1, 1, 0, 0]) / np.sqrt(2))
    out = apply_local(s, CNOT_MATRIX, [0, 1])
    dense = dense_local(2, CNOT_MATRIX, [0, 1]) @ s.amplitudes
    assert np.allclose(out.amplitudes, dense, atol=1e-12)
    assert np.allclose(out.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_apply_local_errors(rng):
    s = random_state(3, rng)
    with pytest.raises(ValueError):
        apply_local(s, np.eye(2), [1, 1])
    with pytest.raises(ValueError):
        apply_local(s, np.eye(4), [1])
    with pytest.raises(IndexError):
        apply_local(s, np.eye(2), [3])


@pytest.mark.parametrize("n", range(1, 7))
def test_apply_local_matches_dense_oracle(n, rng):
    for _ in range(4):
        s = random_state(n, rng)
        k = 1 if n == 1 else int(rng.integers(1, 3))
        targets = list(rng.choice(n, size=k, replace=False))
        op = rng.normal(size=(2**k, 2**k)) + 1j * rng.normal(size=(2**k, 2**k))
        out = apply_local(s, op, targets)
        ref = dense_local(n, op, targets) @ s.amplitudes
        assert np.max(np.abs(out.amplitudes - ref)) < 1e-12


@pytest.mark.parametrize("n", [2, 4, 6])
def test_unitary_preserves_norm(n, rng):
    s = random_state(n, rng)
    for _ in range(10):
        t = list(rng.choice(n, size=2, replace=False))
        s = apply_local(s, random_unitary(rng, 4), t)
    assert abs(s.norm() - 1) < 1e-10


def test_inner_products(rng):
    s = random_state(4, rng)
    assert abs(inner(s, s) - 1) < 1e-12
    assert inner(basis_state(3, "000"), basis_state(3, "111")) == 0
    with pytest.raises(SizeError):
        inner(s, basis_state(3, "000"))


def test_reduce_single_product_state():
    s = basis_state(3, "000")
    for i in range(3):
        assert np.allclose(reduce_single(s, i), np.diag([1, 0]))


def test_reduce_single_cat_state():
    amps = np.zeros(16, complex)
    amps[0], amps[15] = 1 / np.sqrt(2), -1j / np.sqrt(2)
    s = QubitRegister(4, amps)
    for i in range(4):
        assert np.allclose(reduce_single(s, i), np.eye(2) / 2, atol=1e-12)


@pytest.mark.parametrize("n", [3, 5])
def test_reduce_single_matches_dense_partial_trace(n, rng):
    s = random_state(n, rng)
    for i in range(n):
        rho = reduce_single(s, i)
        ref = dense_partial_trace_single(s.amplitudes, n, i)
        assert np.max(np.abs(rho - ref)) < 1e-12
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.min(np.linalg.eigvalsh(rho)) >= -1e-12


def test_reduce_single_index_error(rng):
    with pytest.raises(IndexError):
        reduce_single(random_state(2, rng), 2)


def test_project_and_tensor_round_trip(rng):
    amp = random_state(3, rng)
    full = tensor(amp, basis_state(1, "1"))
    back = project_qubit(full, 3, 1)
    assert np.allclose(back.amplitudes, amp.amplitudes)
    with pytest.raises(ValueError):
        project_qubit(full, 3, 0)
