"""Pure-state register and matrix-free local operator kernels.

Bit convention: qubit 0 is the least significant bit of the basis index,
and bit value 0 is the sigma_z = +1 ("up") state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 14
NORM_TOL = 1e-10


class SizeError(ValueError):
    """Register size outside the supported range."""


@dataclass
class QubitRegister:
    """Complex amplitude vector over ``2**n_qubits`` basis states."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise SizeError(
                f"expected {1 << self.n_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "QubitRegister":
        return QubitRegister(self.n_qubits, self.amplitudes.copy())


def _check_size(n: int, max_qubits: int = MAX_QUBITS) -> None:
    if n < 1 or n > max_qubits:
        raise SizeError(f"n_qubits must be in [1, {max_qubits}], got {n}")


def bits_to_index(bits: str) -> int:
    """Basis index of a bitstring written qubit 0 first (``bits[i]`` is qubit i)."""
    return sum(1 << i for i, b in enumerate(bits) if b == "1")


def basis_state(n: int, bits: str, max_qubits: int = MAX_QUBITS) -> QubitRegister:
    """Computational basis state.

    ``bits`` lists qubit values in qubit order, so ``bits[0]`` is qubit 0
    (the least significant bit of the index).
    """
    _check_size(n, max_qubits)
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise ValueError(f"bits must be a length-{n} string of 0/1, got {bits!r}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[bits_to_index(bits)] = 1.0
    return QubitRegister(n, amps)


def from_amplitudes(amps, normalize: bool = False) -> QubitRegister:
    amps = np.asarray(amps, dtype=complex)
    n = int(amps.size).bit_length() - 1
    if amps.ndim != 1 or (1 << n) != amps.size:
        raise SizeError(f"amplitude count {amps.size} is not a power of two")
    _check_size(n)
    if normalize:
        amps = amps / np.linalg.norm(amps)
    return QubitRegister(n, amps.copy())


def random_state(n: int, rng: np.random.Generator) -> QubitRegister:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return QubitRegister(n, v / np.linalg.norm(v))


def _check_targets(n: int, targets) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated target index in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise IndexError(f"qubit {t} out of range for {n} qubits")
    return targets


def apply_local(state: QubitRegister, op, targets) -> QubitRegister:
    """Apply a ``2**k x 2**k`` operator to ``targets`` (k <= 2).

    The operator's own basis follows the register convention: ``targets[0]``
    is its least significant bit.
    """
    n = state.n_qubits
    targets = _check_targets(n, targets)
    k = len(targets)
    op = np.asarray(op, dtype=complex)
    if k == 0 or k > 2:
        raise ValueError("apply_local supports 1 or 2 target qubits")
    if op.shape != (1 << k, 1 << k):
        raise ValueError(f"operator shape {op.shape} does not match {k} target(s)")

    # tensor axis a of the reshaped state holds qubit n-1-a
    psi = state.amplitudes.reshape((2,) * n)
    axes = [n - 1 - t for t in reversed(targets)]  # op row index is (b_{k-1} ... b_0)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return QubitRegister(n, out.reshape(-1))


def inner(a: QubitRegister, b: QubitRegister) -> complex:
    """<a|b>."""
    if a.n_qubits != b.n_qubits:
        raise SizeError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def reduce_single(state: QubitRegister, i: int) -> np.ndarray:
    """2x2 reduced density matrix of qubit ``i`` (all others traced out)."""
    n = state.n_qubits
    if not 0 <= i < n:
        raise IndexError(f"qubit {i} out of range for {n} qubits")
    psi = state.amplitudes.reshape(1 << (n - 1 - i), 2, 1 << i)
    rho = np.einsum("aib,ajb->ij", psi, psi.conj())
    return rho / np.trace(rho).real


def project_qubit(state: QubitRegister, q: int, bit: int) -> QubitRegister:
    """Normalized state of the other qubits conditioned on qubit ``q`` = ``bit``.

    Remaining qubits keep their relative order.
    """
    n = state.n_qubits
    _check_targets(n, [q])
    psi = state.amplitudes.reshape(1 << (n - 1 - q), 2, 1 << q)
    sub = psi[:, bit, :].reshape(-1)
    nrm = np.linalg.norm(sub)
    if nrm < NORM_TOL:
        raise ValueError(f"qubit {q} has no weight on |{bit}>")
    return QubitRegister(n - 1, sub / nrm)


def tensor(low: QubitRegister, high: QubitRegister) -> QubitRegister:
    """Product register with ``low`` on the lower-indexed qubits."""
    return QubitRegister(
        low.n_qubits + high.n_qubits, np.kron(high.amplitudes, low.amplitudes)
    )
