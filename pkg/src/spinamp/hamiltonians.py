"""Spin Hamiltonians as weighted Pauli strings.

Single-spin labels: ``I X Y Z`` are the Pauli matrices, ``+`` is the raising
operator |0><1| and ``-`` the lowering operator |1><0| (|0> is spin up).
With this choice ``(sigma_+ + sigma_-)`` is ``X`` and the n-body
grade-raising operator takes |00...0> to |11...1>.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .statevec import QubitRegister

DENSE_CAP = 4096
_LABELS = set("IXYZ+-")
_ADJOINT = {"I": "I", "X": "X", "Y": "Y", "Z": "Z", "+": "-", "-": "+"}


class DenseCapError(ValueError):
    """Dense matrix dimension exceeds the configured cap."""


@dataclass(frozen=True)
class CouplingModel:
    """Symmetric coupling constants b_ij for a linear chain.

    ``b[i, j] = b0 / |i - j| ** decay_exponent``; ``decay_exponent=inf``
    keeps nearest neighbours only.
    """

    n_spins: int
    b: np.ndarray = field(repr=False)
    geometry: str = "linear-chain"
    decay_exponent: float = 3.0

    @classmethod
    def linear_chain(cls, n_spins: int, b0: float = 1.0, decay_exponent: float = 3.0):
        idx = np.arange(n_spins)
        dist = np.abs(idx[:, None] - idx[None, :]).astype(float)
        with np.errstate(divide="ignore"):
            if np.isinf(decay_exponent):
                b = np.where(dist == 1, b0, 0.0)
            else:
                b = np.where(dist > 0, b0 / dist**decay_exponent, 0.0)
        return cls(n_spins, b, "linear-chain", float(decay_exponent))

    @classmethod
    def from_matrix(cls, b) -> "CouplingModel":
        b = np.asarray(b, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.allclose(b, b.T) or np.any(np.diag(b) != 0):
            raise ValueError("coupling matrix must be symmetric with zero diagonal")
        return cls(b.shape[0], b, "custom", float("nan"))

    @property
    def b12(self) -> float:
        return float(self.b[0, 1])


Term = tuple  # (coefficient, labels, support)


@dataclass(frozen=True)
class HamiltonianOperator:
    """Sum of weighted Pauli strings, optionally backed by a dense matrix.

    ``terms`` holds ``(coeff, labels, support)`` where ``labels[k]`` acts on
    qubit ``support[k]``. Operators produced by conjugation carry ``dense``
    instead of terms.
    """

    n_spins: int
    terms: tuple = ()
    label: str = ""
    dense: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for coeff, labels, support in self.terms:
            if len(labels) != len(support) or set(labels) - _LABELS:
                raise ValueError(f"bad term {labels!r} on {support}")
            if len(set(support)) != len(support):
                raise ValueError(f"repeated qubit in support {support}")
            if any(not 0 <= q < self.n_spins for q in support):
                raise IndexError(f"support {support} out of range")

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    def support(self) -> set[int]:
        if self.dense is not None:
            return set(range(self.n_spins))
        return {q for _, labels, sup in self.terms for q, l in zip(sup, labels) if l != "I"}

    def scaled(self, factor: float) -> "HamiltonianOperator":
        dense = None if self.dense is None else factor * self.dense
        terms = tuple((factor * c, l, s) for c, l, s in self.terms)
        return replace(self, terms=terms, dense=dense)

    def __add__(self, other: "HamiltonianOperator") -> "HamiltonianOperator":
        if other.n_spins != self.n_spins:
            raise ValueError("cannot add operators on different registers")
        label = f"{self.label}+{other.label}"
        if self.dense is None and other.dense is None:
            return HamiltonianOperator(self.n_spins, self.terms + other.terms, label)
        return HamiltonianOperator(
            self.n_spins, (), label, materialize_dense(self) + materialize_dense(other)
        )

    def embed(self, n_total: int) -> "HamiltonianOperator":
        """Same operator on a larger register (identity on the new high qubits)."""
        if n_total < self.n_spins:
            raise ValueError("cannot embed into a smaller register")
        dense = None
        if self.dense is not None:
            dense = np.kron(np.eye(1 << (n_total - self.n_spins)), self.dense)
        return HamiltonianOperator(n_total, self.terms, self.label, dense)

    def is_formally_hermitian(self, tol: float = 1e-12) -> bool:
        """Every term's adjoint appears with the conjugate total coefficient."""
        acc: dict = {}
        for c, labels, sup in self.terms:
            key = tuple(sorted(zip(sup, labels)))
            acc[key] = acc.get(key, 0) + c
        for key, c in acc.items():
            adj = tuple((q, _ADJOINT[l]) for q, l in key)
            if abs(acc.get(adj, 0) - np.conj(c)) > tol:
                return False
        return True

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        """H @ psi without forming the matrix."""
        if self.dense is not None:
            return self.dense @ psi
        out = np.zeros_like(psi, dtype=complex)
        idx = np.arange(psi.size)
        for coeff, labels, sup in self.terms:
            flip, amp = _term_action(idx, labels, sup)
            out[idx ^ flip] += coeff * amp * psi
        return out

    def apply(self, state: QubitRegister) -> QubitRegister:
        if state.n_qubits != self.n_spins:
            raise ValueError(
                f"operator on {self.n_spins} spins applied to {state.n_qubits} qubits"
            )
        return QubitRegister(state.n_qubits, self.matvec(state.amplitudes))


def _term_action(idx: np.ndarray, labels: str, support) -> tuple[int, np.ndarray]:
    """Flip mask and per-index amplitude factor of a Pauli string on basis states."""
    flip = 0
    amp = np.ones(idx.size, dtype=complex)
    for q, lab in zip(support, labels):
        bit = (idx >> q) & 1
        if lab == "I":
            continue
        if lab == "Z":
            amp *= 1 - 2 * bit
            continue
        flip |= 1 << q
        if lab == "Y":
            amp *= np.where(bit == 0, 1j, -1j)
        elif lab == "+":
            amp *= bit
        elif lab == "-":
            amp *= 1 - bit
    return flip, amp


def materialize_dense(h: HamiltonianOperator, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of ``h``."""
    if h.dim > cap:
        raise DenseCapError(f"dimension {h.dim} exceeds dense cap {cap}")
    if h.dense is not None:
        return np.array(h.dense, dtype=complex)
    m = np.zeros((h.dim, h.dim), dtype=complex)
    idx = np.arange(h.dim)
    for coeff, labels, sup in h.terms:
        flip, amp = _term_action(idx, labels, sup)
        m[idx ^ flip, idx] += coeff * amp
    return m


def _pairs(c: CouplingModel):
    n = c.n_spins
    return [(i, j, float(c.b[i, j])) for i in range(n) for j in range(i + 1, n) if c.b[i, j] != 0]


def _require_pairs(c: CouplingModel) -> None:
    if c.n_spins < 2:
        raise ValueError(f"need at least 2 spins, got {c.n_spins}")


def dipolar(c: CouplingModel) -> HamiltonianOperator:
    """Secular dipolar coupling, sum over i<j of b_ij [ZZ - (XX + YY)/2]."""
    _require_pairs(c)
    terms = []
    for i, j, b in _pairs(c):
        terms += [(b, "ZZ", (i, j)), (-0.5 * b, "XX", (i, j)), (-0.5 * b, "YY", (i, j))]
    return HamiltonianOperator(c.n_spins, tuple(terms), "H_dip")


def _double_quantum(pairs, n: int, label: str) -> HamiltonianOperator:
    terms = []
    for i, j, b in pairs:
        terms += [(b, "++", (i, j)), (b, "--", (i, j))]
    return HamiltonianOperator(n, tuple(terms), label)


def gr2(c: CouplingModel) -> HamiltonianOperator:
    """Two-body grade raising, sum over i<j of b_ij (s+s+ + s-s-)."""
    _require_pairs(c)
    return _double_quantum(_pairs(c), c.n_spins, "H_GR2")


def gr1(c: CouplingModel, first: int = 0) -> HamiltonianOperator:
    """Grade raising restricted to pairs containing spin ``first``."""
    _require_pairs(c)
    if not 0 <= first < c.n_spins:
        raise IndexError(f"spin {first} out of range for {c.n_spins} spins")
    pairs = [
        (first, i, float(c.b[first, i]))
        for i in range(c.n_spins)
        if i != first and c.b[first, i] != 0
    ]
    return _double_quantum(pairs, c.n_spins, "H_GR1")


def grn(n: int, coeff: float = 1.0) -> HamiltonianOperator:
    """n-body grade raising: coeff (prod s+ + prod s-), coupling |0..0> and |1..1>."""
    if n < 1:
        raise ValueError("n must be >= 1")
    sup = tuple(range(n))
    return HamiltonianOperator(n, ((coeff, "+" * n, sup), (coeff, "-" * n, sup)), "H_GRn")


def total_z(n: int, qubits: Optional[Sequence[int]] = None) -> HamiltonianOperator:
    qubits = range(n) if qubits is None else qubits
    return HamiltonianOperator(n, tuple((1.0, "Z", (q,)) for q in qubits), "Sz")


SIGMA_Y = np.array([[0, -1j], [1j, 0]])

# Rotation convention R = exp(-i (pi/4) sum sigma_y), i.e. +pi/2 about y.
ROTATION_SIGN = +1

# With sigma_pm = |0><1|, |1><0| the rotated dipolar coupling is
# (3/2) sum b_ij (s+s+ + s-s-) - H_dip/2. The familiar 3/8 corresponds to
# unnormalized raising operators sigma_x +/- i sigma_y (four times larger pairs).
EQ2_GR_PREFACTOR = 1.5


def collective_y_rotation(n: int, sign: int = ROTATION_SIGN) -> np.ndarray:
    """Dense exp(-i sign (pi/4) sum_k sigma_y^k)."""
    c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
    r1 = np.array([[c, -sign * s], [sign * s, c]], dtype=complex)
    r = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        r = np.kron(r1, r)
    return r


def rotate_y90(
    h: HamiltonianOperator, sign: int = ROTATION_SIGN, cap: int = DENSE_CAP
) -> HamiltonianOperator:
    """Dense-backed R H R^dagger for a collective pi/2 rotation about y."""
    m = materialize_dense(h, cap)
    r = collective_y_rotation(h.n_spins, sign)
    return HamiltonianOperator(h.n_spins, (), f"Ry90({h.label})", r @ m @ r.conj().T)
