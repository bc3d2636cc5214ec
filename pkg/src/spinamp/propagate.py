"""Exact unitary evolution, gates, and dense propagator extraction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .hamiltonians import DENSE_CAP, DenseCapError, HamiltonianOperator, materialize_dense
from .statevec import QubitRegister, apply_local, basis_state, _check_targets


class KrylovConvergenceError(RuntimeError):
    """Lanczos time stepping could not reach the requested tolerance."""


@dataclass(frozen=True)
class ExpParams:
    """Backend selection for e^{-iHt}.

    ``method=None`` picks ``dense-eig`` up to ``dense_cap`` and ``krylov``
    beyond it.
    """

    method: Optional[str] = None
    tolerance: float = 1e-10
    dense_cap: int = DENSE_CAP
    krylov_dim: int = 30
    max_substeps: int = 10_000

    def __post_init__(self):
        if self.method not in (None, "dense-eig", "krylov"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be >= 2")

    def resolve(self, dim: int) -> str:
        if self.method is not None:
            return self.method
        return "dense-eig" if dim <= self.dense_cap else "krylov"


DEFAULT_PARAMS = ExpParams()


@dataclass
class UnitaryPropagator:
    n_qubits: int
    matrix: np.ndarray

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


# -- exponentials -----------------------------------------------------------


class Evolver:
    """Reusable psi -> e^{-iHt} psi for a fixed H and t.

    The dense backend diagonalizes once and caches the full unitary, which is
    what repeated maps need.
    """

    def __init__(self, h: HamiltonianOperator, t: float, p: ExpParams = DEFAULT_PARAMS):
        if not np.isfinite(t):
            raise ValueError("evolution time must be finite")
        self.h, self.t, self.p = h, float(t), p
        self.method = p.resolve(h.dim)
        self._u = None
        if self.method == "dense-eig":
            if h.dim > p.dense_cap:
                raise DenseCapError(f"dimension {h.dim} exceeds dense cap {p.dense_cap}")
            w, v = np.linalg.eigh(materialize_dense(h, p.dense_cap))
            self._u = (v * np.exp(-1j * w * self.t)) @ v.conj().T

    @property
    def matrix(self) -> Optional[np.ndarray]:
        return self._u

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        if self.t == 0:
            return psi.copy()
        if self._u is not None:
            return self._u @ psi
        return krylov_expm(self.h.matvec, psi, self.t, self.p.tolerance,
                           self.p.krylov_dim, self.p.max_substeps)


def krylov_expm(
    matvec: Callable[[np.ndarray], np.ndarray],
    v: np.ndarray,
    t: float,
    tol: float = 1e-10,
    m: int = 30,
    max_substeps: int = 10_000,
) -> np.ndarray:
    """e^{-iHt} v for Hermitian H by Lanczos with adaptive time steps.

    Each substep builds an ``m``-dimensional Lanczos basis and accepts the step
    when the a-posteriori error estimate ``beta_m |[e^{-i tau T}]_{m-1,0}|``
    is below ``tol * tau / t``.
    """
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0 or t == 0:
        return v.copy()
    w = v / nrm
    t_done, tau, steps = 0.0, abs(t), 0
    sgn = np.sign(t)
    while t_done < abs(t):
        tau = min(tau, abs(t) - t_done)
        basis, alpha, beta, breakdown = _lanczos(matvec, w, m)
        while True:
            steps += 1
            if steps > max_substeps:
                raise KrylovConvergenceError(
                    f"no convergence after {max_substeps} substeps (t={t}, done={t_done})"
                )
            theta, s = eigh_tridiagonal(alpha, beta[:-1]) if len(alpha) > 1 else (alpha, np.ones((1, 1)))
            coef = s @ (np.exp(-1j * sgn * tau * theta) * s[0].conj())
            err = 0.0 if breakdown else beta[-1] * abs(coef[-1])
            if err <= tol * tau / abs(t):
                break
            tau *= 0.5
            if tau < abs(t) * 1e-12:
                raise KrylovConvergenceError(f"time step collapsed at t_done={t_done}")
        w = basis.T @ coef
        w /= np.linalg.norm(w)
        t_done += tau
        if err < 0.1 * tol * tau / abs(t):
            tau *= 2.0
    return nrm * w


def _lanczos(matvec, v, m):
    """Lanczos with full reorthogonalization; returns rows of the basis."""
    dim = v.size
    m = min(m, dim)
    basis = np.zeros((m, dim), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    basis[0] = v
    for j in range(m):
        w = matvec(basis[j])
        alpha[j] = np.vdot(basis[j], w).real
        w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] < 1e-12 * max(1.0, abs(alpha[j])):
            return basis[: j + 1], alpha[: j + 1], beta[: j + 1], True
        if j + 1 < m:
            basis[j + 1] = w / beta[j]
    return basis, alpha, beta, False


def expm_apply(
    h: HamiltonianOperator,
    t: float,
    state: QubitRegister,
    p: ExpParams = DEFAULT_PARAMS,
) -> QubitRegister:
    """e^{-iHt}|psi>."""
    if h.n_spins != state.n_qubits:
        raise ValueError(f"operator on {h.n_spins} spins, state on {state.n_qubits} qubits")
    return QubitRegister(state.n_qubits, Evolver(h, t, p)(state.amplitudes))


def _control_masks(n: int, control: int) -> np.ndarray:
    return ((np.arange(1 << n) >> control) & 1).astype(bool)


def controlled_evolve(
    control: int,
    h: HamiltonianOperator,
    t: float,
    state: QubitRegister,
    p: ExpParams = DEFAULT_PARAMS,
    evolver: Optional[Evolver] = None,
) -> QubitRegister:
    """Apply |1><1|_c (x) e^{-iHt} + |0><0|_c (x) I.

    ``h`` acts on the full register and must not touch ``control``.
    """
    n = state.n_qubits
    _check_targets(n, [control])
    if control in h.support():
        raise ValueError(f"control qubit {control} lies in the Hamiltonian support")
    ev = evolver if evolver is not None else Evolver(h, t, p)
    on = _control_masks(n, control)
    out = state.amplitudes.copy()
    psi1 = np.where(on, state.amplitudes, 0)
    out[on] = ev(psi1)[on]
    return QubitRegister(n, out)


# -- gates ------------------------------------------------------------------

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# basis index = control bit + 2 * target bit
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """exp(-i angle/2 sigma_axis)."""
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * PAULI[axis]


def gate_rotation(axis: str, angle: float, qubits: Iterable[int], state: QubitRegister) -> QubitRegister:
    qubits = list(qubits)
    if not qubits:
        raise ValueError("rotation needs at least one qubit")
    _check_targets(state.n_qubits, qubits)
    r = rotation_matrix(axis, angle)
    for q in qubits:
        state = apply_local(state, r, [q])
    return state


def gate_x(q: int, state: QubitRegister) -> QubitRegister:
    return apply_local(state, PAULI["x"], [q])


def gate_cnot(control: int, target: int, state: QubitRegister) -> QubitRegister:
    if control == target:
        raise ValueError("control and target must differ")
    return apply_local(state, CNOT_MATRIX, [control, target])


# -- circuits and dense propagators ----------------------------------------

Step = Callable[[QubitRegister], QubitRegister]


def run_circuit(steps: Sequence[Step], state: QubitRegister) -> QubitRegister:
    for step in steps:
        state = step(state)
    return state


def effective_propagator(
    steps: Sequence[Step], n_total: int, cap: int = DENSE_CAP
) -> UnitaryPropagator:
    """Dense unitary of a circuit, one column per computational basis input."""
    dim = 1 << n_total
    if dim > cap:
        raise DenseCapError(f"dimension {dim} exceeds dense cap {cap}")
    u = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        e = QubitRegister(n_total, np.eye(1, dim, k, dtype=complex).ravel())
        u[:, k] = run_circuit(steps, e).amplitudes
    return UnitaryPropagator(n_total, u)


@dataclass
class PhaseComparison:
    equal: bool
    phase: float
    residual: float
    mode: str


def unitary_equal_up_to_phase(
    u: UnitaryPropagator,
    v: UnitaryPropagator,
    tol: float = 1e-9,
    inputs: Optional[Sequence[int]] = None,
) -> PhaseComparison:
    """Compare ``u`` and ``e^{i phi} v`` at the Frobenius-optimal phase.

    With ``inputs`` (basis-state indices) only those columns are compared.
    """
    a, b = u.matrix, v.matrix
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mode = "full"
    if inputs is not None:
        cols = list(inputs)
        a, b = a[:, cols], b[:, cols]
        mode = "subspace"
    overlap = np.vdot(b, a)  # Tr(v^dagger u)
    phi = float(np.angle(overlap)) if abs(overlap) > 0 else 0.0
    res = float(np.linalg.norm(a - np.exp(1j * phi) * b))
    return PhaseComparison(res < tol, phi, res, mode)


def paper_effective_operator(n_amplifier: int) -> UnitaryPropagator:
    """|1><1|_T (x) prod X + |0><0|_T (x) I, target on the highest qubit."""
    d = 1 << n_amplifier
    flip_all = np.eye(d)[::-1]  # X on every qubit reverses the index order
    u = np.zeros((2 * d, 2 * d), dtype=complex)
    u[:d, :d] = np.eye(d)
    u[d:, d:] = flip_all
    return UnitaryPropagator(n_amplifier + 1, u)
