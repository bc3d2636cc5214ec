"""Collective observables: magnetization, contrast, global entanglement, fidelity."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .statevec import QubitRegister, SizeError, _check_targets, inner, reduce_single


@dataclass(frozen=True)
class ObservableRecord:
    Mz: float
    Q: float
    fidelity: float
    contrast: float


def magnetization(state: QubitRegister, qubits: Optional[Iterable[int]] = None) -> float:
    """Sum of <sigma_z> over ``qubits`` (all by default), +1 per up spin."""
    n = state.n_qubits
    qubits = range(n) if qubits is None else _check_targets(n, qubits)
    probs = np.abs(state.amplitudes) ** 2
    idx = np.arange(state.dim)
    return float(sum(probs @ (1 - 2 * ((idx >> q) & 1)) for q in qubits))


def contrast(mz0: float, mz1: float, mz_init: float) -> float:
    """(Mz0 - Mz1) / Mz(0)."""
    if mz_init == 0:
        raise ZeroDivisionError("initial magnetization is zero; contrast undefined")
    return (mz0 - mz1) / mz_init


def meyer_wallach(state: QubitRegister, qubits: Optional[Iterable[int]] = None) -> float:
    """Q = 2 - (2/n) sum_i Tr(rho_i^2) over single-spin reductions.

    ``qubits`` restricts the average to a subset (used when the register also
    holds a target spin in a product state).
    """
    qubits = list(range(state.n_qubits) if qubits is None else qubits)
    purities = [np.sum(np.abs(reduce_single(state, q)) ** 2) for q in qubits]
    return float(2.0 - 2.0 * np.mean(purities))


def branch_fidelity(a: QubitRegister, b: QubitRegister) -> float:
    """|<a|b>|^2."""
    if a.n_qubits != b.n_qubits:
        raise SizeError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return float(abs(inner(a, b)) ** 2)
