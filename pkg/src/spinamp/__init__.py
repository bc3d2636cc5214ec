"""Exact simulation of single-spin amplification schemes on small spin chains."""

__version__ = "0.1.0"

from .statevec import QubitRegister, basis_state, apply_local, inner, reduce_single
from .hamiltonians import CouplingModel, HamiltonianOperator, dipolar, gr1, gr2, grn, rotate_y90
from .propagate import ExpParams, expm_apply, controlled_evolve, effective_propagator
from .metrics import magnetization, contrast, meyer_wallach, branch_fidelity
from .protocols import MapParams, ProtocolSpec, TraceResult, run_random_map, run_sweep

__all__ = [
    "QubitRegister", "basis_state", "apply_local", "inner", "reduce_single",
    "CouplingModel", "HamiltonianOperator", "dipolar", "gr1", "gr2", "grn", "rotate_y90",
    "ExpParams", "expm_apply", "controlled_evolve", "effective_propagator",
    "magnetization", "contrast", "meyer_wallach", "branch_fidelity",
    "MapParams", "ProtocolSpec", "TraceResult", "run_random_map", "run_sweep",
]
