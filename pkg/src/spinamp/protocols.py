"""Amplification schemes.

Every scheme runs in ``full`` mode (target spin as an explicit qubit, placed
on the highest index) or ``reduced`` mode (target as a classical bit that
decides whether the conditional steps fire). Amplifier spins are qubits
``0 .. n-1``; the spin the target talks to is ``first`` (qubit 0 by default,
the chain end).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np
from scipy import stats

from . import hamiltonians as ham
from .metrics import branch_fidelity, contrast, magnetization, meyer_wallach
from .propagate import (
    DEFAULT_PARAMS,
    Evolver,
    ExpParams,
    controlled_evolve,
    expm_apply,
    gate_cnot,
    gate_rotation,
    gate_x,
)
from .statevec import QubitRegister, basis_state, project_qubit

SCHEMES = ("cnot-chain", "cat-gate", "cat-nq", "random-map")
MODES = ("full", "reduced")
MAP_ORDERS = ("dip-first", "kick-first")
DEFAULT_THRESHOLD = 0.9


@dataclass(frozen=True)
class ProtocolSpec:
    scheme: str
    n_amplifier: int
    target_state: int = 0
    mode: str = "reduced"
    first: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.target_state not in (0, 1):
            raise ValueError("target_state must be 0 or 1")
        if self.n_amplifier < 1:
            raise ValueError("n_amplifier must be >= 1")
        if not 0 <= self.first < self.n_amplifier:
            raise ValueError(f"first={self.first} outside the amplifier")

    @property
    def n_total(self) -> int:
        return self.n_amplifier + (self.mode == "full")

    @property
    def target_qubit(self) -> Optional[int]:
        return self.n_amplifier if self.mode == "full" else None


@dataclass(frozen=True)
class MapParams:
    """Pseudo-random map knobs, times given as products with b_12."""

    t_pert: float = 0.5
    t_free: float = np.pi / np.sqrt(2)
    r_max: int = 60
    couplings: Optional[ham.CouplingModel] = None
    map_order: str = "dip-first"

    def __post_init__(self):
        if self.r_max < 1:
            raise ValueError("r_max must be >= 1")
        if self.map_order not in MAP_ORDERS:
            raise ValueError(f"map_order must be one of {MAP_ORDERS}")

    def coupling_for(self, n: int) -> ham.CouplingModel:
        if self.couplings is None:
            return ham.CouplingModel.linear_chain(n)
        if self.couplings.n_spins != n:
            raise ValueError(f"couplings are for {self.couplings.n_spins} spins, not {n}")
        return self.couplings


@dataclass
class SchemeOutcome:
    """Final amplifier state of one branch (and the full register, if any)."""

    spec: ProtocolSpec
    amplifier: QubitRegister
    full: Optional[QubitRegister]
    mz: float
    q: float


@dataclass
class TraceResult:
    n: int
    Mz0: np.ndarray
    Mz1: np.ndarray
    contrast: np.ndarray
    Q0: np.ndarray
    Q1: np.ndarray
    fidelity: np.ndarray
    r_star: Optional[int] = None
    threshold: float = DEFAULT_THRESHOLD

    @property
    def r(self) -> np.ndarray:
        return np.arange(1, len(self.contrast) + 1)

    def saturation_window(self) -> slice:
        """Second half of the trace."""
        return slice(len(self.contrast) // 2, None)

    def saturated(self, name: str) -> float:
        return float(np.mean(getattr(self, name)[self.saturation_window()]))


# -- initial states ---------------------------------------------------------


def _initial(spec: ProtocolSpec, target: int) -> QubitRegister:
    bits = "0" * spec.n_amplifier
    if spec.mode == "full":
        bits += str(target)
    return basis_state(spec.n_total, bits)


def _finish(spec: ProtocolSpec, target: int, state: QubitRegister) -> SchemeOutcome:
    if spec.mode == "full":
        amp = project_qubit(state, spec.n_amplifier, target)
        full = state
    else:
        amp, full = state, None
    return SchemeOutcome(spec, amp, full, magnetization(amp), meyer_wallach(amp))


def _others(spec: ProtocolSpec):
    return [k for k in range(spec.n_amplifier) if k != spec.first]


# -- circuits ---------------------------------------------------------------


def _conditional_flip(spec: ProtocolSpec, target: int, qubits, state):
    """X on ``qubits``, controlled by the target (qubit or classical bit)."""
    for q in qubits:
        if spec.mode == "full":
            state = gate_cnot(spec.target_qubit, q, state)
        elif target == 1:
            state = gate_x(q, state)
    return state


def cat_map(spec: ProtocolSpec, state: QubitRegister, inverse: bool = False) -> QubitRegister:
    """pi/2 x-rotation on the first spin, then CNOTs from it to every other spin."""
    others = _others(spec)
    if not inverse:
        state = gate_rotation("x", np.pi / 2, [spec.first], state)
        for k in others:
            state = gate_cnot(spec.first, k, state)
    else:
        for k in reversed(others):
            state = gate_cnot(spec.first, k, state)
        state = gate_rotation("x", -np.pi / 2, [spec.first], state)
    return state


def nq_map(spec: ProtocolSpec, state: QubitRegister, inverse: bool = False,
           p: ExpParams = DEFAULT_PARAMS) -> QubitRegister:
    """exp(-i pi/4 H_GRn) on the amplifier (its inverse with ``inverse``)."""
    h = ham.grn(spec.n_amplifier).embed(spec.n_total)
    return expm_apply(h, -np.pi / 4 if inverse else np.pi / 4, state, p)


def scheme_steps(spec: ProtocolSpec, target: int = 1, p: ExpParams = DEFAULT_PARAMS):
    """Circuit of a deterministic scheme as a list of state -> state steps."""
    flip = partial(_conditional_flip, spec, target)
    if spec.scheme == "cnot-chain":
        return [partial(flip, list(range(spec.n_amplifier)))]
    if spec.scheme == "cat-gate":
        return [partial(cat_map, spec), partial(flip, [spec.first]),
                partial(cat_map, spec, inverse=True)]
    if spec.scheme == "cat-nq":
        return [partial(nq_map, spec, p=p), partial(flip, [spec.first]),
                partial(nq_map, spec, inverse=True, p=p)]
    raise ValueError(f"{spec.scheme} is not a fixed circuit")


def _run_fixed(spec: ProtocolSpec, p: ExpParams = DEFAULT_PARAMS) -> SchemeOutcome:
    t = spec.target_state
    state = _initial(spec, t)
    for step in scheme_steps(spec, t, p):
        state = step(state)
    return _finish(spec, t, state)


def run_scheme_cnot_chain(spec: ProtocolSpec) -> SchemeOutcome:
    """Target-controlled CNOT onto each amplifier spin."""
    if spec.scheme != "cnot-chain":
        raise ValueError("spec.scheme must be 'cnot-chain'")
    return _run_fixed(spec)


def run_scheme_cat_gate(spec: ProtocolSpec) -> SchemeOutcome:
    """Gate-built cat state, one conditional flip on the first spin, then undo."""
    if spec.scheme != "cat-gate":
        raise ValueError("spec.scheme must be 'cat-gate'")
    return _run_fixed(spec)


def run_scheme_cat_nq(spec: ProtocolSpec, p: ExpParams = DEFAULT_PARAMS) -> SchemeOutcome:
    """Cat state from the n-quantum propagator, conditional flip, inverse propagator."""
    if spec.scheme != "cat-nq":
        raise ValueError("spec.scheme must be 'cat-nq'")
    return _run_fixed(spec, p)


_RUNNERS = {
    "cnot-chain": run_scheme_cnot_chain,
    "cat-gate": run_scheme_cat_gate,
    "cat-nq": run_scheme_cat_nq,
}


def run_both_branches(scheme: str, n: int, mode: str = "reduced", first: int = 0) -> TraceResult:
    """One-row trace for a fixed scheme: both target branches and their contrast."""
    out = [
        _RUNNERS[scheme](ProtocolSpec(scheme, n, t, mode, first)) for t in (0, 1)
    ]
    c = contrast(out[0].mz, out[1].mz, float(n))
    return TraceResult(
        n=n,
        Mz0=np.array([out[0].mz]),
        Mz1=np.array([out[1].mz]),
        contrast=np.array([c]),
        Q0=np.array([out[0].q]),
        Q1=np.array([out[1].q]),
        fidelity=np.array([branch_fidelity(out[0].amplifier, out[1].amplifier)]),
    )


# -- pseudo-random map ------------------------------------------------------


class _MapBranch:
    """One target branch of the repeated map, with cached propagators."""

    def __init__(self, spec: ProtocolSpec, target: int, params: MapParams, p: ExpParams):
        self.spec, self.target = spec, target
        c = params.coupling_for(spec.n_amplifier)
        n_tot = spec.n_total
        h_dip = ham.dipolar(c).embed(n_tot)
        h_kick = ham.gr1(c, spec.first).embed(n_tot)
        self.free = Evolver(h_dip, params.t_free, p)
        self.kick = Evolver(h_kick, params.t_pert, p)
        self.h_kick = h_kick
        self.order = params.map_order
        self.state = _initial(spec, target)

    def _apply_kick(self):
        if self.spec.mode == "full":
            self.state = controlled_evolve(
                self.spec.target_qubit, self.h_kick, self.kick.t, self.state, evolver=self.kick
            )
        elif self.target == 1:
            self.state = QubitRegister(self.state.n_qubits, self.kick(self.state.amplitudes))

    def _apply_free(self):
        self.state = QubitRegister(self.state.n_qubits, self.free(self.state.amplitudes))

    def step(self) -> QubitRegister:
        if self.order == "dip-first":
            self._apply_free()
            self._apply_kick()
        else:
            self._apply_kick()
            self._apply_free()
        if self.spec.mode == "full":
            return project_qubit(self.state, self.spec.n_amplifier, self.target)
        return self.state


def first_crossing(values: np.ndarray, threshold: float) -> Optional[int]:
    hits = np.nonzero(np.asarray(values) >= threshold)[0]
    return int(hits[0]) + 1 if hits.size else None


def run_random_map(
    spec: ProtocolSpec,
    params: MapParams = MapParams(),
    threshold: float = DEFAULT_THRESHOLD,
    p: ExpParams = DEFAULT_PARAMS,
) -> TraceResult:
    """Repeat U = exp(-i t H_GR1) exp(-i T H_dip), the kick conditioned on the target.

    Both target branches are propagated; ``spec.target_state`` is ignored.
    """
    if spec.scheme != "random-map":
        raise ValueError("spec.scheme must be 'random-map'")
    n = spec.n_amplifier
    if n < 2:
        raise ValueError("random map needs at least 2 amplifier spins")
    b0, b1 = (_MapBranch(spec, t, params, p) for t in (0, 1))
    cols = {k: np.empty(params.r_max) for k in ("Mz0", "Mz1", "Q0", "Q1", "fidelity")}
    for r in range(params.r_max):
        s0, s1 = b0.step(), b1.step()
        cols["Mz0"][r] = magnetization(s0)
        cols["Mz1"][r] = magnetization(s1)
        cols["Q0"][r] = meyer_wallach(s0)
        cols["Q1"][r] = meyer_wallach(s1)
        cols["fidelity"][r] = branch_fidelity(s0, s1)
    con = (cols["Mz0"] - cols["Mz1"]) / float(n)
    return TraceResult(n=n, contrast=con, r_star=first_crossing(con, threshold),
                       threshold=threshold, **cols)


# -- sweeps -----------------------------------------------------------------


@dataclass
class SweepRow:
    n: int
    N: int
    r_star: Optional[int]
    contrast_sat: float
    Q_sat: float
    fidelity_sat: float


@dataclass
class LogFit:
    """Linear fit of r_star against log2(N)."""

    slope: Optional[float]
    intercept: Optional[float]
    residual: Optional[float]
    correlation: Optional[float]
    n_points: int

    @property
    def defined(self) -> bool:
        return self.slope is not None


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    fit: Optional[LogFit] = None
    traces: dict = field(default_factory=dict)


def fit_log_scaling(rows) -> LogFit:
    pts = [(np.log2(r.N), r.r_star) for r in rows if r.r_star is not None]
    if len(pts) < 3:
        return LogFit(None, None, None, None, len(pts))
    x, y = (np.array(v, dtype=float) for v in zip(*pts))
    lr = stats.linregress(x, y)
    resid = float(np.sqrt(np.mean((y - (lr.slope * x + lr.intercept)) ** 2)))
    return LogFit(float(lr.slope), float(lr.intercept), resid, float(lr.rvalue), len(pts))


def placement_index(n: int, placement) -> int:
    """Amplifier index of the spin coupled to the target: "end", "center" or an int."""
    if placement == "end":
        return 0
    if placement == "center":
        return n // 2
    return int(placement)


def _sweep_one(n, params, threshold, mode, p, placement):
    c = None
    if params.couplings is not None:
        c = ham.CouplingModel.linear_chain(n, params.couplings.b12, params.couplings.decay_exponent)
    sub = MapParams(params.t_pert, params.t_free, params.r_max, c, params.map_order)
    spec = ProtocolSpec("random-map", n, 0, mode, placement_index(n, placement))
    tr = run_random_map(spec, sub, threshold, p)
    row = SweepRow(n, 2**n, tr.r_star, tr.saturated("contrast"), tr.saturated("Q1"),
                   tr.saturated("fidelity"))
    return row, tr


def run_sweep(
    ns,
    params: MapParams = MapParams(),
    threshold: float = DEFAULT_THRESHOLD,
    mode: str = "reduced",
    p: ExpParams = DEFAULT_PARAMS,
    workers: int = 1,
    placement="end",
) -> SweepResult:
    """Random-map runs over amplifier sizes plus the r_star vs log2(N) fit.

    ``params.couplings`` (if given) only supplies b_12 and the decay exponent;
    each size gets its own chain.
    """
    ns = sorted(set(int(n) for n in ns))
    job = partial(_sweep_one, params=params, threshold=threshold, mode=mode, p=p,
                  placement=placement)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(job, ns))
    else:
        results = [job(n) for n in ns]
    rows = [row for row, _ in results]
    return SweepResult(rows, fit_log_scaling(rows), {row.n: tr for row, tr in results})
