"""Built-in identity checks: rotated dipolar identity, scheme equivalence, oracles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import hamiltonians as ham
from .metrics import meyer_wallach
from .propagate import (
    ExpParams,
    effective_propagator,
    expm_apply,
    paper_effective_operator,
    unitary_equal_up_to_phase,
)
from .protocols import ProtocolSpec, scheme_steps
from .statevec import apply_local, basis_state, random_state, reduce_single

_PAULI = {
    "I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]),
}


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    tolerance: float
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"[{status}] {self.name}: residual={self.residual:.3e} tol={self.tolerance:.0e}{extra}"


def _kron(n, ops):
    m = np.ones((1, 1), dtype=complex)
    for q in range(n):
        m = np.kron(ops.get(q, _PAULI["I"]), m)
    return m


def _random_couplings(rng, n):
    b = np.triu(rng.uniform(0.2, 1.5, (n, n)), 1)
    return ham.CouplingModel.from_matrix(b + b.T)


def rotated_dipolar_checks(negate_prefactor: bool = False, seed: int = 7):
    """R_y(pi/2) H_dip R_y(pi/2)^dagger = c sum b (s+s+ + s-s-) - H_dip/2."""
    rng = np.random.default_rng(seed)
    c_pauli = -ham.EQ2_GR_PREFACTOR if negate_prefactor else ham.EQ2_GR_PREFACTOR
    out = []
    for n in range(2, 6):
        cm = _random_couplings(rng, n)
        hd = ham.materialize_dense(ham.dipolar(cm))
        gr = ham.materialize_dense(ham.gr2(cm))
        rot = ham.materialize_dense(ham.rotate_y90(ham.dipolar(cm)))
        res = np.linalg.norm(rot - (c_pauli * gr - 0.5 * hd))
        out.append(Check(f"rotated dipolar identity n={n}", res < 1e-10, res, 1e-10,
                         f"c={c_pauli:g} with Pauli H_dip"))
        # same identity with spin-1/2 operators in H_dip: constant becomes c/4 = 3/8
        hd_half = 0.25 * hd
        rot_half = 0.25 * rot
        res = np.linalg.norm(rot_half - (c_pauli / 4 * gr - 0.5 * hd_half))
        out.append(Check(f"rotated dipolar identity n={n} (spin-1/2 H_dip)", res < 1e-10,
                         res, 1e-10, f"c={c_pauli / 4:g}"))
    return out


def equivalence_checks():
    out = []
    for n in range(1, 5):
        ref = paper_effective_operator(n)
        inputs = [0, 1 << n]  # |0>_T|0..0>, |1>_T|0..0>
        for scheme in ("cnot-chain", "cat-gate"):
            spec = ProtocolSpec(scheme, n, 0, "full")
            u = effective_propagator(scheme_steps(spec), n + 1)
            full = unitary_equal_up_to_phase(u, ref, 1e-9)
            sub = unitary_equal_up_to_phase(u, ref, 1e-9, inputs=inputs)
            out.append(Check(f"{scheme} propagator n={n} (full space)", full.equal,
                             full.residual, 1e-9, f"phase={full.phase:.3f}"))
            out.append(Check(f"{scheme} propagator n={n} (protocol inputs)", sub.equal,
                             sub.residual, 1e-9, f"phase={sub.phase:.3f}"))
    return out


def oracle_checks(seed: int = 11):
    rng = np.random.default_rng(seed)
    out = []
    n = 5
    s = random_state(n, rng)
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    # dense embedding of op on (q0=1, q1=3) by permuting a kron product
    dense = np.zeros((2**n, 2**n), dtype=complex)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    e_ab = np.zeros((2, 2)); e_ab[a, b] = 1
                    e_cd = np.zeros((2, 2)); e_cd[c, d] = 1
                    dense += op[a + 2 * c, b + 2 * d] * _kron(n, {1: e_ab, 3: e_cd})
    res = np.max(np.abs(apply_local(s, op, [1, 3]).amplitudes - dense @ s.amplitudes))
    out.append(Check("apply_local vs Kronecker product", res < 1e-12, res, 1e-12))

    rho_full = np.outer(s.amplitudes, s.amplitudes.conj()).reshape((2,) * (2 * n))
    q = 2
    ax = n - 1 - q
    red = np.einsum(rho_full, list(range(n)) + [n + i if i == ax else i for i in range(n)],
                    [ax, n + ax])
    res = np.max(np.abs(reduce_single(s, q) - red))
    out.append(Check("reduce_single vs dense partial trace", res < 1e-12, res, 1e-12))

    cm = ham.CouplingModel.linear_chain(6)
    h = ham.dipolar(cm) + ham.gr1(cm, 0)
    s6 = random_state(6, rng)
    ref = expm(-1j * 1.7 * ham.materialize_dense(h)) @ s6.amplitudes
    for method in ("dense-eig", "krylov"):
        got = expm_apply(h, 1.7, s6, ExpParams(method=method)).amplitudes
        res = np.max(np.abs(got - ref))
        out.append(Check(f"{method} exponential vs scipy expm", res < 1e-9, res, 1e-9))

    for n in (2, 6, 10):
        cat = expm_apply(ham.grn(n), np.pi / 4, basis_state(n, "0" * n))
        target = np.zeros(2**n, complex)
        target[0], target[-1] = 1 / np.sqrt(2), -1j / np.sqrt(2)
        res = max(np.max(np.abs(cat.amplitudes - target)), abs(meyer_wallach(cat) - 1))
        out.append(Check(f"n-quantum propagator cat state n={n}", res < 1e-10, res, 1e-10))
    return out


def run_all(negate_prefactor: bool = False):
    return rotated_dipolar_checks(negate_prefactor) + equivalence_checks() + oracle_checks()
