"""
Deterministic amplification schemes
===================================

Three circuits copy the state of a single target spin onto the collective
magnetization of an amplifier chain. Run with ``python demos/01_amplifier_schemes.py``.
"""

# %%
# Contrast of each scheme for a few amplifier sizes. ``cnot-chain`` and
# ``cat-gate`` flip every amplifier spin when the target is |1>; the n-quantum
# version only removes the magnetization.
from spinamp.protocols import run_both_branches

for scheme in ("cnot-chain", "cat-gate", "cat-nq"):
    row = [run_both_branches(scheme, n).contrast[0] for n in range(1, 7)]
    print(f"{scheme:>10}: " + "  ".join(f"{c:5.2f}" for c in row))

# %%
# The target can also be simulated as an explicit qubit. The observables are
# the same as in the classical-branch simulation.
full = run_both_branches("cat-gate", 5, mode="full")
reduced = run_both_branches("cat-gate", 5, mode="reduced")
print("full mode Mz:", full.Mz0[0], full.Mz1[0], " reduced mode Mz:", reduced.Mz0[0], reduced.Mz1[0])

# %%
# Both maximum-contrast circuits implement the same operator,
# |1><1|_T (x) prod X + |0><0|_T (x) I, which we can check on dense matrices.
from spinamp.propagate import effective_propagator, paper_effective_operator, unitary_equal_up_to_phase
from spinamp.protocols import ProtocolSpec, scheme_steps

for n in range(1, 5):
    ref = paper_effective_operator(n)
    for scheme in ("cnot-chain", "cat-gate"):
        u = effective_propagator(scheme_steps(ProtocolSpec(scheme, n, mode="full")), n + 1)
        cmp = unitary_equal_up_to_phase(u, ref)
        print(f"n={n} {scheme:>10}: equal={cmp.equal} residual={cmp.residual:.1e}")

# %%
# The n-quantum propagator makes the cat state in one step.
import numpy as np

from spinamp import basis_state, expm_apply, grn, meyer_wallach

cat = expm_apply(grn(6), np.pi / 4, basis_state(6, "000000"))
print("cat amplitudes on |0..0>, |1..1>:", np.round(cat.amplitudes[[0, -1]], 6), " Q =", round(meyer_wallach(cat), 12))
