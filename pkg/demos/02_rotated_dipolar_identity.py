"""
Dipolar coupling under a collective pi/2 rotation
=================================================

A pi/2 rotation about y turns the secular dipolar Hamiltonian into a
double-quantum (grade raising) part minus half of itself.
"""

# %%
import numpy as np

from spinamp import hamiltonians as ham

rng = np.random.default_rng(3)
n = 4
b = np.triu(rng.uniform(0.2, 1.0, (n, n)), 1)
c = ham.CouplingModel.from_matrix(b + b.T)

h_dip = ham.materialize_dense(ham.dipolar(c))
h_dq = ham.materialize_dense(ham.gr2(c))
rotated = ham.materialize_dense(ham.rotate_y90(ham.dipolar(c)))

# %%
# Fit the prefactor of the double-quantum part by least squares, then check the residual.
rest = rotated + 0.5 * h_dip
coef = np.vdot(h_dq, rest).real / np.vdot(h_dq, h_dq).real
print(f"fitted prefactor: {coef:.12f}")
print("residual:", np.linalg.norm(rest - coef * h_dq))

# %%
# With spin-1/2 operators (sigma/2) in the dipolar term the same identity reads 3/8.
print("spin-1/2 prefactor:", coef / 4)
