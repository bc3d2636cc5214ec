"""
Repetitions to contrast versus Hilbert-space size
=================================================

Sweep the amplifier size and fit the number of repetitions needed to reach
the contrast threshold against log2(N) = n.
"""

# %%
# The first spin sits at the chain center; with an odd chain length that spot is
# a mirror-symmetry point and the contrast stays low in practice, so only even sizes are used.
from spinamp.protocols import MapParams, run_sweep

res = run_sweep([6, 8, 10], MapParams(r_max=80), threshold=0.9, placement="center")
for row in res.rows:
    print(row)

# %%
fit = res.fit
if fit.defined:
    print(f"r* = {fit.slope:.3f} log2(N) + {fit.intercept:.3f}   (r = {fit.correlation:.3f})")
else:
    print(f"fit undefined: only {fit.n_points} sizes reached the threshold")
