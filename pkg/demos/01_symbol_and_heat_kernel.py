"""Walk through a landscape kernel: its symbol, its heat kernel, and one solution.

Run with ``python demos/01_symbol_and_heat_kernel.py``.
"""

import numpy as np

from padic_landscape import kernels
from padic_landscape.evolution import compound_poisson_oracle, heat_kernel, solve_radial
from padic_landscape.radial import indicator, radial_fourier

# %% A linear-type kernel on Q_2: constant on Z_2, decaying like ||x||^-3 outside.
J = kernels.regularized_linear(p=2, n=1, alpha=2.0)
print(f"normalization c = {J.c:.15f} (6/7 = {6 / 7:.15f})")
print(f"recurrence class: {kernels.classify_recurrence(J)}")

# %% The symbol psi = 1 - FJ, once from its closed series and once by transforming J.
ms = np.arange(-4, 4)
direct = J.psi(ms)
via_fourier = 1.0 - radial_fourier(J.as_radial((-40, 60)))(ms)
for m, a, b in zip(ms, direct, via_fourier):
    print(f"psi(2^{m:+d}) = {a:.12f}   1 - FJ = {b:.12f}")
# inside the unit ball the symbol is an exact power: psi(2^m) = F 2^(2m)
print("F =", kernels.power_bounds(J).upper_c)

# %% Heat kernel at t = 1: an atom e^{-t} at the origin plus a radial density.
z = heat_kernel(J, 1.0, window=(-20, 20))
oracle = compound_poisson_oracle(J, 1.0, window=(-20, 20))
ks = np.arange(-3, 6)
print("atom:", z.atom_mass, " total mass:", z.mass())
print(np.column_stack([ks, z.density(ks), oracle.density(ks)]))

# %% Starting from the unit ball, mass spreads out but is conserved.
for t in (0.0, 1.0, 10.0, 100.0):
    sol = solve_radial(J, t, indicator(2, 1, 0))
    print(f"t={t:6.1f}  u on Z_2 = {sol.u(0):.6f}  u at ||x||=8 = {sol.u(3):.3e}  mass = {sol.mass():.12f}")
