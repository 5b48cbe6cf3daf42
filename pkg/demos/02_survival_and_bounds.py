"""Survival in the unit ball and the incomplete-gamma envelopes around it.

Run with ``python demos/02_survival_and_bounds.py``.
"""

import numpy as np

from padic_landscape.kernels import regularized_linear, synthetic_power_symbol
from padic_landscape.survival import survival_report, survival_series

# %% psi(2^m) = 2^m: the simplest recurrent symbol in dimension one.
K = synthetic_power_symbol(p=2, n=1, F=1.0, s=1.0)
ts = np.array([0.25, 0.5, 1.0, 2.0, 5.0, 10.0])
rep = survival_report(K, ts)
print(" t       S(t)      stated    corrected  rigorous   upper")
for row in zip(rep.t, rep.S, rep.stated_lower, rep.corrected_lower, rep.rigorous_lower, rep.upper):
    print("{:5.2f}  {:.6f}  {:.6f}  {:.6f}  {:.6f}  {:.6f}".format(*row))
# the uncorrected lower envelope sits above S: it is off by a factor p^n
print("stated lower bound exceeds S at t =", rep.stated_lower_failures())

# %% S(t) t^(n/s) settles near (1 - 1/p) / ln p, with a tiny log-periodic ripple.
for t in (10.0, 100.0, 1000.0, 1e4):
    print(f"t={t:8.0f}  S t = {survival_series(K, t) * t:.8f}")
print("limit          =", 0.5 / np.log(2))

# %% The ripple is why the corrected envelope is the mean of S, not a strict floor.
late = survival_report(K, np.linspace(15, 20, 501))
ratio = late.S / late.corrected_lower
print(f"S / corrected on [15, 20]: min {ratio.min():.7f}, max {ratio.max():.7f}")
print("rigorous floor holds:", bool(np.all(late.rigorous_lower <= late.S)))

# %% Same picture for the linear landscape kernel.
L = regularized_linear(2, 1, 2.0)
print(survival_report(L, [1.0, 10.0, 100.0]).S)
