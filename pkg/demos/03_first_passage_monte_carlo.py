"""Simulated paths on Q_2 / Z_2 against the renewal equation.

Run with ``python demos/03_first_passage_monte_carlo.py`` (about ten seconds).
"""

import numpy as np

from padic_landscape.kernels import regularized_linear
from padic_landscape.montecarlo import SimConfig, simulate_first_passage, survival_curve
from padic_landscape.survival import first_passage_density, return_probability, survival_series

J = regularized_linear(2, 1, 2.0)

# %% Survival: simulation against the series.
ts = [0.5, 1.0, 2.0, 5.0]
est, se = survival_curve(SimConfig(J, trials=50_000, seed=1), ts)
for t, e, s, exact in zip(ts, est, se, survival_series(J, ts)):
    print(f"t={t:4.1f}  MC {e:.4f} +- {s:.4f}   series {exact:.4f}")

# %% First return to Z_2 after the first exit.
T = 20.0
mc = simulate_first_passage(SimConfig(J, trials=20_000, horizon=T, seed=2))
fp = first_passage_density(J, T, h=0.01)
grid = fp.times[::200]
print(" t     MC cdf   Volterra cdf")
for t, a, b in zip(grid, mc.empirical_cdf(grid), fp.cdf()[::200]):
    print(f"{t:5.1f}  {a:.4f}   {b:.4f}")

# %% Return probability creeps towards one: the walk is recurrent.
# 1 - 1/(1 + G(T)) is a finite-horizon proxy; it lags the simulated fraction
# but both tend to the same limit.
rp = return_probability(J, 1000.0)
for h, v in zip(rp.horizons, rp.trace):
    print(f"T={h:7.1f}  1 - 1/(1 + G(T)) = {v:.4f}")
long = simulate_first_passage(SimConfig(J, trials=2000, horizon=1000.0, seed=3))
print("MC return fraction by horizon:", dict(zip(long.horizons.tolist(), np.round(long.return_fraction, 3).tolist())))
