"""Exact simulation of the jump process on ``Q_p^n / Z_p^n``.

The process jumps at the events of a unit-rate Poisson clock; each jump is an
independent draw from ``J``.  Only the coset of the position matters for
membership in ``Z_p^n``, and a jump landing in ``Z_p^n`` leaves the coset
unchanged.  With thinning on, such jumps are skipped: the clock runs at rate
``1 - int_{Z_p^n} J`` and jump radii are drawn conditionally on ``||y|| >= p``.

Every trial owns a Philox stream keyed by ``(seed, trial index)``, so results
do not depend on how trials are split between workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .kernels import JumpWeights, LandscapeKernel, jump_radius_weights
from .padic import PAdicCoset, coset_add, sample_sphere_coset

__all__ = [
    "SimConfig",
    "TrialResult",
    "JumpLaw",
    "trial_rng",
    "sample_jump",
    "simulate_survival",
    "survival_curve",
    "simulate_first_passage",
    "FirstPassageResult",
    "per_jump_return_probability_check",
]


@dataclass(frozen=True)
class SimConfig:
    kernel: LandscapeKernel
    trials: int = 10_000
    horizon: float = 100.0
    seed: int = 0
    workers: int = 1
    thinning: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if not self.horizon > 0:
            raise ConfigurationError(f"horizon must be positive, got {self.horizon}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if not self.kernel.density_backed:
            raise ConfigurationError("simulation needs a density-backed kernel")


@dataclass(frozen=True)
class TrialResult:
    exited: bool
    exit_time: Optional[float]
    returned: bool
    tau: Optional[float]
    in_ball_at_horizon: bool


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one trial, keyed by ``(seed, index)``."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index, 0]))


class JumpLaw:
    """Radius law of a jump, sampled by bracketing a uniform between tail masses."""

    def __init__(self, kernel: LandscapeKernel, weights: Optional[JumpWeights] = None):
        if not kernel.density_backed:
            raise PreconditionError("jump sampling needs a density-backed kernel")
        self.kernel = kernel
        self.p, self.n = kernel.p, kernel.n
        self.weights = weights or jump_radius_weights(kernel)
        tails = self.weights.tail_mass  # tails[j] = P(radius index > j)
        # ascending copy for searchsorted
        self._rev = tails[::-1].copy()
        self.outside_mass = float(tails[0])

    def radius_index(self, u: float) -> int:
        """Map ``u`` in ``(0, 1]`` to a sphere index, 0 meaning inside ``Z_p^n``.

        The index is the ``j`` with ``tails[j] < u <= tails[j-1]``.
        """
        if u > self.outside_mass:
            return 0
        jmax = self._rev.size - 1
        count = int(np.searchsorted(self._rev, u, side="left"))
        return jmax - count + 1

    def sample_radius(self, rng: np.random.Generator, outside_only: bool = False) -> int:
        u = 1.0 - rng.random()
        if outside_only:
            u *= self.outside_mass
        return self.radius_index(u)

    def sample(self, rng: np.random.Generator, outside_only: bool = False) -> PAdicCoset:
        j = self.sample_radius(rng, outside_only)
        if j == 0:
            return PAdicCoset.zero(self.p, self.n)
        return sample_sphere_coset(self.p, self.n, j, rng)


def sample_jump(kernel: LandscapeKernel, rng: np.random.Generator) -> PAdicCoset:
    """One jump increment, reduced mod ``Z_p^n``."""
    return JumpLaw(kernel).sample(rng)


def _clock_rate(law: JumpLaw, thinning: bool) -> float:
    return law.outside_mass if thinning else 1.0


def _run_trial(law: JumpLaw, rng, horizon: float, thinning: bool, stop_on_return: bool = True) -> TrialResult:
    """Follow one path from the zero coset up to ``horizon``."""
    rate = _clock_rate(law, thinning)
    zero = PAdicCoset.zero(law.p, law.n)
    x = zero
    t = 0.0
    exit_time = None
    tau = None
    if rate <= 0.0:
        return TrialResult(False, None, False, None, True)
    while True:
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            break
        x = coset_add(x, law.sample(rng, outside_only=thinning))
        inside = x.is_zero()
        if exit_time is None:
            if not inside:
                exit_time = t
        elif tau is None and inside:
            tau = t
            if stop_on_return:
                break
    return TrialResult(exit_time is not None, exit_time, tau is not None, tau, x.is_zero())


def _run_survival_trial(law: JumpLaw, rng, ts: np.ndarray, thinning: bool) -> np.ndarray:
    """Indicator of ``X_t in Z_p^n`` for each (sorted) time in ``ts``."""
    rate = _clock_rate(law, thinning)
    out = np.ones(ts.size, dtype=bool)
    if rate <= 0.0 or ts.size == 0:
        return out
    x = PAdicCoset.zero(law.p, law.n)
    t = rng.exponential(1.0 / rate)
    i = 0
    while i < ts.size:
        while i < ts.size and ts[i] < t:
            out[i] = x.is_zero()
            i += 1
        if i == ts.size:
            break
        x = coset_add(x, law.sample(rng, outside_only=thinning))
        t += rng.exponential(1.0 / rate)
    return out


def _survival_chunk(args):
    kernel, seed, start, stop, ts, thinning = args
    law = JumpLaw(kernel)
    counts = np.zeros(len(ts), dtype=np.int64)
    for idx in range(start, stop):
        counts += _run_survival_trial(law, trial_rng(seed, idx), ts, thinning)
    return counts


def _passage_chunk(args):
    kernel, seed, start, stop, horizon, thinning = args
    law = JumpLaw(kernel)
    return [_run_trial(law, trial_rng(seed, idx), horizon, thinning) for idx in range(start, stop)]


def _chunks(total: int, workers: int) -> list[tuple[int, int]]:
    # fixed-size chunks: the partition, and therefore the output, ignores the worker count
    size = max(1, min(5000, math.ceil(total / 8)))
    return [(a, min(a + size, total)) for a in range(0, total, size)]


def _map(func, jobs, workers):
    if workers == 1 or len(jobs) == 1:
        return [func(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))


def survival_curve(config: SimConfig, ts: Sequence[float]):
    """Empirical ``S(t)`` and binomial standard errors on a grid of times."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0):
        raise PreconditionError("times must be >= 0")
    order = np.argsort(ts, kind="stable")
    jobs = [(config.kernel, config.seed, a, b, ts[order], config.thinning) for a, b in _chunks(config.trials, config.workers)]
    counts = sum(_map(_survival_chunk, jobs, config.workers))
    est = np.empty(ts.size)
    est[order] = counts / config.trials
    stderr = np.sqrt(est * (1.0 - est) / config.trials)
    return est, stderr


def simulate_survival(config: SimConfig, t: float):
    """``(estimate, standard_error)`` of ``P(X_t in Z_p^n)`` with ``X_0 in Z_p^n``."""
    est, se = survival_curve(config, [t])
    return float(est[0]), float(se[0])


@dataclass(frozen=True, eq=False)
class FirstPassageResult:
    """Return fractions on a horizon ladder and the observed first-passage times."""

    horizons: np.ndarray
    return_fraction: np.ndarray  # empty when no trial ever left Z_p^n
    tau: np.ndarray
    trials: int
    exited: int
    results: list = field(repr=False, default_factory=list)

    @property
    def defined(self) -> bool:
        return self.exited > 0

    def empirical_cdf(self, ts) -> np.ndarray:
        """``P(tau <= t)`` over all trials (never-returning paths count as ``tau = inf``)."""
        tau = np.sort(self.tau)
        return np.searchsorted(tau, np.asarray(ts, dtype=float), side="right") / self.trials


def default_ladder(horizon: float) -> np.ndarray:
    """``1, 2, 5, 10, 20, 50, ...`` up to and including ``horizon``."""
    out = []
    dec = 1.0
    while dec <= horizon:
        out.extend(v for v in (dec, 2 * dec, 5 * dec) if v < horizon)
        dec *= 10
    out.append(horizon)
    return np.unique(np.array(out, dtype=float))


def simulate_first_passage(config: SimConfig, horizons=None) -> FirstPassageResult:
    """First exit from ``Z_p^n`` and first return afterwards, per trial, up to ``config.horizon``."""
    ladder = default_ladder(config.horizon) if horizons is None else np.asarray(sorted(horizons), dtype=float)
    if ladder[-1] > config.horizon:
        raise ConfigurationError("ladder exceeds the simulated horizon")
    jobs = [(config.kernel, config.seed, a, b, config.horizon, config.thinning) for a, b in _chunks(config.trials, config.workers)]
    results = [r for chunk in _map(_passage_chunk, jobs, config.workers) for r in chunk]
    exited = sum(r.exited for r in results)
    tau = np.array([r.tau for r in results if r.returned], dtype=float)
    if exited == 0:
        fraction = np.array([], dtype=float)
    else:
        fraction = np.array([np.count_nonzero(tau <= h) for h in ladder], dtype=float) / config.trials
    return FirstPassageResult(ladder, fraction, tau, config.trials, exited, results)


@dataclass(frozen=True)
class JumpCheck:
    j: int
    expected: float
    observed: float
    sigma: float
    draws: int

    @property
    def passed(self) -> bool:
        if self.sigma == 0:
            return self.observed == self.expected
        return abs(self.observed - self.expected) <= 3.0 * self.sigma


def per_jump_return_probability_check(kernel: LandscapeKernel, js=(1, 2, 3), draws=100_000, seed=0) -> list[JumpCheck]:
    """From a coset of norm ``p**j``, a single jump hits the zero coset with probability ``J(p**j)``.

    A landing in ``Z_p^n`` needs the jump to lie in ``-x + Z_p^n``, a ball of
    volume 1 on which ``J`` equals ``J(p**j)``.
    """
    law = JumpLaw(kernel)
    out = []
    for j in js:
        rng = trial_rng(seed, j)
        start = sample_sphere_coset(kernel.p, kernel.n, j, rng)
        hits = 0
        for _ in range(draws):
            if coset_add(start, law.sample(rng)).is_zero():
                hits += 1
        expected = float(kernel.density(j))
        sigma = math.sqrt(expected * (1.0 - expected) / draws)
        out.append(JumpCheck(j, expected, hits / draws, sigma, draws))
    return out
