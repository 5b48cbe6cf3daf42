"""Radial landscape kernels ``J`` and their symbols ``psi = 1 - FJ``.

Built-in families (``J(p**k)``; ``k <= 0`` is the closed unit ball):

``linear``    ``c`` for ``k <= 0`` and ``c p**(-k (alpha+1))`` for ``k >= 1``
``log``       ``c ln(2)**alpha`` for ``k <= 0`` and
              ``c ln(1 + p**k)**alpha p**(-k beta)`` for ``k >= 1``
``synthetic`` no density, the symbol itself is ``F p**(m s)``
``table``     any nonnegative integrable :class:`RadialFunction`, rescaled to mass 1

The pure power and log shapes are not integrable at the origin, so both
families are held constant on the unit ball.  The symbol on ``||xi|| <= 1``
only sees ``J`` at radii ``>= p``, so nothing that depends on ``psi`` inside
the unit ball is affected by that choice.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DivergenceError, PreconditionError
from .radial import DEFAULT_WINDOW, RadialFunction, Tail, integrate_radial

__all__ = [
    "LandscapeKernel",
    "JumpWeights",
    "MonotoneReport",
    "PowerBounds",
    "regularized_linear",
    "regularized_log",
    "synthetic_power_symbol",
    "custom_table",
    "normalize",
    "symbol",
    "check_symbol_monotone",
    "classify_recurrence",
    "jump_radius_weights",
    "power_bounds",
]

FAMILIES = ("linear", "log", "synthetic", "table")
_LOG_UNDERFLOW = -745.0
_MAX_TERMS = 1_000_000


@functools.lru_cache(maxsize=64)
def _log_suffix(p: int, n: int, alpha: float, beta: float) -> np.ndarray:
    """Suffix sums ``T[i] = sum_{j >= i} p**(j (n - beta)) ln(1 + p**j)**alpha`` for ``i >= 1``.

    ``T[0]`` is unused.  Terms are summed until they underflow; the ratio of
    consecutive terms decreases to ``p**(n - beta) < 1``, so the neglected
    remainder is below ``1e-300``.
    """
    lp = math.log(p)
    rate = (beta - n) * lp
    # crude count: terms fall below e**-745 once i (beta - n) ln p > 745 + alpha ln(ln ...)
    count = int(min(_MAX_TERMS, 64 + (-_LOG_UNDERFLOW + 50 + alpha * 10) / rate))
    j = np.arange(1, count + 1, dtype=float)
    log_ln = np.log(j * lp + np.log1p(np.power(float(p), -j)))
    terms = np.exp(-j * rate + alpha * log_ln)
    suffix = np.cumsum(terms[::-1])[::-1]
    return np.concatenate([[np.nan], suffix, [0.0]])


def _log_tail(p, n, alpha, beta, i):
    table = _log_suffix(p, n, alpha, beta)
    i = np.asarray(i)
    return table[np.clip(i, 1, table.size - 1)]


@dataclass(frozen=True)
class LandscapeKernel:
    """A normalized radial jump density (or, for ``synthetic``, a bare symbol)."""

    family: str
    p: int
    n: int = 1
    alpha: Optional[float] = None
    beta: Optional[float] = None
    c: Optional[float] = None
    F: Optional[float] = None
    s: Optional[float] = None
    table: Optional[RadialFunction] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.p < 2 or any(self.p % q == 0 for q in range(2, int(self.p**0.5) + 1)):
            raise ConfigurationError(f"p must be prime, got {self.p}")
        if self.n < 1:
            raise ConfigurationError(f"dimension n must be >= 1, got {self.n}")

    @property
    def density_backed(self) -> bool:
        return self.family != "synthetic"

    @property
    def inside_value(self) -> float:
        """Constant value of ``J`` on the closed unit ball."""
        if self.family == "linear":
            return self.c
        if self.family == "log":
            return self.c * math.log(2.0) ** self.alpha
        if self.family == "table":
            return float(self.table(0))
        raise PreconditionError("synthetic symbol has no density")

    def density(self, k):
        """``J(p**k)`` for integer ``k`` (scalar or array)."""
        k = np.asarray(k)
        kf = k.astype(float)
        p = float(self.p)
        if self.family == "linear":
            out = np.where(k <= 0, self.c, self.c * np.power(p, -np.maximum(kf, 0.0) * (self.alpha + 1.0)))
        elif self.family == "log":
            kk = np.maximum(kf, 1.0)
            log_ln = np.log(kk * math.log(p) + np.log1p(np.power(p, -kk)))
            outer = self.c * np.exp(self.alpha * log_ln - kk * self.beta * math.log(p))
            out = np.where(k <= 0, self.inside_value, outer)
        elif self.family == "table":
            out = np.asarray(self.table(k), dtype=float)
        else:
            raise PreconditionError("synthetic symbol has no density")
        return out if out.ndim else float(out)

    def mass_above(self, k):
        """``int_{||x|| >= p**k} J`` for integer ``k`` (vectorized)."""
        k = np.asarray(k)
        if self.family == "table":
            out = self.table.mass_above(k).reshape(k.shape)
            return out if out.ndim else float(out)
        if not self.density_backed:
            raise PreconditionError("synthetic symbol has no density")
        p, n = float(self.p), self.n
        kk = np.maximum(k, 1)
        if self.family == "linear":
            q = p ** (n - self.alpha - 1.0)
            outer = self.c * (1.0 - p**-n) * np.power(q, kk.astype(float)) / (1.0 - q)
        else:
            outer = self.c * (1.0 - p**-n) * _log_tail(self.p, n, self.alpha, self.beta, kk)
        outer_one = self.mass_above(1) if np.any(k <= 0) else 0.0
        inner = self.inside_value * (1.0 - np.power(p, n * (np.minimum(k, 1) - 1.0))) + outer_one
        out = np.where(k <= 0, inner, outer)
        return out if out.ndim else float(out)

    def as_radial(self, window=DEFAULT_WINDOW) -> RadialFunction:
        """Tabulate ``J`` as a :class:`RadialFunction`.

        The linear tail is exact; the log tail is the pure power ``p**(-k beta)``
        matched at the last window point (the log factor varies slowly).
        """
        kmin, kmax = window
        if self.family == "table":
            return self.table.extended(window)
        if not self.density_backed:
            raise PreconditionError("synthetic symbol has no density")
        kmin, kmax = min(kmin, 0), max(kmax, 1)
        ks = np.arange(kmin, kmax + 1)
        values = self.density(ks)
        e = -(self.alpha + 1.0) if self.family == "linear" else -self.beta
        tail = Tail.power(values[-1] * float(self.p) ** (-kmax * e), e)
        return RadialFunction(self.p, self.n, kmin, values, self.inside_value, tail)

    def psi(self, m):
        """Symbol ``psi(p**m) = 1 - (FJ)(p**m)`` for integer ``m`` (vectorized).

        For density kernels this is the split form of the series
        ``p**(-nm) [p**n J(p**(1-m)) + (1 - p**-n) sum_{j>=2} p**(nj) J(p**(j-m))]``,
        namely ``p**(n(1-m)) J(p**(1-m)) + int_{||x|| >= p**(2-m)} J``.
        """
        m = np.asarray(m)
        p = float(self.p)
        if self.family == "synthetic":
            out = self.F * np.power(p, m.astype(float) * self.s)
        else:
            lead = np.power(p, self.n * (1.0 - m.astype(float))) * self.density(1 - m)
            out = lead + self.mass_above(2 - m)
        return out if out.ndim else float(out)

    def ball_mass(self, k):
        """``int_{||x|| <= p**k} J`` for integer ``k`` (vectorized)."""
        k = np.asarray(k)
        if self.family == "table":
            out = self.table.ball_mass(k).reshape(k.shape)
        elif not self.density_backed:
            raise PreconditionError("synthetic symbol has no density")
        else:
            p, n = float(self.p), self.n
            inner = self.inside_value * np.power(p, n * np.minimum(k, 0).astype(float))
            out = np.where(k <= 0, inner, 1.0 - self.mass_above(np.maximum(k, 0) + 1))
        return out if out.ndim else float(out)

    def fourier_density(self, m):
        """``(FJ)(p**m) = 1 - psi(p**m)``, accurate where it is small (large ``m``)."""
        m = np.asarray(m)
        if not self.density_backed:
            out = 1.0 - np.asarray(self.psi(m))
        else:
            mf = m.astype(float)
            out = self.ball_mass(-m) - np.power(float(self.p), -self.n * mf) * self.density(1 - m)
        return out if np.ndim(out) else float(out)

    def psi_increment(self, ma, mb):
        """``psi(p**mb) - psi(p**ma)`` without cancellation where ``psi`` is close to 1."""
        ma, mb = np.asarray(ma), np.asarray(mb)
        direct = np.asarray(self.psi(mb)) - np.asarray(self.psi(ma))
        if not self.density_backed:
            return direct
        far = (ma >= 1) & (mb >= 1)
        if not np.any(far):
            return direct
        return np.where(far, np.asarray(self.fourier_density(ma)) - np.asarray(self.fourier_density(mb)), direct)

    @property
    def psi_at_infinity(self) -> float:
        """Limit of the symbol as ``||xi|| -> infinity`` (1 for any density)."""
        return math.inf if self.family == "synthetic" else 1.0

    def record(self) -> dict:
        """Flat key-value description (used by the CLI's JSON metadata)."""
        rec = {"family": self.family, "p": self.p, "n": self.n}
        for key in ("alpha", "beta", "c", "F", "s"):
            value = getattr(self, key)
            if value is not None:
                rec[key] = value
        return rec


def normalize(family: str, p: int, n: int, alpha: float, beta: Optional[float] = None) -> float:
    """Constant ``c`` making the regularized kernel integrate to one.

    Linear: ``c (1 + (1 - p**-n) q / (1 - q)) = 1`` with ``q = p**(n - alpha - 1)``.
    Log: ``c (ln(2)**alpha + (1 - p**-n) sum_{k>=1} p**(k(n-beta)) ln(1+p**k)**alpha) = 1``.

    Raises
    ------
    DivergenceError
        ``alpha + 1 <= n`` (linear) or ``beta <= n`` (log).
    """
    if alpha is None or alpha <= 0:
        raise ConfigurationError(f"alpha must be positive, got {alpha}")
    if family == "linear":
        if alpha + 1.0 <= n:
            raise DivergenceError(f"normalization diverges: need alpha + 1 > n (alpha={alpha}, n={n})")
        q = float(p) ** (n - alpha - 1.0)
        return 1.0 / (1.0 + (1.0 - float(p) ** -n) * q / (1.0 - q))
    if family == "log":
        if beta is None or beta <= n:
            raise DivergenceError(f"normalization diverges: need beta > n (beta={beta}, n={n})")
        series = _log_suffix(p, n, float(alpha), float(beta))[1]
        return float(1.0 / (math.log(2.0) ** alpha + (1.0 - float(p) ** -n) * series))
    raise ConfigurationError(f"normalize applies to 'linear' or 'log', not {family!r}")


def regularized_linear(p: int, n: int, alpha: float) -> LandscapeKernel:
    alpha = float(alpha)
    return LandscapeKernel("linear", p, n, alpha=alpha, c=normalize("linear", p, n, alpha))


def regularized_log(p: int, n: int, alpha: float, beta: float) -> LandscapeKernel:
    alpha, beta = float(alpha), float(beta)
    return LandscapeKernel("log", p, n, alpha=alpha, beta=beta, c=normalize("log", p, n, alpha, beta))


def synthetic_power_symbol(p: int, n: int, F: float, s: float) -> LandscapeKernel:
    if F <= 0 or s <= 0:
        raise ConfigurationError(f"synthetic symbol needs F > 0 and s > 0, got F={F}, s={s}")
    return LandscapeKernel("synthetic", p, n, F=float(F), s=float(s))


def custom_table(f: RadialFunction) -> LandscapeKernel:
    """Kernel from a nonnegative table, rescaled to unit mass."""
    if np.any(f.values < 0) or f.limit_at_zero < 0 or f.tail.c < 0:
        raise ConfigurationError("kernel table must be nonnegative")
    mass = integrate_radial(f)
    if mass <= 0:
        raise ConfigurationError("kernel table has zero mass")
    return LandscapeKernel("table", f.p, f.n, table=f * (1.0 / mass))


def symbol(kernel: LandscapeKernel, m):
    """``psi(p**m)``; pass ``m = -inf`` for ``xi = 0`` (where ``psi = 0``)."""
    if np.isscalar(m) and m == -math.inf:
        return 0.0
    return kernel.psi(m)


@dataclass(frozen=True)
class MonotoneReport:
    passed: bool
    window: tuple
    witness: Optional[tuple] = None  # (m, psi(p**m), psi(p**(m+1))) at the first decrease

    def __bool__(self):
        return self.passed


def check_symbol_monotone(kernel: LandscapeKernel, window=DEFAULT_WINDOW, rtol=1e-12) -> MonotoneReport:
    """Check that ``psi(p**m)`` is non-decreasing in ``m`` over the window."""
    lo, hi = window
    ms = np.arange(lo, hi + 1)
    vals = np.asarray(kernel.psi(ms), dtype=float)
    slack = rtol * np.maximum(np.abs(vals[:-1]), 1e-300)
    bad = np.nonzero(vals[1:] < vals[:-1] - slack)[0]
    if bad.size:
        i = int(bad[0])
        return MonotoneReport(False, (lo, hi), (int(ms[i]), float(vals[i]), float(vals[i + 1])))
    return MonotoneReport(True, (lo, hi))


def classify_recurrence(kernel: LandscapeKernel) -> str:
    """``'recurrent'`` when a sufficient condition holds, else ``'unknown'``.

    Linear: ``alpha + 1 - 2n >= 0``.  Log: ``beta - alpha - 2n >= 0``.
    A synthetic symbol ``F ||xi||**s`` is treated as linear with ``alpha + 1 - n = s``.
    No transience criterion is available, so ``'transient'`` is never returned.
    """
    n = kernel.n
    if kernel.family == "linear":
        ok = kernel.alpha + 1.0 - 2.0 * n >= 0
    elif kernel.family == "log":
        ok = kernel.beta - kernel.alpha - 2.0 * n >= 0
    elif kernel.family == "synthetic":
        ok = kernel.s - n >= 0
    else:
        ok = False
    return "recurrent" if ok else "unknown"


@dataclass(frozen=True, eq=False)
class JumpWeights:
    """Law of the jump radius: mass inside the unit ball and ``w_j`` for ``j >= 1``.

    ``tail_mass[j]`` is ``sum_{i > j} w_i``; ``weights[j - 1]`` is ``w_j``.
    """

    inside_ball_mass: float
    weights: np.ndarray
    tail_mass: np.ndarray

    @property
    def jmax(self) -> int:
        return self.weights.size

    def weight(self, j: int) -> float:
        return float(self.weights[j - 1]) if 1 <= j <= self.jmax else 0.0


def jump_radius_weights(kernel: LandscapeKernel) -> JumpWeights:
    """``w_j = J(p**j) vol(S_j)`` and ``int_{B_0} J``; tails to below ``1e-300``."""
    if not kernel.density_backed:
        raise PreconditionError("jump weights need a density-backed kernel")
    p, n = float(kernel.p), kernel.n
    inside = kernel.inside_value if kernel.family != "table" else float(kernel.table.ball_mass(0)[0])
    if kernel.family == "linear":
        q = p ** (n - kernel.alpha - 1.0)
        jmax = int(min(_MAX_TERMS, math.ceil(700.0 / -math.log(q)) + 1))
    elif kernel.family == "log":
        jmax = _log_suffix(kernel.p, n, kernel.alpha, kernel.beta).size - 2
    else:
        t = kernel.table
        if t.tail.c == 0.0:
            jmax = max(t.kmax, 1)
        else:
            r = p ** (n + t.tail.e)
            jmax = int(min(_MAX_TERMS, max(t.kmax, 1) + math.ceil(700.0 / -math.log(r))))
    js = np.arange(1, jmax + 1)
    jf = js.astype(float)
    # density and sphere volume are combined before exponentiating so deep spheres do not underflow
    if kernel.family == "linear":
        weights = kernel.c * (1.0 - p**-n) * np.power(p, jf * (n - kernel.alpha - 1.0))
    elif kernel.family == "log":
        log_ln = np.log(jf * math.log(p) + np.log1p(np.power(p, -jf)))
        weights = kernel.c * (1.0 - p**-n) * np.exp(kernel.alpha * log_ln - jf * (kernel.beta - n) * math.log(p))
    else:
        weights = np.asarray(kernel.density(js)) * np.power(p, n * jf) * (1.0 - p**-n)
    tail_mass = np.asarray(kernel.mass_above(np.arange(1, jmax + 2)), dtype=float)
    return JumpWeights(float(inside), weights, tail_mass)


@dataclass(frozen=True)
class PowerBounds:
    """``lower_c ||xi||**lower_e <= psi(||xi||) <= upper_c ||xi||**upper_e`` on ``0 < ||xi|| <= 1``."""

    lower_c: float
    lower_e: float
    upper_c: float
    upper_e: float


def power_bounds(kernel: LandscapeKernel) -> PowerBounds:
    """Power-law sandwich of the symbol inside the unit ball.

    Linear: both constants equal ``c (q + (1 - p**-n) q**2 / (1 - q))``,
    ``q = p**(n - alpha - 1)``, since the symbol is an exact power there.
    Log: upper ``E2 ||xi||**(beta - n - alpha)`` with
    ``E2 = c (p**(n+alpha-beta) + (1 - p**-n) r**2 / (1 - r))``,
    ``r = p**(alpha + n - beta)``, and lower ``E3 ||xi||**(beta - n)`` with
    ``E3 = c p**(n+alpha-beta) / (2 + p)**alpha``.
    """
    p, n = float(kernel.p), kernel.n
    if kernel.family == "synthetic":
        return PowerBounds(kernel.F, kernel.s, kernel.F, kernel.s)
    if kernel.family == "linear":
        q = p ** (n - kernel.alpha - 1.0)
        F = kernel.c * (q + (1.0 - p**-n) * q * q / (1.0 - q))
        s = kernel.alpha + 1.0 - n
        return PowerBounds(F, s, F, s)
    if kernel.family == "log":
        a, b, c = kernel.alpha, kernel.beta, kernel.c
        if b - n - a <= 0:
            raise PreconditionError("log upper bound needs beta - n - alpha > 0")
        r = p ** (a + n - b)
        E2 = c * (r + (1.0 - p**-n) * r * r / (1.0 - r))
        E3 = c * r / (2.0 + p) ** a
        return PowerBounds(E3, b - n, E2, b - n - a)
    raise PreconditionError("power bounds are only available for linear, log and synthetic kernels")
