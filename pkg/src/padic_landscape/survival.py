"""Survival in the unit ball, its incomplete-gamma bounds, and first passage.

Started uniformly in ``Z_p^n``, the process is still in ``Z_p^n`` at time
``t`` with probability::

    S(t) = (1 - p**-n) sum_{j>=0} p**(-nj) exp(-t psi(p**-j))

When ``psi(xi)`` is squeezed between powers of ``||xi||``, comparing the sum with
an integral gives bounds of the form ``K / (tX)**(n/s) * gamma(n/s, tX)``.

The exit density ``g`` (rate of jumps back into ``Z_p^n`` at time ``t``) and
the first-return density ``f`` satisfy the renewal equation ``g = f + g*f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import PreconditionError
from .evolution import _rho, _series_length
from .kernels import LandscapeKernel, classify_recurrence, jump_radius_weights, power_bounds

__all__ = [
    "SurvivalReport",
    "FirstPassageDensity",
    "ReturnProbability",
    "survival_series",
    "lower_incomplete_gamma",
    "survival_bounds",
    "rigorous_lower",
    "survival_report",
    "g_density",
    "volterra_solve",
    "first_passage_density",
    "return_probability",
]


def survival_series(kernel: LandscapeKernel, t):
    """``S(t)``; vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise PreconditionError("t must be >= 0")
    p, n = float(kernel.p), kernel.n
    nterms = _series_length(kernel.p, n)
    j = np.arange(nterms)
    psi = np.asarray(kernel.psi(-j), dtype=float)
    terms = np.exp(-np.multiply.outer(t, psi)) @ np.power(p, -n * j.astype(float))
    # j >= nterms: psi -> 0 near the origin, so exp(-t psi) is 1 up to the cut
    out = (1.0 - p**-n) * terms + p ** (-n * nterms)
    return float(out) if out.ndim == 0 else out


_EPS = 1e-16
_TINY = 1e-300


def lower_incomplete_gamma(s: float, x: float) -> float:
    """``gamma(s, x) = int_0^x z**(s-1) exp(-z) dz``.

    Power series for ``x <= s + 1``, otherwise ``Gamma(s)`` minus the upper
    function from its continued fraction (modified Lentz).
    """
    if not s > 0:
        raise PreconditionError(f"gamma(s, x) needs s > 0, got s={s}")
    if not x >= 0:
        raise PreconditionError(f"gamma(s, x) needs x >= 0, got x={x}")
    if x == 0:
        return 0.0
    log_pref = s * math.log(x) - x
    if x <= s + 1.0:
        term = 1.0 / s
        total = term
        a = s
        for _ in range(10_000):
            a += 1.0
            term *= x / a
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return math.exp(log_pref) * total
    # upper gamma: exp(-x) x**s / (x + 1 - s - 1(1-s)/(x + 3 - s - ...))
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        d = _TINY if abs(d) < _TINY else d
        c = b + an / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.gamma(s) - math.exp(log_pref) * h


@dataclass(frozen=True)
class SurvivalReport:
    """Survival values with their power-law bounds on a grid of times."""

    t: np.ndarray
    S: np.ndarray
    stated_lower: np.ndarray
    corrected_lower: np.ndarray
    upper: np.ndarray
    rigorous_lower: np.ndarray
    constants: dict = field(default_factory=dict)

    def stated_lower_failures(self):
        """Times where the uncorrected lower bound exceeds ``S``."""
        return self.t[self.stated_lower > self.S]

    def sandwich_holds(self, lower="corrected", rtol=1e-12) -> bool:
        """``lower <= S <= upper`` at every ``t > 0``; ``lower`` names the field to use."""
        pos = self.t > 0
        S = self.S[pos]
        low = getattr(self, f"{lower}_lower")[pos]
        return bool(np.all(low <= S * (1 + rtol)) and np.all(S <= self.upper[pos] * (1 + rtol)))


def _bound_constants(kernel: LandscapeKernel) -> dict:
    p, n = float(kernel.p), kernel.n
    pb = power_bounds(kernel)
    if kernel.family == "log":
        if classify_recurrence(kernel) != "recurrent":
            raise PreconditionError("log-type bounds need beta - alpha - 2n >= 0")
        return {
            "E2": pb.upper_c,
            "E3": pb.lower_c,
            "A4": (p**n - 1.0) / (pb.lower_e * math.log(p)),
            "B4": (p**n - 1.0) / (pb.upper_e * math.log(p)),
            # upper bound on S from the lower bound on psi and vice versa
            "_upper": (pb.lower_c, pb.lower_e),
            "_lower": (pb.upper_c, pb.upper_e),
        }
    if kernel.family not in ("linear", "synthetic"):
        raise PreconditionError("survival bounds need a linear, log or synthetic kernel")
    if classify_recurrence(kernel) != "recurrent":
        raise PreconditionError("linear-type bounds need alpha + 1 - 2n >= 0")
    s = pb.lower_e
    A3 = (p**n - 1.0) / (s * math.log(p))
    return {"A1": pb.lower_c, "C2": pb.upper_c, "A3": A3, "B3": A3, "_upper": (pb.lower_c, s), "_lower": (pb.upper_c, s)}


def _gamma_bound(K, X, s, n, t):
    a = n / s
    tx = t * X
    return K / tx**a * lower_incomplete_gamma(a, tx)


def survival_bounds(kernel: LandscapeKernel, t: float):
    """``(stated_lower, corrected_lower, upper)`` at ``t > 0``.

    ``corrected_lower`` is ``stated_lower / p**n``.  Comparing each term of
    the series with the integral over the neighbouring unit interval proves
    ``upper`` and ``stated_lower / p**(2n)`` (see :func:`rigorous_lower`);
    ``corrected_lower`` is the large-time mean of ``S``, around which ``S``
    oscillates log-periodically, so it may be crossed slightly at large ``t``.
    """
    if not t > 0:
        raise PreconditionError(f"bounds are stated for t > 0, got {t}")
    const = _bound_constants(kernel)
    n = kernel.n
    Xu, su = const["_upper"]
    Xl, sl = const["_lower"]
    Ku = const.get("A3", const.get("A4"))
    Kl = const.get("B3", const.get("B4"))
    upper = _gamma_bound(Ku, Xu, su, n, t)
    stated = _gamma_bound(Kl, Xl, sl, n, t)
    return stated, stated / float(kernel.p) ** n, upper


def rigorous_lower(kernel: LandscapeKernel, t: float) -> float:
    """``stated_lower / p**(2n)``, a lower bound on ``S(t)`` with a complete proof."""
    return survival_bounds(kernel, t)[0] / float(kernel.p) ** (2 * kernel.n)


def survival_report(kernel: LandscapeKernel, ts) -> SurvivalReport:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    S = np.atleast_1d(survival_series(kernel, ts))
    rows = np.array([survival_bounds(kernel, t) if t > 0 else (np.inf, np.inf, np.inf) for t in ts]).reshape(-1, 3)
    const = {k: v for k, v in _bound_constants(kernel).items() if not k.startswith("_")}
    rigorous = rows[:, 0] / float(kernel.p) ** (2 * kernel.n)
    return SurvivalReport(ts, S, rows[:, 0], rows[:, 1], rows[:, 2], rigorous, const)


def g_density(kernel: LandscapeKernel, t):
    """Exit density ``g(t) = int_{||y|| >= p} J(||y||) u(y, t) dy`` with ``u(., 0) = 1_{Z_p^n}``.

    Outside the unit ball ``u(., t)`` equals the heat-kernel density, so
    ``g(t) = sum_{k>=1} w_k rho_t(p**k)`` with the jump weights ``w_k``.
    Vectorized over ``t``.
    """
    if not kernel.density_backed:
        raise PreconditionError("g(t) needs a density-backed kernel")
    t = np.asarray(t, dtype=float)
    jw = jump_radius_weights(kernel)
    p, n = float(kernel.p), kernel.n
    # rho_t(p**k) <= p**(-nk): stop once the neglected part is negligible
    k = np.arange(1, jw.jmax + 1)
    bound = jw.tail_mass[k] * np.power(p, -n * k.astype(float))
    K = int(np.argmax(bound < 1e-20)) + 1 if np.any(bound < 1e-20) else jw.jmax
    k = k[:K]
    w = jw.weights[:K]
    flat = np.atleast_1d(t)
    out = np.zeros(flat.shape)
    pos = flat > 0
    if pos.any() and np.any(w > 0):
        out[pos] = _rho(kernel, flat[pos], k) @ w
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def volterra_solve(g, h: float) -> np.ndarray:
    """Solve ``g(t) = f(t) + int_0^t g(t - s) f(s) ds`` for ``f`` on ``t_i = i h``.

    Trapezoidal rule, forward substitution; second order in ``h``.
    """
    if not h > 0:
        raise PreconditionError(f"step must be positive, got {h}")
    g = np.asarray(g, dtype=float)
    N = g.size
    f = np.empty(N)
    if N == 0:
        return f
    f[0] = g[0]
    denom = 1.0 + 0.5 * h * g[0]
    for i in range(1, N):
        # interior nodes k = 1..i-1 pair g[i-k] with f[k]
        conv = 0.5 * g[i] * f[0] + np.dot(g[i - 1:0:-1], f[1:i])
        f[i] = (g[i] - h * conv) / denom
    return f


@dataclass(frozen=True, eq=False)
class FirstPassageDensity:
    h: float
    g: np.ndarray
    f: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(self.f.size)

    def cdf(self) -> np.ndarray:
        """``int_0^t f`` at each grid time (trapezoid)."""
        inc = 0.5 * self.h * (self.f[1:] + self.f[:-1])
        return np.concatenate([[0.0], np.cumsum(inc)])

    def residual(self) -> float:
        """Sup-norm of ``g - f - g*f`` with the same quadrature."""
        g, f, h = self.g, self.f, self.h
        r = np.empty(g.size)
        for i in range(g.size):
            conv = 0.0
            if i:
                conv = h * (0.5 * g[i] * f[0] + 0.5 * g[0] * f[i] + np.dot(g[i - 1:0:-1], f[1:i]))
            r[i] = g[i] - f[i] - conv
        return float(np.max(np.abs(r)))


def first_passage_density(kernel: LandscapeKernel, tmax: float, h: float) -> FirstPassageDensity:
    """``g`` on ``[0, tmax]`` and the first-return density ``f`` from it."""
    N = int(round(tmax / h)) + 1
    ts = h * np.arange(N)
    g = g_density(kernel, ts)
    return FirstPassageDensity(h, g, volterra_solve(g, h))


@dataclass(frozen=True)
class ReturnProbability:
    """``1 - 1/(1 + G(T))`` with ``G(T) = int_0^T g``, plus its trace over ``T``."""

    value: float
    horizons: np.ndarray
    G: np.ndarray
    trace: np.ndarray


def return_probability(kernel: LandscapeKernel, tmax: float) -> ReturnProbability:
    """Finite-horizon estimate of the return probability.

    ``G`` is integrated by adaptive quadrature over ``[0, 1], [1, 2], [2, 4], ...``
    up to ``tmax``; the trace records the estimate at each segment end.
    """
    if not tmax > 0:
        raise PreconditionError(f"horizon must be positive, got {tmax}")
    edges = [0.0, min(1.0, tmax)]
    while edges[-1] < tmax:
        edges.append(min(2.0 * edges[-1], tmax))
    G = [0.0]
    for a, b in zip(edges[:-1], edges[1:]):
        part, _ = integrate.quad(lambda s: g_density(kernel, s), a, b, epsabs=1e-13, epsrel=1e-11, limit=200)
        G.append(G[-1] + part)
    G = np.array(G[1:])
    trace = 1.0 - 1.0 / (1.0 + G)
    return ReturnProbability(float(trace[-1]), np.array(edges[1:]), G, trace)
