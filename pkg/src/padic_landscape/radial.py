"""Radial functions on Q_p^n: integration, Fourier transform, convolution.

A radial function is stored by its values ``v_k = f(p**k)`` on an integer
window ``[kmin, kmax]``, a constant ``limit_at_zero`` used for every
``k < kmin``, and a declared tail for ``k > kmax``.  All series below the
window and beyond it are summed in closed form (geometric), so nothing is
silently truncated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DivergenceError

__all__ = [
    "Tail",
    "RadialFunction",
    "integrate_radial",
    "radial_fourier",
    "radial_convolve",
    "apply_generator",
    "linear_combination",
    "l1_norm",
    "indicator",
]

DEFAULT_WINDOW = (-40, 40)
_TAIL_RTOL = 1e-9


@dataclass(frozen=True)
class Tail:
    """Behaviour for ``k > kmax``: ``f(p**k) = c * p**(k*e)``; ``c == 0`` is the zero tail."""

    c: float = 0.0
    e: float = 0.0

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0)

    @classmethod
    def constant(cls, c):
        return cls(float(c), 0.0)

    @classmethod
    def power(cls, c, e):
        return cls(float(c), float(e))

    @property
    def kind(self) -> str:
        if self.c == 0.0:
            return "zero"
        return "constant" if self.e == 0.0 else "power"

    def __call__(self, p, k):
        if self.c == 0.0:
            return np.zeros_like(np.asarray(k, dtype=float))
        return self.c * np.power(float(p), np.asarray(k, dtype=float) * self.e)


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Real function of the norm, sampled on spheres ``||x|| = p**k``."""

    p: int
    n: int
    kmin: int
    values: np.ndarray
    limit_at_zero: float = 0.0
    tail: Tail = field(default_factory=Tail.zero)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ConfigurationError("radial window must be non-empty")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kmin", int(self.kmin))
        object.__setattr__(self, "limit_at_zero", float(self.limit_at_zero))
        if self.tail.c != 0.0:
            declared = self.tail(self.p, self.kmax)
            last = values[-1]
            if abs(declared - last) > _TAIL_RTOL * max(abs(declared), abs(last)):
                raise ConfigurationError(
                    f"declared tail {declared!r} disagrees with the last window value {last!r}"
                )

    @classmethod
    def from_function(cls, p, n, func, window=DEFAULT_WINDOW, limit_at_zero=None, tail=None):
        kmin, kmax = window
        ks = np.arange(kmin, kmax + 1)
        values = np.asarray(func(ks), dtype=float)
        if limit_at_zero is None:
            limit_at_zero = values[0]
        return cls(p, n, kmin, values, limit_at_zero, tail or Tail.zero())

    @property
    def kmax(self) -> int:
        return self.kmin + self.values.size - 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.kmin, self.kmax + 1)

    @property
    def window(self) -> tuple[int, int]:
        return self.kmin, self.kmax

    def __call__(self, k):
        """Value on the sphere of radius ``p**k`` (``k`` may be an array)."""
        k = np.asarray(k)
        idx = np.clip(k - self.kmin, 0, self.values.size - 1).astype(int)
        out = np.where(k < self.kmin, self.limit_at_zero, self.values[idx])
        out = np.where(k > self.kmax, self.tail(self.p, k), out)
        return out if out.ndim else float(out)

    def sphere_volumes(self, k) -> np.ndarray:
        p, n = float(self.p), self.n
        return np.power(p, n * np.asarray(k, dtype=float)) * (1.0 - p**-n)

    def _check_tail(self):
        e = self.tail.e
        if self.tail.c != 0.0 and self.n + e >= 0:
            raise DivergenceError(
                f"tail (large radii) diverges: f ~ p^({e:g} k) is not integrable in dimension {self.n}"
            )

    def mass_above(self, k) -> np.ndarray:
        """``int_{||x|| >= p**k} f``, vectorized over integer ``k``."""
        self._check_tail()
        k = np.atleast_1d(np.asarray(k, dtype=int))
        p, n = float(self.p), self.n
        weighted = self.values * self.sphere_volumes(self.ks)
        # suffix[i] = sum of weighted[i:]
        suffix = np.concatenate([np.cumsum(weighted[::-1])[::-1], [0.0]])
        tail_beyond = self._tail_mass_from(self.kmax + 1)
        out = np.empty(k.shape)
        inside = (k >= self.kmin) & (k <= self.kmax)
        out[inside] = suffix[k[inside] - self.kmin] + tail_beyond
        above = k > self.kmax
        out[above] = self._tail_mass_from(k[above])
        below = k < self.kmin
        if below.any():
            # head spheres kmin-1 .. k carry limit_at_zero
            head = self.limit_at_zero * (p ** (n * (self.kmin - 1)) - p ** (n * (k[below] - 1.0)))
            out[below] = head + suffix[0] + tail_beyond
        return out

    def _tail_mass_from(self, k):
        k = np.asarray(k, dtype=float)
        if self.tail.c == 0.0:
            return np.zeros_like(k)
        p, n, c, e = float(self.p), self.n, self.tail.c, self.tail.e
        r = p ** (n + e)
        return (1.0 - p**-n) * c * np.power(r, k) / (1.0 - r)

    def ball_mass(self, k) -> np.ndarray:
        """``int_{||x|| <= p**k} f``, vectorized; exact head sum below the window."""
        k = np.atleast_1d(np.asarray(k, dtype=int))
        p, n = float(self.p), self.n
        weighted = self.values * self.sphere_volumes(self.ks)
        head = self.limit_at_zero * p ** (n * (self.kmin - 1.0))
        prefix = head + np.cumsum(weighted)
        out = np.empty(k.shape)
        below = k < self.kmin
        out[below] = self.limit_at_zero * np.power(p, n * k[below].astype(float))
        inside = (k >= self.kmin) & (k <= self.kmax)
        out[inside] = prefix[k[inside] - self.kmin]
        above = k > self.kmax
        if above.any():
            out[above] = prefix[-1] + self._tail_partial(k[above])
        return out

    def _tail_partial(self, k):
        """``sum_{j=kmax+1}^{k}`` of the tail mass; finite even for non-integrable tails."""
        if self.tail.c == 0.0:
            return np.zeros(k.shape)
        p, n, c, e = float(self.p), self.n, self.tail.c, self.tail.e
        count = (k - self.kmax).astype(float)
        if n + e == 0:
            return (1.0 - p**-n) * c * count
        r = p ** (n + e)
        first = r ** (self.kmax + 1.0)
        return (1.0 - p**-n) * c * first * (1.0 - np.power(r, count)) / (1.0 - r)

    def extended(self, window) -> "RadialFunction":
        """Same function re-sampled on a window containing the current one."""
        kmin, kmax = window
        kmin, kmax = min(kmin, self.kmin), max(kmax, self.kmax)
        ks = np.arange(kmin, kmax + 1)
        return RadialFunction(self.p, self.n, kmin, self(ks), self.limit_at_zero, self.tail)

    def __neg__(self):
        return linear_combination(-1.0, self)

    def __add__(self, other):
        return linear_combination(1.0, self, 1.0, other)

    def __sub__(self, other):
        return linear_combination(1.0, self, -1.0, other)

    def __mul__(self, scalar):
        return linear_combination(float(scalar), self)

    __rmul__ = __mul__

    def __abs__(self):
        return RadialFunction(
            self.p, self.n, self.kmin, np.abs(self.values), abs(self.limit_at_zero),
            Tail(abs(self.tail.c), self.tail.e),
        )


def _same_space(*fs):
    p, n = fs[0].p, fs[0].n
    for f in fs[1:]:
        if (f.p, f.n) != (p, n):
            raise ConfigurationError(f"radial functions over different spaces: {(p, n)} vs {(f.p, f.n)}")
    return p, n


def _fit_tail(p, kmax, last, exponent):
    """Power tail with the given exponent matched to the value at ``kmax``."""
    if last == 0.0:
        return Tail.zero()
    return Tail.power(last * float(p) ** (-kmax * exponent), exponent)


def linear_combination(*terms) -> RadialFunction:
    """``a1*f1 + a2*f2 + ...`` given as ``(a1, f1, a2, f2, ...)``.

    Tails combine exactly when their exponents agree (or one is zero); for
    different exponents the result keeps the slower-decaying exponent matched
    at the last window point.  With any nonzero tail the window grows by one
    so that its last point already lies in every input's tail.
    """
    coeffs, funcs = terms[0::2], terms[1::2]
    p, n = _same_space(*funcs)
    kmin = min(f.kmin for f in funcs)
    kmax = max(f.kmax for f in funcs)
    live = [(a, f.tail) for a, f in zip(coeffs, funcs) if a != 0.0 and f.tail.c != 0.0]
    if live:
        # one step past every window, so the last value is pure tail
        kmax += 1
    ks = np.arange(kmin, kmax + 1)
    values = sum(a * f(ks) for a, f in zip(coeffs, funcs))
    head = sum(a * f.limit_at_zero for a, f in zip(coeffs, funcs))
    if not live:
        tail = Tail.zero()
    elif len({t.e for _, t in live}) == 1:
        e = live[0][1].e
        c = sum(a * t.c for a, t in live)
        tail = Tail.power(c, e) if c != 0.0 else Tail.zero()
        if tail.c != 0.0:
            tail = _fit_tail(p, kmax, values[-1], e)
    else:
        tail = _fit_tail(p, kmax, values[-1], max(t.e for _, t in live))
    return RadialFunction(p, n, kmin, values, head, tail)


def indicator(p: int, n: int, r: int = 0, window=None) -> RadialFunction:
    """``Omega(p**-r ||x||)``: the indicator of the ball of radius ``p**r``."""
    kmin, kmax = window or (r - 1, r + 1)
    kmin, kmax = min(kmin, r), max(kmax, r + 1)
    ks = np.arange(kmin, kmax + 1)
    return RadialFunction(p, n, kmin, (ks <= r).astype(float), 1.0, Tail.zero())


def integrate_radial(f: RadialFunction) -> float:
    """``int f(||x||) d^n x = (1 - p**-n) sum_k p**(nk) f(p**k)``.

    The head (constant ``limit_at_zero`` on the ball of radius ``p**(kmin-1)``)
    and a power tail are summed in closed form.

    Raises
    ------
    DivergenceError
        If the tail is not integrable.
    """
    return float(f.ball_mass(f.kmax)[0] + f.mass_above(f.kmax + 1)[0])


def l1_norm(f: RadialFunction) -> float:
    return integrate_radial(abs(f))


def radial_fourier(f: RadialFunction, extension=None) -> RadialFunction:
    """Fourier transform of an integrable radial function.

    Uses ``(Ff)(p**m) = int_{||x|| <= p**-m} f - p**(-nm) f(p**(1-m))``.
    The output window is ``[-kmax - extension, 1 - kmin]``; beyond its upper
    end the transform vanishes exactly, and its value as ``||xi|| -> 0`` is
    ``int f``.  For a zero tail no extension is needed; for a power tail the
    window is extended until the remaining deviation from ``int f`` is below
    double precision.
    """
    total = integrate_radial(f)
    p, n = float(f.p), f.n
    if extension is None:
        extension = 0
        if f.tail.c != 0.0:
            # deviation at m = -kmax - ext is ~ |c| p**((kmax + ext) (n + e))
            rate = -(n + f.tail.e) * np.log(p)
            scale = abs(f.tail.c) * p ** (f.kmax * f.tail.e) * p ** (n * f.kmax)
            need = np.log(max(scale, 1e-300) / (1e-18 * max(abs(total), 1e-300))) / rate
            extension = int(min(max(np.ceil(need), 1), 4000))
    mlo, mhi = -f.kmax - extension, 1 - f.kmin
    ms = np.arange(mlo, mhi + 1)
    values = f.ball_mass(-ms) - np.power(p, -n * ms.astype(float)) * f(1 - ms)
    return RadialFunction(f.p, f.n, mlo, values, total, Tail.zero())


def radial_convolve(f: RadialFunction, g: RadialFunction) -> RadialFunction:
    """Exact convolution of two radial functions by summing over sphere pairs.

    For ``||x|| = p**k`` the ultrametric law gives::

        (f*g)(p**k) = f_k G(<k) + g_k F(<k) + f_k g_k p**(nk) (1 - 2 p**-n)
                      + sum_{j>k} f_j g_j vol_j

    where ``F(<k)`` is the mass of ``f`` on the open ball of radius ``p**k``.
    The output is exactly constant below the common window and is evaluated
    one step beyond it.  Its tail is exact when at most one input has a
    nonzero tail; otherwise it is the slower power matched at the last point.
    """
    p, n = _same_space(f, g)
    kmin = min(f.kmin, g.kmin)
    kmax = max(f.kmax, g.kmax) + 1
    ks = np.arange(kmin, kmax + 1)
    fk, gk = f(ks), g(ks)
    pf = float(p)
    vol = np.power(pf, n * ks.astype(float)) * (1.0 - pf**-n)
    f_below = f.ball_mass(ks - 1)
    g_below = g.ball_mass(ks - 1)
    beyond = _product_tail_mass(f, g, kmax + 1)
    weighted = fk * gk * vol
    upper = np.concatenate([np.cumsum(weighted[::-1])[::-1][1:], [0.0]]) + beyond
    same_sphere = fk * gk * np.power(pf, n * ks.astype(float)) * (1.0 - 2.0 * pf**-n)
    values = fk * g_below + gk * f_below + same_sphere + upper
    head = f.limit_at_zero * g.limit_at_zero * pf ** (n * (kmin - 1.0)) + weighted.sum() + beyond

    if f.tail.c == 0.0 and g.tail.c == 0.0:
        tail = Tail.zero()
    elif g.tail.c == 0.0:
        tail = _fit_tail(p, kmax, values[-1], f.tail.e)
    elif f.tail.c == 0.0:
        tail = _fit_tail(p, kmax, values[-1], g.tail.e)
    else:
        tail = _fit_tail(p, kmax, values[-1], max(f.tail.e, g.tail.e))
    return RadialFunction(p, n, kmin, values, head, tail)


def _product_tail_mass(f, g, k0):
    """``sum_{j >= k0} f_j g_j vol_j`` where both are in their tail regime."""
    if f.tail.c == 0.0 or g.tail.c == 0.0:
        return 0.0
    p, n = float(f.p), f.n
    e = f.tail.e + g.tail.e
    if n + e >= 0:
        raise DivergenceError("tail (large radii) of the product diverges; convolution undefined")
    r = p ** (n + e)
    return (1.0 - p**-n) * f.tail.c * g.tail.c * r**k0 / (1.0 - r)


def apply_generator(kernel, f: RadialFunction, window=None) -> RadialFunction:
    """Nonlocal generator ``A f = J * f - f``.

    ``kernel`` is a :class:`~padic_landscape.kernels.LandscapeKernel` (or a
    radial density table).  It is tabulated on a window covering ``f``.
    """
    if isinstance(kernel, RadialFunction):
        table = kernel
    else:
        lo, hi = window or DEFAULT_WINDOW
        table = kernel.as_radial((min(lo, f.kmin), max(hi, f.kmax)))
    return linear_combination(1.0, radial_convolve(table, f), -1.0, f)
