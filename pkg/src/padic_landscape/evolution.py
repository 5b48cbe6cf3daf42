"""Heat kernel ``Z_t`` of ``du/dt = J*u - u`` and radial Cauchy solutions.

``Z_t`` is the inverse Fourier transform of ``exp(-t psi)``.  Because ``psi``
tends to 1 at infinity for a probability density ``J``, ``Z_t`` carries a
point mass ``exp(-t)`` at the origin; the rest is a radial density
``rho_t`` given on the sphere ``||x|| = p**k`` by::

    rho_t(p**k) = p**(-nk) (1 - p**-n) sum_{i>=0} p**(-ni)
                  [exp(-t psi(p**(-i-k))) - exp(-t psi(p**(1-k)))]
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import NonMonotoneSymbolError, PreconditionError
from .kernels import LandscapeKernel, check_symbol_monotone
from .radial import (
    DEFAULT_WINDOW,
    RadialFunction,
    Tail,
    integrate_radial,
    l1_norm,
    linear_combination,
    radial_convolve,
    radial_fourier,
)

__all__ = [
    "HeatKernelRepr",
    "RadialSolution",
    "ComparisonReport",
    "heat_kernel",
    "heat_kernel_density",
    "compound_poisson_oracle",
    "fourier_of_Z",
    "compose",
    "solve_radial",
    "solve_by_convolution",
    "comparison_check",
]

# geometric series are cut once p**(-n i) drops below this
_SERIES_EPS = 1e-18


def _series_length(p: int, n: int) -> int:
    return int(math.ceil(-math.log(_SERIES_EPS) / (n * math.log(p)))) + 1


def _require_monotone(kernel, window=DEFAULT_WINDOW):
    report = check_symbol_monotone(kernel, window)
    if not report.passed:
        raise NonMonotoneSymbolError(
            f"symbol decreases at m={report.witness[0]}: {report.witness[1]!r} > {report.witness[2]!r}",
            witness=report.witness,
        )


def atom_mass(kernel: LandscapeKernel, t: float) -> float:
    """Mass of the point mass at 0: ``exp(-t psi(infinity))``."""
    return math.exp(-t * kernel.psi_at_infinity) if t > 0 else 1.0


def _rho(kernel: LandscapeKernel, t, k) -> np.ndarray:
    """``rho_t(p**k)`` on the outer product of ``t`` and ``k`` (shape ``(len t, len k)``)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=int))
    p, n = float(kernel.p), kernel.n
    # the weight p**(-n(k+i)) only becomes small once i > -k, so the cut moves with kmin
    nterms = _series_length(kernel.p, n) + max(0, -int(k.min()))
    i = np.arange(nterms)
    # every symbol argument needed is p**m with m in [-(kmax + nterms - 1), 1 - kmin]
    mlo, mhi = -(int(k.max()) + nterms - 1), 1 - int(k.min())
    psi = np.asarray(kernel.psi(np.arange(mlo, mhi + 1)), dtype=float)
    ma = -(k[:, None] + i[None, :])  # (K, I)
    mb = 1 - k  # (K,)
    psi_a = psi[ma - mlo]
    psi_b = psi[mb - mlo]
    gap = kernel.psi_increment(ma, mb[:, None])
    tt = t[:, None, None]
    bracket = -np.exp(-tt * psi_a) * np.expm1(-tt * gap)
    weights = np.power(p, -n * i.astype(float))
    s = bracket @ weights
    # remainder i >= nterms: psi_a -> 0, so the bracket tends to 1 - exp(-t psi_b)
    s += p ** (-n * nterms) / (1.0 - p**-n) * -np.expm1(-t[:, None] * psi_b)
    return np.power(p, -n * k.astype(float)) * (1.0 - p**-n) * s


def heat_kernel_density(kernel: LandscapeKernel, t: float, k):
    """Density of ``Z_t`` on the sphere ``||x|| = p**k`` (atom excluded).

    Raises
    ------
    NonMonotoneSymbolError
        If ``psi`` is not non-decreasing; positivity is not guaranteed then.
    """
    if t < 0:
        raise PreconditionError(f"t must be >= 0, got {t}")
    _require_monotone(kernel)
    scalar = np.ndim(k) == 0
    if t == 0:
        out = np.zeros(np.shape(k))
    else:
        out = _rho(kernel, t, k)[0]
    return float(out[0]) if scalar else out


def _fitted_tail(p, n, kmax, values):
    """Power tail through the last two values, or zero if that power is not integrable."""
    last, prev = values[-1], values[-2]
    if last <= 0 or prev <= 0:
        return Tail.zero()
    e = math.log(last / prev) / math.log(p)
    if n + e >= 0:
        return Tail.zero()
    return Tail.power(last * float(p) ** (-kmax * e), e)


@dataclass(frozen=True, eq=False)
class HeatKernelRepr:
    """``Z_t = atom_mass * delta_0 + density``."""

    t: float
    atom_mass: float
    density: RadialFunction

    def mass(self) -> float:
        return self.atom_mass + integrate_radial(self.density)

    def ball_mass(self, k: int = 0) -> float:
        """Mass of ``Z_t`` on the closed ball of radius ``p**k``."""
        return self.atom_mass + float(self.density.ball_mass(k)[0])

    def fourier(self, m):
        """``(F Z_t)(p**m)`` from the representation (atom plus transformed density)."""
        return self.atom_mass + radial_fourier(self.density)(m)


def heat_kernel(kernel: LandscapeKernel, t: float, window=DEFAULT_WINDOW) -> HeatKernelRepr:
    """Tabulate ``Z_t`` on ``window``.

    Below the window the density is held at its value at ``kmin``.  Beyond
    ``kmax`` it continues as the power law through its last two values.
    """
    if t < 0:
        raise PreconditionError(f"t must be >= 0, got {t}")
    _require_monotone(kernel)
    kmin, kmax = window
    ks = np.arange(kmin, kmax + 1)
    if t == 0:
        density = RadialFunction(kernel.p, kernel.n, kmin, np.zeros(ks.size))
        return HeatKernelRepr(0.0, 1.0, density)
    values = _rho(kernel, t, ks)[0]
    tail = _fitted_tail(kernel.p, kernel.n, kmax, values)
    density = RadialFunction(kernel.p, kernel.n, kmin, values, float(values[0]), tail)
    return HeatKernelRepr(float(t), atom_mass(kernel, t), density)


def compound_poisson_oracle(kernel: LandscapeKernel, t: float, window=DEFAULT_WINDOW, tol=1e-12) -> HeatKernelRepr:
    """``Z_t = exp(-t) sum_m t**m / m! J^{*m}`` by repeated exact convolution.

    The series stops at the first ``m*`` whose Poisson tail is below ``tol``.
    """
    if not kernel.density_backed:
        raise PreconditionError("compound Poisson expansion needs a density-backed kernel")
    table = kernel.as_radial(window)
    kmin, kmax = window
    if t == 0:
        return HeatKernelRepr(0.0, 1.0, RadialFunction(kernel.p, kernel.n, kmin, np.zeros(kmax - kmin + 1)))
    mstar = 1
    while stats.poisson.sf(mstar, t) >= tol:
        mstar += 1
    power = table
    weight = math.exp(-t) * t
    acc = power * weight
    for m in range(2, mstar + 1):
        power = radial_convolve(power, table)
        weight *= t / m
        acc = linear_combination(1.0, acc, weight, power)
    return HeatKernelRepr(float(t), math.exp(-t), acc)


def fourier_of_Z(kernel: LandscapeKernel, t: float, m):
    """``exp(-t psi(p**m))``; ``m = -inf`` stands for ``xi = 0``."""
    if np.isscalar(m) and m == -math.inf:
        return 1.0
    out = np.exp(-t * np.asarray(kernel.psi(m), dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def compose(a: HeatKernelRepr, b: HeatKernelRepr) -> HeatKernelRepr:
    """Convolution of two atom-plus-density distributions."""
    density = linear_combination(
        a.atom_mass, b.density,
        b.atom_mass, a.density,
        1.0, radial_convolve(a.density, b.density),
    )
    return HeatKernelRepr(a.t + b.t, a.atom_mass * b.atom_mass, density)


@dataclass(frozen=True, eq=False)
class RadialSolution:
    t: float
    u: RadialFunction
    provenance: str  # "series_formula" or "convolution"

    def mass(self) -> float:
        return integrate_radial(self.u)


def spectral_radius(u0: RadialFunction, rtol=1e-12):
    """Smallest ``M`` with ``(F u0)(p**m) = 0`` for all ``m > M`` (None if ``F u0 = 0``)."""
    spectrum = radial_fourier(u0)
    scale = max(np.max(np.abs(spectrum.values)), abs(spectrum.limit_at_zero), 1e-300)
    nz = np.nonzero(np.abs(spectrum.values) > rtol * scale)[0]
    if nz.size == 0:
        return None if spectrum.limit_at_zero == 0 else spectrum.kmin
    return int(spectrum.ks[nz[-1]])


def solve_radial(kernel: LandscapeKernel, t: float, u0: RadialFunction, M=None, window=None) -> RadialSolution:
    """Solve ``du/dt = J*u - u`` for radial data whose spectrum lives in ``B_M``.

    With ``h = exp(-t psi) F u0`` supported in ``||xi|| <= p**M``:

    * ``||x|| <= p**-M``:  ``u = int_{B_M} h`` (constant);
    * ``||x|| = p**k`` otherwise:
      ``u = p**(-nk) (1 - p**-n) sum_{i>=0} p**(-ni) [h(p**(-k-i)) - h(p**(1-k))]``,
      which covers both the boundary sphere ``k = 1 - M`` and ``k >= 2 - M``.

    Raises
    ------
    PreconditionError
        If ``F u0`` does not vanish outside ``B_M``.
    """
    if t < 0:
        raise PreconditionError(f"t must be >= 0, got {t}")
    if u0.p != kernel.p or u0.n != kernel.n:
        raise PreconditionError("initial data and kernel live on different spaces")
    _require_monotone(kernel)
    if t == 0:
        lo, hi = window or u0.window
        return RadialSolution(0.0, u0.extended((min(lo, u0.kmin), max(hi, u0.kmax))), "series_formula")
    found = spectral_radius(u0)
    if M is None:
        M = 0 if found is None else found
    elif found is not None and found > M:
        raise PreconditionError(f"F u0 does not vanish outside B_{M} (nonzero at radius p**{found})")
    spectrum = radial_fourier(u0)
    p, n = float(kernel.p), kernel.n
    if window is None:
        window = (min(u0.kmin, -M) - 1, max(u0.kmax, 1 - M) + DEFAULT_WINDOW[1])
    kmin, kmax = window
    nterms = _series_length(kernel.p, n) + max(0, M - 1)  # outer spheres start at k = 1 - M

    # spectrum h(p**m) tabulated on m in [mlo, M]; below mlo it equals its head value
    mlo = min(-kmax - nterms, spectrum.kmin - 1)
    ms = np.arange(mlo, M + 1)
    psi = np.asarray(kernel.psi(ms), dtype=float)
    damp = np.exp(-t * psi)
    Fu = np.asarray(spectrum(ms), dtype=float)

    def idx(m):
        return m - mlo

    ks = np.arange(kmin, kmax + 1)
    values = np.empty(ks.size)
    inner = ks <= -M
    if inner.any():
        js = np.arange(-M, -mlo + 1)  # radii p**-j inside B_M
        h = damp[idx(-js)] * Fu[idx(-js)]
        total = (1.0 - p**-n) * np.sum(np.power(p, -n * js.astype(float)) * h)
        total += p ** (-n * (-mlo + 1)) * spectrum.limit_at_zero  # far head: damp -> 1
        values[inner] = total
    outer = ~inner
    if outer.any():
        k = ks[outer]
        i = np.arange(nterms)
        a = -(k[:, None] + i[None, :])  # m index of h(p**(-k-i))
        b = (1 - k)[:, None]
        ea, eb = damp[idx(a)], damp[idx(b)]
        Fa, Fb = Fu[idx(a)], Fu[idx(b)]
        gap = kernel.psi_increment(a, b)
        diff = ea * (Fa - Fb) + Fb * (-ea * np.expm1(-t * gap))
        s = diff @ np.power(p, -n * i.astype(float))
        # remainder: h(p**(-k-i)) -> F u0 head, exp factor -> 1
        s += p ** (-n * nterms) / (1.0 - p**-n) * (spectrum.limit_at_zero - Fb[:, 0] * eb[:, 0])
        values[outer] = np.power(p, -n * k.astype(float)) * (1.0 - p**-n) * s
    u = RadialFunction(kernel.p, n, kmin, values, float(values[0]), _fitted_tail(kernel.p, n, kmax, values))
    return RadialSolution(float(t), u, "series_formula")


def solve_by_convolution(kernel: LandscapeKernel, t: float, u0: RadialFunction, window=DEFAULT_WINDOW) -> RadialSolution:
    """``u = Z_t * u0`` with ``Z_t`` from :func:`heat_kernel`."""
    z = heat_kernel(kernel, t, (min(window[0], u0.kmin), max(window[1], u0.kmax)))
    u = linear_combination(z.atom_mass, u0, 1.0, radial_convolve(z.density, u0))
    return RadialSolution(float(t), u, "convolution")


@dataclass(frozen=True)
class ComparisonReport:
    ordered: bool
    min_gap: float  # min over the grid of u - v
    contraction: bool
    l1_initial: float
    l1_final: float

    @property
    def passed(self) -> bool:
        return self.ordered and self.contraction


def comparison_check(kernel, t, u0, v0, atol=1e-12) -> ComparisonReport:
    """Evolve ``u0 >= v0`` and check ordering and L1 contraction of the difference."""
    M = max(m for m in (spectral_radius(u0), spectral_radius(v0), 0) if m is not None)
    window = (min(u0.kmin, v0.kmin, -M) - 1, max(u0.kmax, v0.kmax, 1 - M) + DEFAULT_WINDOW[1])
    u = solve_radial(kernel, t, u0, M, window).u
    v = solve_radial(kernel, t, v0, M, window).u
    gap = u.values - v.values
    scale = max(np.max(np.abs(u.values)), np.max(np.abs(v.values)), 1.0)
    before = l1_norm(linear_combination(1.0, u0, -1.0, v0))
    after = l1_norm(linear_combination(1.0, u, -1.0, v))
    return ComparisonReport(
        ordered=bool(np.all(gap >= -atol * scale)),
        min_gap=float(gap.min()),
        contraction=after <= before * (1 + 1e-10) + atol,
        l1_initial=before,
        l1_final=after,
    )
