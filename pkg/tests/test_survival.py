import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from padic_landscape.errors import PreconditionError
from padic_landscape.evolution import heat_kernel, solve_radial
from padic_landscape.kernels import custom_table, regularized_linear, regularized_log, synthetic_power_symbol
from padic_landscape.radial import RadialFunction, indicator
from padic_landscape.survival import (
    first_passage_density,
    g_density,
    lower_incomplete_gamma,
    return_probability,
    rigorous_lower,
    survival_bounds,
    survival_report,
    survival_series,
    volterra_solve,
)

SYN = synthetic_power_symbol(2, 1, 1.0, 1.0)
FLAG = regularized_linear(2, 1, 2)
LOG = regularized_log(2, 1, 1.0, 4.0)
GRID = [0.25, 0.5, 1.0, 2.0, 5.0, 10.0]
# S(1) for psi(p**-j) = 2**-j, p = 2, n = 1; recomputed below with mpmath
S1_ANCHOR = 0.5480427915295705


def _mp_survival(p, n, psi, t):
    mpmath.mp.dps = 40
    q = mpmath.mpf(p) ** -n
    return float((1 - q) * mpmath.nsum(lambda j: q**j * mpmath.exp(-t * psi(j)), [0, mpmath.inf]))


def test_survival_at_zero_is_one():
    for k in (SYN, FLAG, LOG, regularized_linear(3, 2, 4.0)):
        assert survival_series(k, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_synthetic_anchor():
    oracle = _mp_survival(2, 1, lambda j: mpmath.mpf(2) ** -j, 1)
    assert oracle == pytest.approx(S1_ANCHOR, abs=1e-15)
    assert survival_series(SYN, 1.0) == pytest.approx(oracle, abs=1e-10)


def test_flagship_series_matches_mpmath():
    # linear p=2, n=1, alpha=2: psi(2**-j) = F 2**(-2j) with F = 1/4
    for t in (0.3, 3.0, 30.0):
        oracle = _mp_survival(2, 1, lambda j: mpmath.mpf(1) / 4 * mpmath.mpf(4) ** -j, t)
        assert survival_series(FLAG, t) == pytest.approx(oracle, rel=1e-12)


def test_survival_vectorized_and_decreasing():
    ts = np.linspace(0, 50, 101)
    S = survival_series(LOG, ts)
    assert S.shape == ts.shape
    assert np.all(np.diff(S) < 0)
    assert np.all((S > 0) & (S <= 1))
    assert S[7] == pytest.approx(survival_series(LOG, ts[7]), rel=1e-15)


def test_negative_time_rejected():
    with pytest.raises(PreconditionError):
        survival_series(FLAG, -1.0)


def test_power_law_asymptote():
    p, n, s = 2, 1, 1.0
    t = 1000.0
    limit = (1 - p**-n) * math.gamma(n / s) / (s * math.log(p))
    assert survival_series(SYN, t) * t ** (n / s) == pytest.approx(limit, rel=1e-4)


def test_heat_kernel_ball_mass_is_survival():
    for k in (FLAG, LOG):
        for t in (0.25, 1.0, 5.0):
            assert heat_kernel(k, t).ball_mass(0) == pytest.approx(survival_series(k, t), abs=1e-10)


@pytest.mark.parametrize("kernel", [SYN, FLAG, LOG, regularized_linear(3, 1, 3.0)])
def test_sandwich_on_grid(kernel):
    rep = survival_report(kernel, GRID)
    assert rep.sandwich_holds("corrected")
    assert rep.sandwich_holds("rigorous")


def test_stated_lower_fails_at_one():
    # the uncorrected constant is too large by p**n; the failure is expected
    stated, corrected, upper = survival_bounds(SYN, 1.0)
    S = survival_series(SYN, 1.0)
    assert stated > S
    assert corrected <= S <= upper
    assert 1.0 in survival_report(SYN, GRID).stated_lower_failures()


def test_corrected_lower_is_the_mean_not_a_bound():
    # S oscillates log-periodically around the corrected bound at large t
    ts = np.linspace(17.0, 19.0, 401)
    rep = survival_report(SYN, ts)
    ratio = rep.S / rep.corrected_lower
    assert ratio.min() < 1.0 < ratio.max()
    assert ratio.min() > 0.9999
    assert survival_report(FLAG, np.linspace(30, 50, 401)).sandwich_holds("corrected") is False


@pytest.mark.parametrize("kernel", [SYN, FLAG, LOG])
def test_rigorous_bounds_dense(kernel):
    ts = np.geomspace(1e-3, 1e5, 600)
    rep = survival_report(kernel, ts)
    assert np.all(rep.rigorous_lower <= rep.S * (1 + 1e-12))
    assert np.all(rep.S <= rep.upper * (1 + 1e-12))
    assert rigorous_lower(kernel, 2.0) == pytest.approx(survival_bounds(kernel, 2.0)[0] / float(kernel.p) ** (2 * kernel.n))


def test_bounds_preconditions():
    with pytest.raises(PreconditionError):
        survival_bounds(FLAG, 0.0)
    with pytest.raises(PreconditionError):
        survival_bounds(regularized_linear(2, 1, 0.5), 1.0)  # transient
    with pytest.raises(PreconditionError):
        survival_bounds(regularized_log(2, 1, 1.0, 2.5), 1.0)
    table = custom_table(RadialFunction(2, 1, 0, [1.0, 0.5, 0.25], 1.0))
    with pytest.raises(PreconditionError):
        survival_bounds(table, 1.0)


def test_bound_constants_flagship():
    rep = survival_report(FLAG, [1.0])
    assert rep.constants["A1"] == pytest.approx(0.25, abs=1e-15)
    assert rep.constants["C2"] == pytest.approx(0.25, abs=1e-15)
    assert rep.constants["A3"] == pytest.approx(1 / (2 * math.log(2)), rel=1e-15)


# incomplete gamma


def _quad_gamma(s, x):
    # weight (z - 0)**(s-1) handled analytically by QUADPACK
    val, _ = integrate.quad(lambda z: math.exp(-z), 0.0, x, weight="alg", wvar=(s - 1.0, 0.0), epsabs=0, epsrel=1e-13, limit=200)
    return val


def test_gamma_against_quadrature_grid():
    ss = np.linspace(0.1, 6.0, 10)
    xs = np.concatenate([np.linspace(0.01, 2.0, 5), np.linspace(4.0, 40.0, 5)])
    worst = 0.0
    for s in ss:
        for x in xs:
            ref = _quad_gamma(s, x)
            got = lower_incomplete_gamma(s, x)
            worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
    assert worst < 1e-12


def test_gamma_against_scipy():
    for s in (0.3, 1.0, 2.5, 7.0):
        for x in (1e-6, 0.5, 3.0, 12.0, 80.0):
            assert lower_incomplete_gamma(s, x) == pytest.approx(special.gammainc(s, x) * special.gamma(s), rel=1e-12)


def test_gamma_special_values():
    assert lower_incomplete_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert lower_incomplete_gamma(2.0, 0.0) == 0.0
    assert lower_incomplete_gamma(0.5, 700 * 0.5) == pytest.approx(math.gamma(0.5), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 8.0), st.floats(0.0, 50.0), st.floats(0.0, 5.0))
def test_gamma_monotone_in_x(s, x, dx):
    assert lower_incomplete_gamma(s, x + dx) >= lower_incomplete_gamma(s, x) - 1e-14 * math.gamma(s)


def test_gamma_domain():
    with pytest.raises(PreconditionError):
        lower_incomplete_gamma(0.0, 1.0)
    with pytest.raises(PreconditionError):
        lower_incomplete_gamma(1.0, -1.0)


# exit density, Volterra, return probability


def test_g_at_zero_and_degenerate():
    assert g_density(FLAG, 0.0) == 0.0
    stuck = custom_table(RadialFunction(2, 1, 0, [1.0, 0.0], 1.0))
    assert np.all(g_density(stuck, np.linspace(0, 5, 11)) == 0.0)


def test_g_below_inside_rate():
    # J <= J(p) off the ball and u has unit mass
    ts = np.linspace(0.0, 20.0, 81)
    g = g_density(FLAG, ts)
    assert np.all(g >= 0)
    assert np.all(g <= float(FLAG.density(1)) + 1e-15)


@pytest.mark.parametrize("kernel", [FLAG, LOG])
def test_g_sphere_sum_oracle(kernel):
    p, n = kernel.p, kernel.n
    ks = np.arange(1, 61)
    J = kernel.density(ks)
    vol = (1 - p**-n) * np.power(float(p), n * ks.astype(float))
    for t in (0.5, 2.0, 8.0):
        u = solve_radial(kernel, t, indicator(p, n, 0), M=0, window=(-5, 60)).u
        oracle = float(np.sum(J * u(ks) * vol))
        assert g_density(kernel, t) == pytest.approx(oracle, rel=1e-10, abs=1e-14)


def test_volterra_exponential():
    lam, h = 0.7, 1e-3
    ts = h * np.arange(int(10 / h) + 1)
    f = volterra_solve(np.full(ts.size, lam), h)
    assert np.max(np.abs(f - lam * np.exp(-lam * ts))) < 1e-4


def test_volterra_zero_and_residual():
    assert np.all(volterra_solve(np.zeros(50), 0.1) == 0.0)
    fp = first_passage_density(FLAG, 10.0, 0.01)
    assert fp.residual() < 1e-12
    total = fp.cdf()[-1]
    assert 0 < total <= 1
    assert fp.times[-1] == pytest.approx(10.0)


def test_volterra_rejects_bad_step():
    with pytest.raises(PreconditionError):
        volterra_solve([1.0, 1.0], 0.0)


def test_return_probability_trace():
    vals = [return_probability(FLAG, T).value for T in (10.0, 100.0, 1000.0)]
    assert all(0 <= v < 1 for v in vals)
    assert vals[0] < vals[1] < vals[2]
    rp = return_probability(FLAG, 1000.0)
    assert np.all(np.diff(rp.trace) > 0)
    assert rp.horizons[-1] == 1000.0


def test_return_probability_degenerate():
    stuck = custom_table(RadialFunction(2, 1, 0, [1.0, 0.0], 1.0))
    assert return_probability(stuck, 50.0).value == 0.0
