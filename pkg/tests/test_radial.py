import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import coset_supported_table, random_table
from padic_landscape.errors import ConfigurationError, DivergenceError
from padic_landscape.kernels import custom_table, regularized_linear
from padic_landscape.radial import (
    RadialFunction,
    Tail,
    apply_generator,
    indicator,
    integrate_radial,
    l1_norm,
    linear_combination,
    radial_convolve,
    radial_fourier,
)


# -- brute force on the finite group B_K / B_-K = Z / p^(2K), n = 1 ----------


def _points(p, K):
    a = np.arange(p ** (2 * K))
    v = np.zeros(a.size, dtype=int)
    rest = a.copy()
    rest[0] = 1
    while np.any(rest % p == 0):
        m = rest % p == 0
        v[m] += 1
        rest[m] //= p
    k = np.where(a == 0, -K, K - v)  # a == 0 stands for the whole ball B_-K
    return a, k


def brute_fourier(f, K, ms):
    p = f.p
    a, k = _points(p, K)
    fx = f(k)
    out = []
    for m in ms:
        e = K + m
        phase = np.ones(a.size) if e <= 0 else np.cos(2 * np.pi * (a % p**e) / p**e)
        out.append(np.sum(fx * phase) * float(p) ** -K)
    return np.array(out)


def brute_convolve(f, g, K):
    p = f.p
    a, k = _points(p, K)
    fx, gx = f(k), g(k)
    N = a.size
    conv = np.array([np.sum(fx[(i - a) % N] * gx) for i in range(N)]) * float(p) ** -K
    return k, conv


# -- examples -----------------------------------------------------------------


def test_integral_indicator():
    assert integrate_radial(indicator(2, 1)) == pytest.approx(1.0, abs=1e-15)
    assert integrate_radial(indicator(3, 2, r=2)) == pytest.approx(81.0, rel=1e-14)


def test_integral_geometric_example():
    # f(2^k) = 2^{-2k} for k >= 1, zero elsewhere
    f = RadialFunction(2, 1, 0, [0.0, 0.25], 0.0, Tail.power(1.0, -2.0))
    assert integrate_radial(f) == pytest.approx(0.5, abs=1e-15)


def test_kernel_integrates_to_one():
    J = regularized_linear(2, 1, 2).as_radial()
    assert integrate_radial(J) == pytest.approx(1.0, abs=1e-12)


def test_divergent_tail_named():
    f = RadialFunction(2, 1, 0, [1.0], 0.0, Tail.power(1.0, -0.5))
    with pytest.raises(DivergenceError, match="tail"):
        integrate_radial(f)


def test_tail_must_match_last_value():
    with pytest.raises(ConfigurationError):
        RadialFunction(2, 1, 0, [1.0, 2.0], 0.0, Tail.power(1.0, -2.0))


def test_fourier_of_indicator_is_indicator():
    om = indicator(2, 1)
    F = radial_fourier(om)
    ks = np.arange(-10, 11)
    assert np.array_equal(F(ks), om(ks))


def test_fourier_of_kernel_at_one():
    F = radial_fourier(regularized_linear(2, 1, 2).as_radial())
    assert F(0) == pytest.approx(0.75, abs=1e-15)


@pytest.mark.parametrize("p,K", [(2, 4), (3, 3), (5, 2)])
def test_fourier_matches_character_sum(rng, p, K):
    for _ in range(5):
        f = coset_supported_table(rng, p, 1, K)
        # the character is constant on B_-K only while ||xi|| <= p^K
        ms = np.arange(-K - 3, K + 1)
        F = radial_fourier(f)
        assert np.allclose(F(ms), brute_fourier(f, K, ms), atol=1e-12, rtol=0)
        # beyond that the transform of a B_-K-invariant function vanishes
        assert np.all(F(np.arange(K + 1, K + 6)) == 0.0)


@pytest.mark.parametrize("p,K", [(2, 4), (3, 2)])
def test_convolution_matches_group_sum(rng, p, K):
    for _ in range(3):
        f = coset_supported_table(rng, p, 1, K)
        g = coset_supported_table(rng, p, 1, K)
        k, conv = brute_convolve(f, g, K)
        assert np.allclose(radial_convolve(f, g)(k), conv, atol=1e-12, rtol=0)


@pytest.mark.parametrize("tail", ["zero", "power"])
@pytest.mark.parametrize("p,n", [(2, 1), (3, 2)])
def test_fourier_involution(rng, tail, p, n):
    for _ in range(10):
        f = random_table(rng, p, n, tail=tail)
        back = radial_fourier(radial_fourier(f))
        ks = np.arange(f.kmin - 3, f.kmax + 4)
        assert np.allclose(back(ks), f(ks), atol=1e-10, rtol=0)


def test_fourier_bounded_by_integral_for_nonnegative(rng):
    for _ in range(20):
        f = random_table(rng, tail="power", positive=True)
        F = radial_fourier(f)
        total = integrate_radial(f)
        assert F.limit_at_zero == pytest.approx(total, rel=1e-14)
        assert np.all(np.abs(F.values) <= total * (1 + 1e-12))


def test_convolve_indicator_with_itself():
    om = indicator(2, 1)
    c = radial_convolve(om, om)
    ks = np.arange(-10, 11)
    assert np.allclose(c(ks), om(ks), atol=1e-15)


def test_convolution_mass_commutativity_fourier(rng):
    for _ in range(20):
        f = random_table(rng, tail="power")
        g = random_table(rng, tail="zero")
        fg, gf = radial_convolve(f, g), radial_convolve(g, f)
        ks = np.arange(-10, 11)
        assert np.allclose(fg(ks), gf(ks), atol=1e-12, rtol=0)
        assert integrate_radial(fg) == pytest.approx(integrate_radial(f) * integrate_radial(g), abs=1e-10)
        ms = np.arange(-12, 12)
        lhs = radial_fourier(fg)(ms)
        rhs = radial_fourier(f)(ms) * radial_fourier(g)(ms)
        assert np.allclose(lhs, rhs, atol=1e-10, rtol=0)


def test_convolution_associative(rng):
    for _ in range(10):
        f, g, h = (random_table(rng, tail=t) for t in ("power", "zero", "zero"))
        left = radial_convolve(radial_convolve(f, g), h)
        right = radial_convolve(f, radial_convolve(g, h))
        ks = np.arange(-10, 11)
        assert np.allclose(left(ks), right(ks), atol=1e-9, rtol=0)


def test_generator_on_degenerate_kernel_conserves_mass():
    J = custom_table(RadialFunction(2, 1, -3, [1.0] * 4, 1.0))
    Af = apply_generator(J, indicator(2, 1))
    assert integrate_radial(Af) == pytest.approx(0.0, abs=1e-15)


def test_generator_fourier_side(rng):
    kernel = regularized_linear(2, 1, 2)
    for _ in range(10):
        f = random_table(rng)
        Af = apply_generator(kernel, f)
        ms = np.arange(-15, 10)
        lhs = radial_fourier(Af)(ms)
        rhs = -np.asarray(kernel.psi(ms)) * radial_fourier(f)(ms)
        assert np.allclose(lhs, rhs, atol=1e-10, rtol=0)


def test_generator_l1_bound(rng):
    kernel = regularized_linear(3, 1, 1.5)
    for _ in range(100):
        f = random_table(rng, p=3, tail="power" if rng.random() < 0.5 else "zero")
        assert l1_norm(apply_generator(kernel, f)) <= 2 * l1_norm(f) * (1 + 1e-12)


def test_generator_on_bounded_constant_function():
    kernel = regularized_linear(2, 1, 2)
    one = RadialFunction(2, 1, -5, np.ones(11), 1.0, Tail.constant(1.0))
    Af = apply_generator(kernel, one)
    assert np.allclose(Af(np.arange(-5, 6)), 0.0, atol=1e-12)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_integral_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    f, g = random_table(rng, tail="power"), random_table(rng)
    combo = linear_combination(a, f, b, g)
    assert integrate_radial(combo) == pytest.approx(a * integrate_radial(f) + b * integrate_radial(g), abs=1e-10)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_integral_monotone(seed):
    rng = np.random.default_rng(seed)
    f = random_table(rng, positive=True)
    bump = random_table(rng, positive=True)
    g = linear_combination(1.0, f, 1.0, bump)
    assert integrate_radial(f) <= integrate_radial(g)
