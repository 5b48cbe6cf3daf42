from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from padic_landscape.errors import ConfigurationError, PreconditionError
from padic_landscape.padic import (
    INSIDE_UNIT_BALL,
    PAdicCoset,
    coset_add,
    coset_negate,
    coset_norm,
    sample_sphere_coset,
    sphere_volume,
)

PRIMES = [2, 3, 5, 7]


@st.composite
def cosets(draw, p=None, n=None, max_depth=12):
    p = p or draw(st.sampled_from(PRIMES))
    n = n or draw(st.integers(1, 3))
    coords = [(draw(st.integers(0, p**max_depth)), draw(st.integers(0, max_depth))) for _ in range(n)]
    return PAdicCoset.from_fractions(p, coords)


def as_fractions(a):
    return [Fraction(x, a.p**d) for x, d in zip(a.nums, a.dens)]


def frac_norm(p, fracs):
    """Norm of a tuple of rationals mod 1, from denominators (oracle)."""
    best = 1
    for f in fracs:
        f = f - (f.numerator // f.denominator)
        d = f.denominator
        if f != 0:
            best = max(best, d)
    return INSIDE_UNIT_BALL if best == 1 else best


def test_zero_plus_zero():
    z = PAdicCoset.zero(2, 1)
    assert coset_add(z, z).is_zero()


def test_halves_carry_out():
    half = PAdicCoset.from_fractions(2, [(1, 1)])
    assert (half + half).is_zero()


def test_half_plus_quarter():
    s = PAdicCoset.from_fractions(2, [(1, 1)]) + PAdicCoset.from_fractions(2, [(1, 2)])
    assert as_fractions(s) == [Fraction(3, 4)]
    assert coset_norm(s) == 4
    assert s.digits() == [{-2: 1, -1: 1}]


def test_norms():
    assert coset_norm(PAdicCoset.zero(3, 2)) is INSIDE_UNIT_BALL
    assert coset_norm(PAdicCoset.from_digits(3, [{-2: 1}])) == 9
    assert coset_norm(PAdicCoset.from_digits(2, [{-1: 1}, {-3: 1}])) == 8


def test_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        coset_add(PAdicCoset.zero(2, 1), PAdicCoset.zero(3, 1))
    with pytest.raises(ConfigurationError):
        coset_add(PAdicCoset.zero(2, 1), PAdicCoset.zero(2, 2))


def test_non_canonical_rejected():
    with pytest.raises(ConfigurationError):
        PAdicCoset(2, (2,), (2,))
    with pytest.raises(ConfigurationError):
        PAdicCoset.from_digits(2, [{-1: 2}])


def test_sphere_volumes():
    assert sphere_volume(2, 1, 0) == 0.5
    assert sphere_volume(3, 2, 1) == pytest.approx(8.0, rel=1e-15)
    assert np.sum(sphere_volume(2, 1, np.arange(-60, 1))) == pytest.approx(1.0, abs=1e-12)
    assert np.sum(sphere_volume(2, 1, np.arange(-20, 1))) == pytest.approx(1.0, abs=1e-6)


@given(cosets(), st.data())
def test_add_matches_fraction_oracle(a, data):
    b = data.draw(cosets(p=a.p, n=a.n))
    s = a + b
    expected = [(x + y) % 1 for x, y in zip(as_fractions(a), as_fractions(b))]
    assert as_fractions(s) == expected
    assert coset_norm(s) == frac_norm(a.p, expected)


@given(cosets(), st.data())
def test_group_laws(a, data):
    b = data.draw(cosets(p=a.p, n=a.n))
    c = data.draw(cosets(p=a.p, n=a.n))
    zero = PAdicCoset.zero(a.p, a.n)
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a + zero == a
    assert (a + coset_negate(a)).is_zero()


def _num(norm):
    return 1 if norm is INSIDE_UNIT_BALL else norm


@given(cosets(), st.data())
def test_ultrametric(a, data):
    b = data.draw(cosets(p=a.p, n=a.n))
    na, nb, ns = _num(coset_norm(a)), _num(coset_norm(b)), _num(coset_norm(a + b))
    assert ns <= max(na, nb)
    if na != nb:
        assert ns == max(na, nb)


@given(cosets())
def test_digits_roundtrip(a):
    assert PAdicCoset.from_digits(a.p, a.digits()) == a
    for d in a.digits():
        assert all(0 < v < a.p and i < 0 for i, v in d.items())


def test_sample_j1_p2_is_half():
    rng = np.random.default_rng(1)
    for _ in range(50):
        assert as_fractions(sample_sphere_coset(2, 1, 1, rng)) == [Fraction(1, 2)]


def test_sample_norm_is_exact():
    rng = np.random.default_rng(2)
    for p, n, j in [(2, 1, 2), (3, 2, 4), (5, 3, 3), (2, 1, 80)]:
        for _ in range(200):
            assert coset_norm(sample_sphere_coset(p, n, j, rng)) == p**j


def test_sample_j1_p3_two_atoms():
    rng = np.random.default_rng(3)
    N = 100_000
    ones = sum(as_fractions(sample_sphere_coset(3, 1, 1, rng))[0] == Fraction(1, 3) for _ in range(N))
    sigma = (0.25 / N) ** 0.5
    assert abs(ones / N - 0.5) <= 3 * sigma


@pytest.mark.parametrize("p,n,j", [(2, 1, 3), (3, 1, 2), (2, 2, 2)])
def test_sphere_sampling_uniform_chi_square(p, n, j):
    rng = np.random.default_rng(4)
    N = 100_000
    counts = Counter(sample_sphere_coset(p, n, j, rng) for _ in range(N))
    cells = p ** (n * j) - p ** (n * (j - 1))
    assert len(counts) == cells
    _, pval = stats.chisquare(list(counts.values()))
    assert pval > 0.001


def test_sample_rejects_bad_index():
    with pytest.raises(PreconditionError):
        sample_sphere_coset(2, 1, 0, np.random.default_rng(0))
