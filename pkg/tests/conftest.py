import numpy as np
import pytest

from padic_landscape.radial import RadialFunction, Tail


def random_table(rng, p=2, n=1, window=(-6, 6), tail="zero", positive=False):
    """Random radial function; ``tail`` is 'zero' or 'power'."""
    kmin, kmax = window
    size = kmax - kmin + 1
    values = rng.uniform(0.0 if positive else -1.0, 1.0, size)
    head = rng.uniform(0.0 if positive else -1.0, 1.0)
    if tail == "power":
        e = -n - rng.uniform(0.5, 2.0)
        return RadialFunction(p, n, kmin, values, head, Tail.power(values[-1] * float(p) ** (-kmax * e), e))
    return RadialFunction(p, n, kmin, values, head)


def coset_supported_table(rng, p, n, K, positive=False):
    """Radial function supported in ``B_K`` and constant on ``B_-K``; exact on a finite group."""
    values = rng.uniform(0.0 if positive else -1.0, 1.0, 2 * K)
    # window -K+1 .. K, head = value on B_-K
    head = rng.uniform(0.0 if positive else -1.0, 1.0)
    return RadialFunction(p, n, -K + 1, values, head)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def admissible_initial(rng, p, n, M, depth=6, positive_spectrum=False):
    """Initial data whose Fourier transform is a random radial table supported in ``B_M``."""
    from padic_landscape.radial import radial_fourier

    lo = 0.0 if positive_spectrum else -1.0
    spectrum = RadialFunction(p, n, M - depth, rng.uniform(lo, 1.0, depth + 1), rng.uniform(lo, 1.0))
    return radial_fourier(spectrum)


def ball_mixture(rng, p, n, radii, nonnegative=False):
    """Random combination of ball indicators; each is admissible."""
    from padic_landscape.radial import indicator, linear_combination

    terms = []
    for r in radii:
        terms += [rng.uniform(0.0 if nonnegative else -1.0, 1.0), indicator(p, n, int(r))]
    return linear_combination(*terms)
