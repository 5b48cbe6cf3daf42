"""Exact arithmetic in the quotient group Q_p^n / Z_p^n.

A coset is stored coordinate-wise as a reduced fraction ``a / p**d`` with
``0 <= a < p**d`` and ``p`` not dividing ``a`` (or ``a == d == 0``).  The
base-``p`` digits of ``a`` are exactly the fractional digits of the coordinate:
digit at index ``-i`` is the coefficient of ``p**-i``.  Python integers make
the group law exact at any depth, which matters because heavy-tailed jumps
produce deep expansions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, PreconditionError

__all__ = [
    "INSIDE_UNIT_BALL",
    "PAdicCoset",
    "coset_add",
    "coset_negate",
    "coset_norm",
    "sphere_volume",
    "sample_sphere_coset",
]


class _InsideUnitBall:
    __slots__ = ()

    def __repr__(self):
        return "INSIDE_UNIT_BALL"


#: Norm reported for the zero coset, i.e. for points of Z_p^n.
INSIDE_UNIT_BALL = _InsideUnitBall()


def _strip(a: int, d: int, p: int) -> tuple[int, int]:
    if a == 0:
        return 0, 0
    while a % p == 0:
        a //= p
        d -= 1
    return a, d


@dataclass(frozen=True)
class PAdicCoset:
    """Element of Q_p^n / Z_p^n.

    Parameters
    ----------
    p : int
        The prime.
    nums, dens : tuple of int
        Coordinate ``i`` is ``nums[i] / p**dens[i]`` reduced modulo 1.
    """

    p: int
    nums: tuple
    dens: tuple

    def __post_init__(self):
        if self.p < 2:
            raise ConfigurationError(f"p must be a prime >= 2, got {self.p}")
        if len(self.nums) != len(self.dens) or not self.nums:
            raise ConfigurationError("coordinate tuples must be non-empty and equal length")
        for a, d in zip(self.nums, self.dens):
            if d < 0 or not 0 <= a < self.p**d or (a == 0) != (d == 0):
                raise ConfigurationError(f"non-canonical coordinate {a}/{self.p}^{d}")
            if a and a % self.p == 0:
                raise ConfigurationError(f"non-canonical coordinate {a}/{self.p}^{d}")

    @classmethod
    def zero(cls, p: int, n: int = 1) -> "PAdicCoset":
        return cls(p, (0,) * n, (0,) * n)

    @classmethod
    def from_fractions(cls, p: int, coords) -> "PAdicCoset":
        """Build from ``(numerator, exponent)`` pairs meaning ``a / p**d``; reduces mod 1."""
        nums, dens = [], []
        for a, d in coords:
            if d < 0:
                a, d = 0, 0
            a, d = _strip(a % p**d, d, p)
            nums.append(a)
            dens.append(d)
        return cls(p, tuple(nums), tuple(dens))

    @classmethod
    def from_digits(cls, p: int, digit_maps) -> "PAdicCoset":
        """Build from one ``{index: digit}`` mapping per coordinate, indices negative."""
        coords = []
        for digits in digit_maps:
            depth = max((-i for i, d in digits.items() if d), default=0)
            a = 0
            for i, d in digits.items():
                if i >= 0:
                    raise ConfigurationError("fractional digit indices must be negative")
                if not 0 <= d < p:
                    raise ConfigurationError(f"digit {d} outside 0..{p - 1}")
                a += d * p ** (depth + i)
            coords.append((a, depth))
        return cls.from_fractions(p, coords)

    @property
    def n(self) -> int:
        return len(self.nums)

    @property
    def depth(self) -> int:
        """Largest ``d`` over coordinates; the norm is ``p**depth`` (0 for the zero coset)."""
        return max(self.dens)

    def is_zero(self) -> bool:
        return self.depth == 0

    def digits(self) -> list[dict]:
        """Sparse fractional digits, one ``{index: digit}`` dict per coordinate."""
        out = []
        for a, d in zip(self.nums, self.dens):
            digits = {}
            i = -d
            while a:
                a, r = divmod(a, self.p)
                if r:
                    digits[i] = r
                i += 1
            out.append(digits)
        return out

    def __add__(self, other):
        return coset_add(self, other)

    def __neg__(self):
        return coset_negate(self)


def coset_add(a: PAdicCoset, b: PAdicCoset) -> PAdicCoset:
    """Group law; carries that overflow past index -1 land in Z_p^n and vanish."""
    if a.p != b.p or a.n != b.n:
        raise ConfigurationError(f"cannot add cosets over (p={a.p}, n={a.n}) and (p={b.p}, n={b.n})")
    p = a.p
    nums, dens = [], []
    for x, dx, y, dy in zip(a.nums, a.dens, b.nums, b.dens):
        d = max(dx, dy)
        s = (x * p ** (d - dx) + y * p ** (d - dy)) % p**d if d else 0
        s, d = _strip(s, d, p)
        nums.append(s)
        dens.append(d)
    return PAdicCoset(p, tuple(nums), tuple(dens))


def coset_negate(a: PAdicCoset) -> PAdicCoset:
    p = a.p
    nums = tuple((p**d - x) % p**d if d else 0 for x, d in zip(a.nums, a.dens))
    return PAdicCoset(p, nums, a.dens)


def coset_norm(a: PAdicCoset):
    """``p**depth`` for a nonzero coset, :data:`INSIDE_UNIT_BALL` for zero."""
    d = a.depth
    return INSIDE_UNIT_BALL if d == 0 else a.p**d


def sphere_volume(p: int, n: int, j) -> float:
    """Haar volume ``p**(n*j) * (1 - p**-n)`` of the sphere of radius ``p**j``."""
    return np.power(float(p), n * np.asarray(j, dtype=float)) * (1.0 - float(p) ** -n)


def _uniform_below(rng: np.random.Generator, p: int, k: int) -> int:
    """Uniform integer in ``[0, p**k)``, exact for any ``k``."""
    if k <= 0:
        return 0
    bound = p**k
    if bound <= 2**62:
        return int(rng.integers(0, bound))
    value = 0
    for digit in rng.integers(0, p, size=k):
        value = value * p + int(digit)
    return value


def sample_sphere_coset(p: int, n: int, j: int, rng: np.random.Generator) -> PAdicCoset:
    """Haar-uniform point of the sphere ``||x|| = p**j`` reduced mod Z_p^n.

    The digits at index ``-j`` form a uniform nonzero tuple in ``{0..p-1}^n``;
    all deeper-layer digits (indices ``-j+1 .. -1``) are independent uniform.
    """
    if j < 1:
        raise PreconditionError(f"sphere index must be >= 1 for cosets, got {j}")
    top = int(rng.integers(1, p**n))
    coords = []
    for _ in range(n):
        top, leading = divmod(top, p)
        coords.append((leading + p * _uniform_below(rng, p, j - 1), j))
    return PAdicCoset.from_fractions(p, coords)
