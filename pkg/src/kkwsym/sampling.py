"""Seeded exact-rational test data."""

from __future__ import annotations

import random
from fractions import Fraction


def rng(seed) -> random.Random:
    return random.Random(seed)


def small_rational(r: random.Random, num: int = 5, den: int = 4) -> Fraction:
    return Fraction(r.randint(-num, num), r.randint(1, den))


def rational_vector(r: random.Random, n: int, **kw) -> tuple:
    return tuple(small_rational(r, **kw) for _ in range(n))


def unit_vector(r: random.Random, n: int) -> tuple:
    """Rational point on S^(n-1) by inverse stereographic projection."""
    t = rational_vector(r, n - 1, num=3, den=3)
    s = sum(x * x for x in t)
    d = s + 1
    return tuple(2 * x / d for x in t) + ((s - 1) / d,)


def dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def project_out(u, v) -> tuple:
    """u minus its component along the unit vector v."""
    k = dot(u, v)
    return tuple(a - k * b for a, b in zip(u, v))
