"""Short Weierstrass curves y^2 = x^3 + a x + b and their local data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .arith import is_prime, quadratic_character_table


class SingularCurveError(ValueError):
    pass


class Reduction(str, Enum):
    GOOD = "good"
    MULTIPLICATIVE = "multiplicative"
    ADDITIVE = "additive"


def discriminant(a: int, b: int) -> int:
    return -16 * (4 * a**3 + 27 * b**2)


@dataclass(frozen=True)
class EllipticCurve:
    a: int
    b: int
    disc: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "b", int(self.b))
        d = discriminant(self.a, self.b)
        if d == 0:
            raise SingularCurveError(f"singular model y^2 = x^3 + {self.a}x + {self.b}")
        object.__setattr__(self, "disc", d)

    @property
    def c4(self) -> int:
        return -48 * self.a


@dataclass(frozen=True)
class TraceRecord:
    p: int
    a_p: int
    reduction: Reduction


def _check_prime(p: int) -> None:
    if p <= 3 or not is_prime(p):
        raise ValueError(f"local data is only computed at primes p > 3, got {p}")


def reduction_type(curve: EllipticCurve, p: int) -> Reduction:
    _check_prime(p)
    if curve.disc % p:
        return Reduction.GOOD
    if curve.c4 % p:
        return Reduction.MULTIPLICATIVE
    return Reduction.ADDITIVE


def character_sum_trace(a: int, b: int, p: int, chi: np.ndarray | None = None) -> int:
    """-sum_x (x^3 + a x + b / p); no validation, used by the hot loops."""
    if chi is None:
        chi = quadratic_character_table(p)
    x = np.arange(p, dtype=np.int64)
    vals = (x * x % p * x + (a % p) * x + b % p) % p
    return -int(chi[vals].sum())


def trace_of_frobenius(curve: EllipticCurve, p: int) -> TraceRecord:
    """a_p = p - #{(x, y) mod p : y^2 = x^3 + a x + b}, via the Legendre sum.

    The model is assumed minimal at p.  At bad primes the same sum gives
    +-1 (node) or 0 (cusp), so there is one code path for all reductions.
    """
    _check_prime(p)
    return TraceRecord(p, character_sum_trace(curve.a, curve.b, p), reduction_type(curve, p))


def affine_point_count(a: int, b: int, p: int) -> int:
    """Brute-force count over (Z/pZ)^2; test oracle only."""
    squares = [0] * p
    for y in range(p):
        squares[y * y % p] += 1
    return sum(squares[(x**3 + a * x + b) % p] for x in range(p))


def minimalize_at_p(curve: EllipticCurve, p: int) -> EllipticCurve:
    if p < 5:
        raise ValueError("minimalization is only implemented for p >= 5")
    a, b = curve.a, curve.b
    p4, p6 = p**4, p**6
    while a % p4 == 0 and b % p6 == 0:
        a //= p4
        b //= p6
    return curve if (a, b) == (curve.a, curve.b) else EllipticCurve(a, b)


def hasse_bound(p: int) -> float:
    return 2.0 * math.sqrt(p)
