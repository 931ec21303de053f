"""Integer and modular arithmetic used by the curve and family code.

Everything here is pure: prime tables are immutable once built and the
functions keep no state beyond an lru-cached trial-division table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

WORKING_BITS = 128
TRIAL_LIMIT = 10**6

# Deterministic Miller-Rabin witnesses for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_BOUND = 3317044064679887385961981


class WorkingRangeError(OverflowError):
    """Raised when an integer exceeds the configured working range."""


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def __contains__(self, p) -> bool:
        i = np.searchsorted(self.as_array(), p)
        return bool(i < len(self.primes) and self.primes[i] == p)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.primes, dtype=np.int64)


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    @property
    def sign(self) -> int:
        return -1 if self.value < 0 else 1

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def ord(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def recompose(self) -> int:
        out = 1
        for p, e in self.factors:
            out *= p**e
        return out


def _sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    is_prime[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if is_prime[p]:
            is_prime[p * p :: 2 * p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def primes_up_to(limit: int) -> PrimeTable:
    """Primes ``p <= limit`` in ascending order (sieve of Eratosthenes)."""
    if limit < 0:
        raise ValueError("limit must be nonnegative")
    return PrimeTable(limit, tuple(int(p) for p in _sieve(limit)))


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(int(p) for p in _sieve(TRIAL_LIMIT))


def is_prime(n: int) -> bool:
    """Deterministic primality test for the working range.

    Miller-Rabin with the first thirteen prime bases is exact below
    3.3e24; above that a strong Lucas test is added (BPSW), which has no
    known counterexample.
    """
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    if n < _MR_DETERMINISTIC_BOUND:
        return True
    import gmpy2

    return bool(gmpy2.is_strong_selfridge_prp(n))


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p, by reciprocity descent."""
    if p == 2 or p < 2 or not is_prime(p):
        raise ValueError(f"legendre needs an odd prime, got {p}")
    return _jacobi(a % p, p)


def _jacobi(a: int, n: int) -> int:
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def legendre_euler(a: int, p: int) -> int:
    """Euler's criterion; slow but independent of :func:`legendre`."""
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def quadratic_character_table(p: int) -> np.ndarray:
    """Array ``chi`` with ``chi[r] = (r/p)`` for ``0 <= r < p``."""
    chi = np.full(p, -1, dtype=np.int64)
    squares = (np.arange(1, p, dtype=np.int64) ** 2) % p
    chi[squares] = 1
    chi[0] = 0
    return chi


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        m = 128
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"failed to split {n}")


def _split_cofactor(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    root = math.isqrt(n)
    if root * root == n:
        _split_cofactor(root, out)
        _split_cofactor(root, out)
        return
    d = _pollard_brent(n)
    _split_cofactor(d, out)
    _split_cofactor(n // d, out)


def factorize(n: int) -> Factorization:
    """Complete factorization of ``|n|``; the sign is kept on ``value``.

    Trial division by the primes below 10**6, then a primality check on
    what is left and Pollard-Brent for the rare composite cofactor.
    """
    n = int(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    m = abs(n)
    if m.bit_length() > WORKING_BITS:
        raise WorkingRangeError(f"|{n}| exceeds the {WORKING_BITS}-bit working range")
    found: dict[int, int] = {}
    for p in _trial_primes():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        if m < TRIAL_LIMIT * TRIAL_LIMIT:
            found[m] = found.get(m, 0) + 1
        else:
            _split_cofactor(m, found)
    return Factorization(n, tuple(sorted(found.items())))


def radical(n: int) -> int:
    out = 1
    for p, _ in factorize(n).factors:
        out *= p
    return out


def poly_eval(coeffs, t: int) -> int:
    """Evaluate an integer polynomial (constant term first) exactly."""
    acc = 0
    for c in reversed(list(coeffs)):
        acc = acc * t + int(c)
    return acc


def poly_eval_mod(coeffs, residues: np.ndarray, p: int) -> np.ndarray:
    """Horner evaluation of the polynomial at every entry of ``residues`` mod p."""
    acc = np.zeros_like(residues, dtype=np.int64)
    for c in reversed(list(coeffs)):
        acc = (acc * residues + int(c) % p) % p
    return acc
