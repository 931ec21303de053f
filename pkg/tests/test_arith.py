import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from zerowindow.arith import (
    WorkingRangeError,
    factorize,
    is_prime,
    legendre,
    legendre_euler,
    poly_eval,
    poly_eval_mod,
    primes_up_to,
    quadratic_character_table,
    radical,
)


def test_prime_table_matches_sympy():
    table = primes_up_to(10_000)
    assert list(table) == list(sympy.primerange(2, 10_001))
    assert 9973 in table and 9971 not in table
    assert len(primes_up_to(1)) == 0


@given(st.integers(min_value=-10**6, max_value=10**12))
def test_is_prime_agrees_with_sympy(n):
    assert is_prime(n) == sympy.isprime(n)


def test_is_prime_large():
    assert is_prime(2**89 - 1)
    assert not is_prime((2**61 - 1) * (2**31 - 1))
    # above the deterministic Miller-Rabin range
    assert is_prime(2**107 - 1)
    assert not is_prime((2**61 - 1) * 1000000007)


@given(st.integers(min_value=-10**9, max_value=10**9), st.sampled_from([5, 7, 13, 101, 997, 7919]))
def test_legendre_matches_euler(a, p):
    assert legendre(a, p) == legendre_euler(a, p)


def test_legendre_rejects_bad_modulus():
    with pytest.raises(ValueError):
        legendre(3, 2)
    with pytest.raises(ValueError):
        legendre(3, 15)


def test_character_table():
    p = 23
    chi = quadratic_character_table(p)
    assert chi[0] == 0
    assert chi.sum() == 0
    assert all(chi[x] == legendre_euler(x, p) for x in range(p))


@given(st.integers(min_value=1, max_value=10**30).map(lambda n: n * (1 if n % 3 else -1)))
@settings(max_examples=60, deadline=None)
def test_factorize_recomposes(n):
    fac = factorize(n)
    assert fac.recompose() * fac.sign == n
    assert all(is_prime(p) for p in fac.primes())
    assert fac.primes() == sorted(fac.primes())


def test_factorize_semiprime_and_powers():
    p, q = 1000000007, 998244353
    assert factorize(p * q).factors == ((q, 1), (p, 1))
    assert factorize(p**3 * 4).factors == ((2, 2), (p, 3))
    assert factorize(1).factors == ()


def test_factorize_range_and_zero():
    with pytest.raises(ValueError):
        factorize(0)
    with pytest.raises(WorkingRangeError):
        factorize(2**130)


def test_radical():
    assert radical(-16 * 27 * 5) == 30
    assert radical(1) == 1


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=6), st.integers(-1000, 1000))
def test_poly_eval_mod_consistent(coeffs, t):
    p = 101
    got = poly_eval_mod(coeffs, np.array([t % p]), p)[0]
    assert got == poly_eval(coeffs, t) % p


def test_poly_eval_constant_first():
    assert poly_eval([4, 0, 27], 2) == 4 + 27 * 4
    assert math.isclose(poly_eval([], 5), 0)
