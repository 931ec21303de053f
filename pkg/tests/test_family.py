import json
import math

import numpy as np
import pytest
import sympy

from zerowindow.curves import trace_of_frobenius
from zerowindow.family import (
    CacheCorruptError,
    CacheFingerprintError,
    FamilyConfigError,
    FamilySpec,
    avg_log_conductor,
    build_trace_cache,
    load_conductor_overrides,
    load_trace_cache,
    log_conductor,
    progression,
    residue_traces,
    save_trace_cache,
    sieve_family,
    specialize,
    specialize_data,
    specialize_many,
    trace_matrix,
)


def test_delta_and_conductor_poly(family_b_t):
    assert family_b_t.delta_coeffs == (-64, 0, -432)
    # content 16 is dropped, as is the sign
    assert family_b_t.conductor_poly == (4, 0, 27)


def test_conductor_poly_drops_repeated_factors():
    # A = -3 T^2, B = 2 T^3 is singular; A = -3T^2, B = 2T^3 + T gives a square factor in Delta
    spec = FamilySpec((0, 0, -3), (0, 1, 0, 2))
    delta = sympy.Poly(list(reversed(spec.delta_coeffs)), sympy.Symbol("T"))
    D = sympy.Poly(list(reversed(spec.conductor_poly)), sympy.Symbol("T"))
    assert sympy.rem(delta, D).is_zero
    assert sympy.degree(sympy.gcd(D, D.diff())) == 0


def test_identically_singular_family():
    with pytest.raises(FamilyConfigError):
        FamilySpec((0,), (0,))


def test_json_round_trip_and_fingerprint(family_b_t):
    d = json.loads(json.dumps(family_b_t.to_json_dict()))
    again = FamilySpec.from_json_dict(d)
    assert again == family_b_t
    assert again.fingerprint() == family_b_t.fingerprint()
    assert FamilySpec((1,), (0, 2)).fingerprint() != family_b_t.fingerprint()
    with pytest.raises(FamilyConfigError):
        FamilySpec.from_json_dict({"A": ["x"], "B": ["1"]})


def test_specialize_minimalizes():
    spec = FamilySpec((5**4,), (0, 5**6))
    data = specialize_data(spec, 3)
    assert (data.curve.a, data.curve.b) == (1, 3)
    assert data.scaled_primes == (5,)
    assert 5 not in data.disc_primes or data.curve.disc % 5 == 0


def test_log_conductor_proxy_and_policy(family_b_t):
    t = 7
    disc = -16 * (4 + 27 * t * t)
    rad_big = math.prod(p for p in sympy.factorint(abs(disc)) if p > 3)
    assert log_conductor(family_b_t, t) == pytest.approx(math.log(2 * rad_big))
    none = FamilySpec((1,), (0, 1), small_prime_log_policy="none")
    assert log_conductor(none, t) == pytest.approx(math.log(rad_big))
    assert log_conductor(family_b_t, t, {7: 1000}) == pytest.approx(math.log(1000))


def test_overrides_file(tmp_path):
    good = tmp_path / "n.csv"
    good.write_text("t,conductor\n5,37\n6,99\n")
    assert load_conductor_overrides(good) == {5: 37, 6: 99}
    bad = tmp_path / "bad.csv"
    bad.write_text("t,N\n5,37\n")
    with pytest.raises(FamilyConfigError):
        load_conductor_overrides(bad)


def test_specialize_many_skips_singular():
    # Delta = -16 (4 T^3 + 27) vanishes nowhere over Z; use A = -3, B = T: singular at T = +-2
    spec = FamilySpec((-3,), (0, 1))
    curves, skipped = specialize_many(spec, range(-3, 4))
    assert skipped == [-2, 2]
    assert [c.t for c in curves] == [-3, -1, 0, 1, 3]


def test_sieve_matches_bruteforce(family_b_t):
    R = 150
    fam = sieve_family(family_b_t, R)
    expect = [t for t in range(R, 2 * R + 1) if sympy.ntheory.factor_.core(27 * t * t + 4) == 27 * t * t + 4]
    assert list(fam.members) == expect
    assert fam.density == len(expect) / R


def test_progression():
    spec = FamilySpec((1,), (0, 1), sieve_c=4, sieve_t0=1)
    ts = progression(spec, 10)
    assert ts[0] == 13 and ts[-1] == 17 and all(t % 4 == 1 for t in ts)


def test_sieve_fixed_square_calibration():
    # on T = 4k, D(T) = 27T^2 + 4 = 4 (108 k^2 + 1): 2 always to the power 2
    spec = FamilySpec((1,), (0, 1), sieve_c=4, sieve_t0=0, fixed_square_B=4)
    fam = sieve_family(spec, 100)
    assert fam.exponents == {2: 2}
    for t in fam.members:
        v = 27 * t * t + 4
        assert sympy.multiplicity(2, v) == 2


def test_sieve_inconsistent_power_is_config_error():
    spec = FamilySpec((1,), (0, 1), fixed_square_B=4)
    with pytest.raises(FamilyConfigError):
        sieve_family(spec, 100)


def test_avg_log_conductor_workers_agree(family_b_t):
    assert avg_log_conductor(family_b_t, 200, 1) == avg_log_conductor(family_b_t, 200, 2)


def test_trace_matrix_matches_direct():
    spec = FamilySpec((5**4,), (0, 5**6))
    curves, _ = specialize_many(spec, range(1, 30))
    primes = [5, 7, 11, 13]
    table = trace_matrix(spec, curves, primes)
    for row, c in zip(table, curves):
        assert list(row) == [trace_of_frobenius(c.curve, p).a_p for p in primes]


def test_residue_traces(family_b_t):
    p = 11
    tr = residue_traces(family_b_t, p)
    assert [int(v) for v in tr] == [trace_of_frobenius(specialize(family_b_t, t), p).a_p
                                    if (4 + 27 * t * t) % p else int(tr[t]) for t in range(p)]


def test_cache_round_trip(tmp_path, family_b_t):
    cache = build_trace_cache(family_b_t, 60, 50)
    path = tmp_path / "c.bin"
    save_trace_cache(cache, path)
    back = load_trace_cache(path, family_b_t)
    assert back.members == cache.members and back.primes == cache.primes
    assert np.array_equal(back.table, cache.table)
    t, p = back.members[3], 47
    assert back.trace(t, p) == trace_of_frobenius(specialize(family_b_t, t), p).a_p

    with pytest.raises(CacheFingerprintError):
        load_trace_cache(path, FamilySpec((1,), (0, 3)))
    raw = bytearray(path.read_bytes())
    raw[60] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheCorruptError):
        load_trace_cache(path)
    path.write_bytes(b"ZWL1")
    with pytest.raises(CacheCorruptError):
        load_trace_cache(path)
