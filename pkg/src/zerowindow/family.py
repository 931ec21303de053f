"""One-parameter families y^2 = x^3 + A(T) x + B(T) over Q(T).

Specialization, the square-free sieve on the conductor polynomial D(T),
the log-conductor proxy and a persistent table of traces a_t(p).
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .arith import factorize, poly_eval, poly_eval_mod, primes_up_to, quadratic_character_table
from .curves import EllipticCurve, SingularCurveError, character_sum_trace

logger = logging.getLogger(__name__)

SMALL_PRIME_POLICIES = ("once", "none")
CALIBRATION_SCAN = 32


class FamilyConfigError(ValueError):
    """The family or its sieve parameters are unusable."""


class CacheCorruptError(ValueError):
    pass


class CacheFingerprintError(ValueError):
    pass


def _int_tuple(coeffs) -> tuple[int, ...]:
    out = [int(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def poly_mul(p, q) -> tuple[int, ...]:
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _int_tuple(out)


def poly_add(p, q) -> tuple[int, ...]:
    n = max(len(p), len(q))
    return _int_tuple([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def poly_scale(p, c: int) -> tuple[int, ...]:
    return _int_tuple([c * a for a in p])


@dataclass(frozen=True)
class FamilySpec:
    A_coeffs: tuple[int, ...]
    B_coeffs: tuple[int, ...]
    rank_r: int = 0
    sieve_c: int = 1
    sieve_t0: int = 0
    fixed_square_B: int = 1
    small_prime_log_policy: str = "once"

    def __post_init__(self):
        object.__setattr__(self, "A_coeffs", _int_tuple(self.A_coeffs))
        object.__setattr__(self, "B_coeffs", _int_tuple(self.B_coeffs))
        if self.rank_r < 0:
            raise FamilyConfigError("rank must be nonnegative")
        if self.sieve_c < 1:
            raise FamilyConfigError("sieve modulus c must be >= 1")
        if self.fixed_square_B < 1:
            raise FamilyConfigError("fixed square B must be a positive integer")
        if self.small_prime_log_policy not in SMALL_PRIME_POLICIES:
            raise FamilyConfigError(f"unknown small-prime policy {self.small_prime_log_policy!r}")
        if not self.delta_coeffs:
            raise FamilyConfigError("discriminant of the family is identically zero")

    @property
    def delta_coeffs(self) -> tuple[int, ...]:
        A, B = self.A_coeffs, self.B_coeffs
        return poly_scale(poly_add(poly_scale(poly_mul(poly_mul(A, A), A), 4), poly_scale(poly_mul(B, B), 27)), -16)

    @property
    def conductor_poly(self) -> tuple[int, ...]:
        return conductor_polynomial(self.delta_coeffs)

    def to_json_dict(self) -> dict:
        """Family file layout; coefficients are written as integer strings."""
        return {
            "A": [str(c) for c in self.A_coeffs],
            "B": [str(c) for c in self.B_coeffs],
            "r": self.rank_r,
            "c": self.sieve_c,
            "t0": self.sieve_t0,
            "B_square": self.fixed_square_B,
            "small_prime_policy": self.small_prime_log_policy,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "FamilySpec":
        try:
            return cls(
                A_coeffs=[int(c) for c in d["A"]],
                B_coeffs=[int(c) for c in d["B"]],
                rank_r=int(d.get("r", 0)),
                sieve_c=int(d.get("c", 1)),
                sieve_t0=int(d.get("t0", 0)),
                fixed_square_B=int(d.get("B_square", 1)),
                small_prime_log_policy=d.get("small_prime_policy", "once"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FamilyConfigError):
                raise
            raise FamilyConfigError(f"malformed family description: {exc}") from exc

    @classmethod
    def load(cls, path) -> "FamilySpec":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def fingerprint(self) -> bytes:
        canon = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).digest()


@lru_cache(maxsize=64)
def conductor_polynomial(delta: tuple[int, ...]) -> tuple[int, ...]:
    """Product of the distinct nonconstant irreducible factors of Delta(T).

    Square-free part by repeated gcd with the derivative (sympy's sqf_part),
    made primitive so the integer content of Delta is not part of D.
    """
    import sympy

    T = sympy.Symbol("T")
    if len(delta) <= 1:
        return (1,)
    poly = sympy.Poly(list(reversed(delta)), T, domain="ZZ")
    _, sqf = poly.sqf_part().primitive()
    coeffs = [int(c) for c in reversed(sqf.all_coeffs())]
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    return tuple(coeffs)


def specialize(spec: FamilySpec, t: int) -> EllipticCurve:
    """The curve E_t, minimal at every p >= 5."""
    return specialize_data(spec, t).curve


@dataclass(frozen=True)
class CurveData:
    """A specialized curve with the local data the density engine needs."""

    t: int
    curve: EllipticCurve
    disc_primes: tuple[int, ...]   # primes dividing the minimal discriminant
    scaled_primes: tuple[int, ...]  # p >= 5 at which the raw model was not minimal
    log_conductor: float


def specialize_data(spec: FamilySpec, t: int, overrides: dict[int, int] | None = None) -> CurveData:
    a = poly_eval(spec.A_coeffs, t)
    b = poly_eval(spec.B_coeffs, t)
    try:
        raw = EllipticCurve(a, b)
    except SingularCurveError:
        raise SingularCurveError(f"Delta({t}) = 0 for this family") from None
    fac = factorize(raw.disc)
    scaled = []
    for p, e in fac.factors:
        if p >= 5 and e >= 12:
            p4, p6 = p**4, p**6
            while a % p4 == 0 and b % p6 == 0:
                a //= p4
                b //= p6
                if p not in scaled:
                    scaled.append(p)
    curve = raw if not scaled else EllipticCurve(a, b)
    if scaled:
        disc_primes = tuple(p for p in fac.primes() if curve.disc % p == 0)
    else:
        disc_primes = tuple(fac.primes())
    if overrides is not None and t in overrides:
        logn = math.log(overrides[t])
    else:
        logn = _proxy_log_conductor(disc_primes, spec.small_prime_log_policy)
    if not logn > 0:
        raise FamilyConfigError(f"log conductor proxy vanishes at t={t}")
    return CurveData(t, curve, disc_primes, tuple(scaled), logn)


def _proxy_log_conductor(disc_primes, policy: str) -> float:
    total = 0.0
    for p in disc_primes:
        if p > 3 or policy == "once":
            total += math.log(p)
    return total


def log_conductor(spec: FamilySpec, t: int, overrides: dict[int, int] | None = None) -> float:
    """log N_t, with N_t modeled as the radical of the minimal discriminant.

    Primes 2 and 3 follow the family's small-prime policy ("once": each
    contributes log p when it divides Delta; "none": ignored).  An override
    table maps t to an exact conductor and bypasses the proxy.
    """
    if overrides is not None and t in overrides:
        if poly_eval(spec.delta_coeffs, t) == 0:
            raise SingularCurveError(f"Delta({t}) = 0 for this family")
        return math.log(overrides[t])
    return specialize_data(spec, t).log_conductor


def load_conductor_overrides(path) -> dict[int, int]:
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "conductor"]:
            raise FamilyConfigError("conductor override CSV must have header 't,conductor'")
        for row in reader:
            n = int(row["conductor"])
            if n < 1:
                raise FamilyConfigError(f"conductor must be positive, got {n}")
            out[int(row["t"])] = n
    return out


# -- parallel helpers ------------------------------------------------------


def _chunks(items: list, n: int) -> list[list]:
    if n <= 1 or len(items) < 2:
        return [items]
    size = -(-len(items) // n)
    return [items[i : i + size] for i in range(0, len(items), size)]


def _pmap(fn, args: list, workers: int) -> list:
    """Map ``fn`` over contiguous chunks and concatenate in order."""
    chunks = _chunks(args, workers)
    if len(chunks) == 1:
        return list(fn(chunks[0]))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(fn, chunks))
    return [x for part in parts for x in part]


@dataclass(frozen=True)
class _Specializer:
    spec: FamilySpec
    overrides: dict | None

    def __call__(self, ts):
        out = []
        for t in ts:
            try:
                out.append(specialize_data(self.spec, t, self.overrides))
            except SingularCurveError:
                out.append(None)
        return out


def specialize_many(spec: FamilySpec, ts, workers: int = 1, overrides=None) -> tuple[list[CurveData], list[int]]:
    """Specialize every t; returns (curves in ascending t, skipped singular t)."""
    ts = sorted(int(t) for t in ts)
    results = _pmap(_Specializer(spec, overrides), ts, workers)
    curves = [c for c in results if c is not None]
    skipped = [t for t, c in zip(ts, results) if c is None]
    return curves, skipped


# -- sieve ------------------------------------------------------------------


@dataclass(frozen=True)
class SievedFamily:
    R: int
    members: tuple[int, ...]
    exponents: dict[int, int] = field(default_factory=dict)
    rejected: int = 0
    singular: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.members)

    @property
    def density(self) -> float:
        return len(self.members) / self.R


def progression(spec: FamilySpec, R: int) -> list[int]:
    """All t = c t' + t0 with R <= t <= 2R."""
    c, t0 = spec.sieve_c, spec.sieve_t0
    first = t0 + c * (-(-(R - t0) // c))
    return list(range(first, 2 * R + 1, c))


def admits(d_value: int, exponents: dict[int, int], fixed_square: int) -> bool:
    """Square-free test of one value of D, up to the controlled primes.

    Primes dividing the fixed square must occur to exactly their calibrated
    power; every other prime may occur at most once.
    """
    if d_value == 0:
        return False
    fac = factorize(d_value)
    for p, e in fac.factors:
        if fixed_square % p == 0:
            continue
        if e >= 2:
            return False
    return all(fac.ord(p) == e for p, e in exponents.items())


def _prime_divisors(n: int) -> list[int]:
    return factorize(n).primes() if n != 1 else []


def calibrate_exponents(spec: FamilySpec, candidates: list[int]) -> dict[int, int]:
    """ord_p D(t) for p | B over the first admissible t; must not vary."""
    D = spec.conductor_poly
    primes = _prime_divisors(spec.fixed_square_B)
    seen: dict[int, set[int]] = {p: set() for p in primes}
    scanned = 0
    for t in candidates:
        if scanned >= CALIBRATION_SCAN:
            break
        value = poly_eval(D, t)
        if value == 0 or poly_eval(spec.delta_coeffs, t) == 0:
            continue
        fac = factorize(value)
        for p in primes:
            seen[p].add(fac.ord(p))
        scanned += 1
    out = {}
    for p, exps in seen.items():
        if len(exps) > 1:
            raise FamilyConfigError(
                f"sieve condition cannot hold: the power of {p} in D(t) varies "
                f"with t ({sorted(exps)}); choose c, t0 so it is fixed"
            )
        if exps:
            out[p] = exps.pop()
    return out


def _sieve_chunk(payload):
    D, delta, exponents, fixed_square, ts = payload
    keep, singular = [], []
    for t in ts:
        if poly_eval(delta, t) == 0:
            singular.append(t)
        elif admits(poly_eval(D, t), exponents, fixed_square):
            keep.append(t)
    return keep, singular


def sieve_family(spec: FamilySpec, R: int, workers: int = 1) -> SievedFamily:
    """Members t = c t' + t0 in [R, 2R] whose D(t) passes :func:`admits`."""
    if R < 1:
        raise ValueError("R must be >= 1")
    candidates = progression(spec, R)
    exponents = calibrate_exponents(spec, candidates)
    D, delta = spec.conductor_poly, spec.delta_coeffs
    payloads = [(D, delta, exponents, spec.fixed_square_B, chunk) for chunk in _chunks(candidates, workers)]
    if len(payloads) == 1:
        parts = [_sieve_chunk(payloads[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sieve_chunk, payloads))
    members = tuple(t for keep, _ in parts for t in keep)
    singular = tuple(t for _, sing in parts for t in sing)
    if not members:
        logger.warning("sieve produced an empty family at R=%d", R)
    return SievedFamily(R, members, exponents, len(candidates) - len(members) - len(singular), singular)


def avg_log_conductor(spec: FamilySpec, R: int, workers: int = 1, overrides=None) -> float:
    """Mean of log N_t over the nonsingular t in [R, 2R] (no sieving)."""
    curves, _ = specialize_many(spec, range(R, 2 * R + 1), workers, overrides)
    if not curves:
        raise FamilyConfigError(f"no nonsingular t in [{R}, {2 * R}]")
    return math.fsum(c.log_conductor for c in curves) / len(curves)


# -- traces -----------------------------------------------------------------


def residue_traces(spec: FamilySpec, p: int) -> np.ndarray:
    """a_p of the raw model (A(r), B(r)) for every residue r mod p."""
    chi = quadratic_character_table(p)
    r = np.arange(p, dtype=np.int64)
    a = poly_eval_mod(spec.A_coeffs, r, p)
    b = poly_eval_mod(spec.B_coeffs, r, p)
    x = r
    cube = x * x % p * x % p
    vals = (cube[None, :] + a[:, None] * x[None, :] + b[:, None]) % p
    return -chi[vals].sum(axis=1)


def trace_matrix(spec: FamilySpec, curves: list[CurveData], primes) -> np.ndarray:
    """a_t(p) for each curve (rows) and prime p > 3 (columns), minimal models.

    The trace at p depends only on t mod p unless the model was rescaled at
    p itself; those few entries are recomputed from the minimal model.
    """
    primes = [int(p) for p in primes]
    ts = np.array([c.t for c in curves], dtype=np.int64)
    out = np.empty((len(curves), len(primes)), dtype=np.int64)
    col = {p: j for j, p in enumerate(primes)}
    for j, p in enumerate(primes):
        out[:, j] = residue_traces(spec, p)[ts % p]
    for i, c in enumerate(curves):
        for p in c.scaled_primes:
            if p in col:
                out[i, col[p]] = character_sum_trace(c.curve.a, c.curve.b, p)
    return out


@dataclass(frozen=True)
class TraceCache:
    fingerprint: bytes
    R: int
    prime_limit: int
    members: tuple[int, ...]
    primes: tuple[int, ...]
    table: np.ndarray
    built_at: float = 0.0

    def trace(self, t: int, p: int) -> int:
        return int(self.table[self.members.index(t), self.primes.index(p)])

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {
            (t, p): int(self.table[i, j])
            for i, t in enumerate(self.members)
            for j, p in enumerate(self.primes)
        }

    def rows_for(self, ts) -> np.ndarray:
        index = {t: i for i, t in enumerate(self.members)}
        return self.table[[index[t] for t in ts]]


_MAGIC = b"ZWL1"
_HEADER = struct.Struct("<4s32sqqqqd")


def build_trace_cache(spec: FamilySpec, R: int, prime_limit: int, workers: int = 1, members=None) -> TraceCache:
    """Traces for every sieved member t and every 3 < p <= prime_limit."""
    if prime_limit < 5:
        raise ValueError("prime_limit must be >= 5")
    if members is None:
        members = sieve_family(spec, R, workers).members
    curves, skipped = specialize_many(spec, members, workers)
    if skipped:
        raise FamilyConfigError(f"singular members in cache request: {skipped[:5]}")
    primes = tuple(p for p in primes_up_to(prime_limit) if p > 3)
    table = trace_matrix(spec, curves, primes)
    if table.size and np.abs(table).max() > np.iinfo(np.int16).max:
        raise FamilyConfigError("prime_limit too large for 16-bit trace storage")
    return TraceCache(spec.fingerprint(), R, prime_limit, tuple(c.t for c in curves), primes,
                      table.astype(np.int16), time.time())


def save_trace_cache(cache: TraceCache, path) -> None:
    """Write the binary container.

    Layout (little endian): magic ``ZWL1``, 32-byte family fingerprint,
    R, prime_limit, member count, prime count (int64 each), build time
    (float64), member t values (int64), the row-major int16 trace table,
    then a SHA-256 of everything before it.
    """
    body = bytearray(_HEADER.pack(_MAGIC, cache.fingerprint, cache.R, cache.prime_limit,
                                  len(cache.members), len(cache.primes), cache.built_at))
    body += np.asarray(cache.members, dtype="<i8").tobytes()
    body += np.ascontiguousarray(cache.table, dtype="<i2").tobytes()
    body += hashlib.sha256(body).digest()
    Path(path).write_bytes(bytes(body))


def load_trace_cache(path, spec: FamilySpec | None = None) -> TraceCache:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size + 32:
        raise CacheCorruptError("trace cache truncated")
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CacheCorruptError("trace cache checksum mismatch")
    magic, fp, R, prime_limit, n_members, n_primes, built_at = _HEADER.unpack_from(body)
    if magic != _MAGIC:
        raise CacheCorruptError(f"bad magic {magic!r}")
    if spec is not None and fp != spec.fingerprint():
        raise CacheFingerprintError("trace cache was built for a different family")
    off = _HEADER.size
    members = np.frombuffer(body, dtype="<i8", count=n_members, offset=off)
    off += 8 * n_members
    if len(body) != off + 2 * n_members * n_primes:
        raise CacheCorruptError("trace cache size does not match its header")
    table = np.frombuffer(body, dtype="<i2", count=n_members * n_primes, offset=off)
    primes = tuple(p for p in primes_up_to(prime_limit) if p > 3)
    if len(primes) != n_primes:
        raise CacheCorruptError("prime count does not match prime_limit")
    return TraceCache(fp, R, prime_limit, tuple(int(t) for t in members), primes,
                      table.reshape(n_members, n_primes).astype(np.int16), built_at)
