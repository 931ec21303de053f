"""Prime side of the explicit formula, averaged over a family.

For one curve with conductor N and an even test function phi whose
transform is supported in (-sigma, sigma)::

    phihat(0) + phi(0)
      - 2 sum_p a(p) log p / (p log N) * phihat(log p / log N)
      - 2 sum_p a(p)^2 log p / (p^2 log N) * phihat(2 log p / log N)

The sums run over primes p >= 5 (2 and 3 are left to the error term) and
are finite because phihat vanishes outside (-sigma, sigma).  The
O(log log R / log R) remainder is reported as ``error_budget`` only.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .arith import primes_up_to
from .curves import TraceRecord
from .family import (
    FamilyConfigError,
    FamilySpec,
    TraceCache,
    residue_traces,
    sieve_family,
    specialize_many,
    trace_matrix,
)
from .quadrature import integrate

logger = logging.getLogger(__name__)


class Group(str, Enum):
    U = "U"
    USP = "USp"
    SO = "SO"
    SO_EVEN = "SOeven"
    SO_ODD = "SOodd"


# bounded part of What = constant + indicator * I(u), before the forced rank
_KERNELS = {
    Group.SO_EVEN: (0.0, 0.5),
    Group.SO: (0.5, 0.0),
    Group.SO_ODD: (1.0, -0.5),
    Group.USP: (0.0, -0.5),
    Group.U: (0.0, 0.0),
}


@dataclass(frozen=True)
class KernelSpec:
    """Fourier transform of a one-level density: delta(u) + bounded_part(u)."""

    group: Group
    forced_rank: int
    delta_coefficient: float
    constant: float
    indicator: float

    def bounded_part(self, u):
        u = np.asarray(u, dtype=float)
        return self.constant + self.indicator * (np.abs(u) <= 1.0)


def kernel_hat(group, forced_rank: int = 0) -> KernelSpec:
    group = Group(group)
    if forced_rank < 0:
        raise ValueError("forced rank must be nonnegative")
    if forced_rank and group in (Group.U, Group.USP):
        raise ValueError(f"rank-{forced_rank} kernels exist only for the orthogonal groups")
    const, ind = _KERNELS[group]
    return KernelSpec(group, forced_rank, 1.0, const + forced_rank, ind)


def predicted_density(phi, kernel: KernelSpec) -> float:
    """delta_coefficient * phihat(0) + int phihat(y) bounded_part(y) dy.

    ``phi`` needs ``phi_at``, ``phihat_at`` and ``sigma`` (the support of
    phihat; ``math.inf`` for a transform without compact support, in which
    case the constant part uses int phihat = phi(0)).
    """
    total = kernel.delta_coefficient * float(phi.phihat_at(0.0))
    sigma = float(phi.sigma)
    if math.isfinite(sigma):
        cuts = sorted({-sigma, sigma, *(c for c in (-1.0, 1.0) if -sigma < c < sigma)})
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            total += integrate(lambda y: phi.phihat_at(y) * kernel.bounded_part(y), lo, hi, tol=1e-13)
        return total
    total += kernel.constant * float(phi.phi_at(0.0))
    if kernel.indicator:
        total += kernel.indicator * integrate(phi.phihat_at, -1.0, 1.0, tol=1e-13)
    return total


@dataclass(frozen=True)
class WindowIndicator:
    """phi = indicator of [-tau, tau]; phihat(y) = sin(2 pi tau y) / (pi y)."""

    tau: float
    sigma: float = math.inf

    def phi_at(self, x):
        return (np.abs(np.asarray(x, dtype=float)) <= self.tau).astype(float)

    def phihat_at(self, y):
        return 2.0 * self.tau * np.sinc(2.0 * self.tau * np.asarray(y, dtype=float))


def _phihat_vec(phi, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    live = np.abs(y) < phi.sigma
    if live.any():
        out[live] = np.asarray(phi.phihat_at(y[live]), dtype=float)
    return out


def curve_ef_sum(traces, phi, log_n: float) -> float:
    """Prime side of the explicit formula for one curve (no error term)."""
    if not log_n > 0:
        raise ValueError("log conductor must be positive")
    by_p = {rec.p: rec.a_p for rec in traces}
    cutoff = math.exp(phi.sigma * log_n)
    needed = [p for p in primes_up_to(int(cutoff) + 1) if p > 3 and p < cutoff]
    missing = [p for p in needed if p not in by_p]
    if missing:
        raise ValueError(f"traces missing for primes {missing[:10]}")
    if not needed:
        return float(phi.phihat_at(0.0)) + float(phi.phi_at(0.0))
    p = np.array(needed, dtype=float)
    a = np.array([by_p[q] for q in needed], dtype=float)
    first, second = _prime_sums(a[None, :], p, np.array([log_n]), phi)
    return float(phi.phihat_at(0.0)) + float(phi.phi_at(0.0)) - 2.0 * first[0] - 2.0 * second[0]


def _prime_sums(traces: np.ndarray, primes: np.ndarray, log_n: np.ndarray, phi):
    """Per-curve first and second sums; rows are curves, columns primes."""
    logp = np.log(primes)
    x = logp[None, :] / log_n[:, None]
    w1 = logp[None, :] / (primes[None, :] * log_n[:, None]) * _phihat_vec(phi, x.ravel()).reshape(x.shape)
    w2 = logp[None, :] / (primes[None, :] ** 2 * log_n[:, None]) * _phihat_vec(phi, 2 * x.ravel()).reshape(x.shape)
    return (traces * w1).sum(axis=1), (traces * traces * w2).sum(axis=1)


class Normalization(str, Enum):
    LOCAL = "local"
    GLOBAL = "global"


@dataclass
class DensityReport:
    normalization: str
    R: int
    sigma: float
    value: float
    terms: dict
    prediction: float
    model_a: float
    model_b: float
    family_size: int = 0
    skipped_singular: int = 0
    log_conductor: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def discrepancy(self) -> float:
        return self.value - self.prediction

    def recompose(self) -> float:
        t = self.terms
        return t["phihat0"] + t["phi0"] - 2.0 * t["first_sum"] - 2.0 * t["second_sum"]

    def to_json_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def error_budget(R: int, kappa: float = 1.0) -> float:
    if R < 3:
        return math.inf
    return kappa * math.log(math.log(R)) / math.log(R)


def support_limit(spec: FamilySpec) -> float:
    """min(1/2, 2/(3m)) with m the degree of the conductor polynomial."""
    m = len(spec.conductor_poly) - 1
    return 0.5 if m <= 0 else min(0.5, 2.0 / (3.0 * m))


def one_level_density(spec: FamilySpec, R: int, phi, normalization="global", *,
                      model_a: float | None = None, model_b: float = 1.0,
                      workers: int = 1, cache: TraceCache | None = None,
                      overrides: dict[int, int] | None = None, kappa: float = 1.0) -> DensityReport:
    """Family average of the prime side under local or global rescaling.

    Local: average over the sieved family, each curve scaled by its own
    log N_t.  Global: average over every nonsingular t in [R, 2R] with the
    single scale log N = mean log N_t.  Averages divide by the number of
    curves actually summed.
    """
    normalization = Normalization(normalization)
    sigma = float(phi.sigma)
    if not sigma < 1.0:
        raise ValueError("support of phihat must lie inside (-1, 1)")
    notes = []
    limit = support_limit(spec)
    if sigma >= limit:
        msg = f"sigma = {sigma} is outside the proven range sigma < {limit:.6g}"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)

    if normalization is Normalization.LOCAL:
        ts = sieve_family(spec, R, workers).members
    else:
        ts = range(R, 2 * R + 1)
    curves, skipped = specialize_many(spec, ts, workers, overrides)
    if not curves:
        raise FamilyConfigError(f"empty family at R={R} ({normalization.value} normalization)")

    if normalization is Normalization.LOCAL:
        log_n = np.array([c.log_conductor for c in curves])
        common = None
    else:
        common = math.fsum(c.log_conductor for c in curves) / len(curves)
        log_n = np.full(len(curves), common)

    top = math.exp(sigma * float(log_n.max()))
    primes = np.array([p for p in primes_up_to(int(top) + 1) if 3 < p < top], dtype=np.int64)
    if primes.size:
        if cache is not None and _cache_covers(cache, spec, curves, primes):
            cols = [cache.primes.index(int(p)) for p in primes]
            traces = cache.rows_for([c.t for c in curves])[:, cols].astype(float)
        else:
            traces = trace_matrix(spec, curves, primes).astype(float)
        first, second = _prime_sums(traces, primes.astype(float), log_n, phi)
    else:
        first = second = np.zeros(len(curves))

    phihat0 = float(phi.phihat_at(0.0))
    phi0 = float(phi.phi_at(0.0))
    terms = {
        "phihat0": phihat0,
        "phi0": phi0,
        "first_sum": math.fsum(first.tolist()) / len(curves),
        "second_sum": math.fsum(second.tolist()) / len(curves),
        "error_budget": error_budget(R, kappa),
    }
    a = spec.rank_r + 0.5 if model_a is None else model_a
    value = terms["phihat0"] + terms["phi0"] - 2.0 * terms["first_sum"] - 2.0 * terms["second_sum"]
    return DensityReport(normalization.value, R, sigma, value, terms, a * phi0 + model_b * phihat0,
                         a, model_b, len(curves), len(skipped), common, notes)


def _cache_covers(cache: TraceCache, spec: FamilySpec, curves, primes) -> bool:
    if cache.fingerprint != spec.fingerprint():
        return False
    members = set(cache.members)
    return int(primes.max()) <= cache.prime_limit and all(c.t in members for c in curves)


def first_moment(spec: FamilySpec, p: int) -> int:
    """sum over t mod p of a_t(p), a complete sum over residues."""
    if p <= 3:
        raise ValueError("first moments are taken at primes p > 3")
    return int(residue_traces(spec, p).sum())


def trace_records(spec: FamilySpec, t: int, prime_limit: int) -> list[TraceRecord]:
    """TraceRecords of E_t for 3 < p <= prime_limit."""
    from .curves import trace_of_frobenius
    from .family import specialize

    curve = specialize(spec, t)
    return [trace_of_frobenius(curve, p) for p in primes_up_to(prime_limit) if p > 3]


CSV_COLUMNS = ("R", "value", "prediction", "discrepancy")


def write_convergence_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rep in reports:
            w.writerow([rep.R, f"{rep.value:.12g}", f"{rep.prediction:.12g}", f"{rep.discrepancy:.12g}"])
