"""Monte Carlo window counts for orthogonal matrices with forced eigenvalues.

Each sample is diag(I_r, g) with g Haar-distributed in SO(N) (even), SO(N+1)
(odd) or either with probability 1/2 (mixed).  Eigenangles are unfolded by
N_total / (2 pi) with N_total = r + dim g and counted in [-tau, tau].

Every sample draws from its own Philox stream keyed by (seed, sample index),
so results do not depend on how samples are split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

PARITIES = ("even", "odd", "mixed")


@dataclass(frozen=True)
class EnsembleConfig:
    N: int
    parity: str = "mixed"
    r: int = 0
    samples: int = 1000
    seed: int = 0
    tau: float = 1.0

    def __post_init__(self):
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}")
        if self.N < 4:
            raise ValueError("N must be at least 4")
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if self.r < 0 or self.tau < 0:
            raise ValueError("r and tau must be nonnegative")
        if self.parity == "even" and self.N % 2:
            raise ValueError("even parity needs even N")
        if self.parity == "odd" and self.N % 2 == 0:
            raise ValueError("odd parity needs odd N")


@dataclass
class WindowCountStats:
    mean: float
    stderr: float
    histogram: dict[int, int]
    prediction: float | None
    samples: int
    counts: list[int] = field(default_factory=list, repr=False)

    def to_json_dict(self, with_counts: bool = False) -> dict:
        d = asdict(self)
        d["histogram"] = {str(k): v for k, v in sorted(self.histogram.items())}
        if not with_counts:
            d.pop("counts")
        return d


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one sample."""
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, index]))


def haar_special_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SO(n).

    QR of a Gaussian matrix with the signs of R's diagonal moved into Q
    gives Haar measure on O(n); flipping one column when det = -1 maps it
    onto SO(n) and keeps the measure invariant.
    """
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def sample_special_orthogonal(N: int, parity: str, seed: int, index: int = 0) -> np.ndarray:
    """One g block; for mixed parity the dimension is N or N+1 with equal odds."""
    cfg = EnsembleConfig(N, parity, 0, 1, seed, 0.0)
    rng = sample_rng(seed, index)
    n = cfg.N + int(rng.integers(0, 2)) if parity == "mixed" else cfg.N
    return haar_special_orthogonal(n, rng)


def eigenangles(matrix: np.ndarray, atol: float = 1e-8) -> np.ndarray:
    """Eigenangles in (-pi, pi], ascending."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) > 1e-8:
        raise ValueError("matrix is not orthogonal")
    ev = np.linalg.eigvals(m)
    if np.max(np.abs(np.abs(ev) - 1.0)) > atol:
        raise ValueError("eigenvalues off the unit circle")
    angles = np.angle(ev)
    angles[angles <= -math.pi] = math.pi
    return np.sort(angles)


def block_with_forced(r: int, g: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    out = np.eye(r + n)
    out[r:, r:] = g
    return out


def window_count(angles, n_total: int, tau: float) -> int:
    """Number of angles with |theta| N_total / (2 pi) <= tau."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    scaled = np.abs(np.asarray(angles, dtype=float)) * n_total / (2 * math.pi)
    return int(np.count_nonzero(scaled <= tau))


BLOCK = 256


def _draw(cfg: EnsembleConfig, index: int) -> np.ndarray:
    """Gaussian matrix for one sample, sized by the sample's parity draw."""
    rng = sample_rng(cfg.seed, index)
    n = cfg.N + int(rng.integers(0, 2)) if cfg.parity == "mixed" else cfg.N
    return rng.standard_normal((n, n))


def _abs_angles_batch(z: np.ndarray) -> np.ndarray:
    """|eigenangles| of the Haar SO(n) matrices built from a stack of Gaussians.

    For orthogonal Q the symmetric part (Q + Q^T)/2 has eigenvalues
    cos(theta) with the same multiplicities, so a symmetric solver gives
    |theta| directly.
    """
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diagonal(r, axis1=1, axis2=2))[:, None, :]
    flip = np.linalg.det(q) < 0
    q[flip, :, 0] *= -1.0
    cos = np.linalg.eigvalsh(0.5 * (q + q.transpose(0, 2, 1)))
    return np.arccos(np.clip(cos, -1.0, 1.0))


def _count_block(payload) -> list[int]:
    cfg, start, stop = payload
    mats = [_draw(cfg, i) for i in range(start, stop)]
    counts = np.empty(len(mats), dtype=np.int64)
    by_dim: dict[int, list[int]] = {}
    for k, m in enumerate(mats):
        by_dim.setdefault(m.shape[0], []).append(k)
    for n, ks in sorted(by_dim.items()):
        ang = _abs_angles_batch(np.stack([mats[k] for k in ks]))
        scaled = ang * (cfg.r + n) / (2 * math.pi)
        # forced eigenvalues sit at angle 0 exactly and always count
        counts[ks] = cfg.r + np.count_nonzero(scaled <= cfg.tau, axis=1)
    return counts.tolist()


def pairwise_sum(values: np.ndarray) -> float:
    """Fixed-order pairwise summation."""
    v = np.asarray(values, dtype=float)
    if v.size <= 8:
        total = 0.0
        for x in v:
            total += float(x)
        return total
    mid = v.size // 2
    return pairwise_sum(v[:mid]) + pairwise_sum(v[mid:])


def sample_counts(cfg: EnsembleConfig, workers: int = 1) -> list[int]:
    """Per-sample window counts in sample-index order.

    Samples are processed in fixed blocks of indices, so the split across
    workers never changes which matrices are batched together.
    """
    payloads = [(cfg, i, min(i + BLOCK, cfg.samples)) for i in range(0, cfg.samples, BLOCK)]
    if workers <= 1:
        parts = [_count_block(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count_block, payloads))
    return [c for part in parts for c in part]


def predicted_window(cfg: EnsembleConfig) -> float | None:
    """r + 1/2 + 2 tau for mixed parity; split parities go through the kernels."""
    if cfg.parity == "mixed":
        return cfg.r + 0.5 + 2.0 * cfg.tau
    from .density import WindowIndicator, kernel_hat, predicted_density

    group = "SOeven" if cfg.parity == "even" else "SOodd"
    return predicted_density(WindowIndicator(cfg.tau), kernel_hat(group, cfg.r))


def run_ensemble(cfg: EnsembleConfig, workers: int = 1) -> WindowCountStats:
    counts = np.array(sample_counts(cfg, workers), dtype=float)
    n = counts.size
    mean = pairwise_sum(counts) / n
    var = pairwise_sum((counts - mean) ** 2) / (n - 1) if n > 1 else 0.0
    values, freq = np.unique(counts.astype(int), return_counts=True)
    hist = {int(v): int(f) for v, f in zip(values, freq)}
    return WindowCountStats(mean, math.sqrt(var / n), hist, predicted_window(cfg), n,
                            [int(c) for c in counts])
