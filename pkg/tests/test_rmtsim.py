import math

import numpy as np
import pytest

from zerowindow.rmtsim import (
    EnsembleConfig,
    _abs_angles_batch,
    block_with_forced,
    eigenangles,
    haar_special_orthogonal,
    pairwise_sum,
    run_ensemble,
    sample_counts,
    sample_rng,
    sample_special_orthogonal,
    window_count,
)


def test_config_validation():
    for bad in (dict(N=3), dict(N=10, parity="x"), dict(N=11, parity="even"), dict(N=10, parity="odd"),
                dict(N=10, samples=0), dict(N=10, tau=-1)):
        with pytest.raises(ValueError):
            EnsembleConfig(**bad)


def test_haar_so_is_special_orthogonal():
    g = haar_special_orthogonal(9, sample_rng(0, 0))
    assert np.allclose(g.T @ g, np.eye(9), atol=1e-12)
    assert np.linalg.det(g) == pytest.approx(1.0)
    # odd dimension: 1 is always an eigenvalue
    assert np.min(np.abs(eigenangles(g))) < 1e-7


def test_samples_are_reproducible():
    a = sample_special_orthogonal(10, "even", 5, 17)
    b = sample_special_orthogonal(10, "even", 5, 17)
    c = sample_special_orthogonal(10, "even", 5, 18)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_eigenangles_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        eigenangles(np.ones((3, 3)))


def test_forced_block_and_counting():
    g = haar_special_orthogonal(6, sample_rng(1, 0))
    m = block_with_forced(2, g)
    ang = eigenangles(m)
    assert window_count(ang, 8, 0.0) >= 2
    assert window_count(ang, 8, 10.0) == 8


def test_symmetric_fast_path_matches_general_solver():
    rng = sample_rng(3, 0)
    z = np.stack([rng.standard_normal((8, 8)) for _ in range(5)])
    fast = np.sort(_abs_angles_batch(z), axis=1)
    for k in range(5):
        q, r = np.linalg.qr(z[k])
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        slow = np.sort(np.abs(eigenangles(q)))
        assert np.allclose(fast[k], slow, atol=1e-6)


def test_pairwise_sum():
    v = np.arange(1000, dtype=float)
    assert pairwise_sum(v) == 499500.0


def test_counts_independent_of_workers():
    cfg = EnsembleConfig(N=20, samples=300, seed=11, tau=0.5)
    assert sample_counts(cfg, 1) == sample_counts(cfg, 2)


def test_run_ensemble_stats():
    cfg = EnsembleConfig(N=30, r=1, samples=400, seed=2, tau=0.5)
    st = run_ensemble(cfg)
    assert st.samples == 400 and sum(st.histogram.values()) == 400
    assert min(st.counts) >= 1
    assert st.prediction == 2.5
    assert abs(st.mean - st.prediction) < 6 * st.stderr + 0.05
    assert "counts" not in st.to_json_dict()


def test_split_parity_prediction():
    even = run_ensemble(EnsembleConfig(N=20, parity="even", samples=10, seed=0, tau=1.0))
    odd = run_ensemble(EnsembleConfig(N=21, parity="odd", samples=10, seed=0, tau=1.0))
    assert even.prediction != odd.prediction
    assert math.isfinite(even.prediction)
