import numpy as np
import pytest

from rpcakit.svd import (DENSE_CUTOFF, SvdConvergenceError, dense_svd, partial_svd,
                         thresholded_svd, top_singular_pair)


def known_spectrum(m, n, s, seed=0):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((m, len(s))))
    V, _ = np.linalg.qr(rng.standard_normal((n, len(s))))
    return (U * np.asarray(s)) @ V.T


def test_partial_svd_examples():
    res = partial_svd(np.diag([5.0, 3.0, 1.0]), 2)
    np.testing.assert_allclose(res.singular_values, [5.0, 3.0])
    u, v = np.array([1.0, 2.0, 2.0]), np.array([3.0, 4.0])
    res = partial_svd(np.outer(u, v), 1)
    assert res.singular_values[0] == pytest.approx(15.0)
    with pytest.raises(ValueError):
        partial_svd(np.eye(3), 4)


@pytest.mark.parametrize("shape", [(50, 40), (200, 150)])
def test_partial_svd_matches_dense(shape):
    Z = np.random.default_rng(1).standard_normal(shape)
    res = partial_svd(Z, 5, seed=3)
    ref = np.linalg.svd(Z, compute_uv=False)[:5]
    np.testing.assert_allclose(res.singular_values, ref, rtol=1e-8)
    np.testing.assert_allclose(res.U.T @ res.U, np.eye(5), atol=1e-10)
    np.testing.assert_allclose(res.V.T @ res.V, np.eye(5), atol=1e-10)
    assert np.all(np.diff(res.singular_values) <= 0)


def test_partial_svd_deterministic_given_seed():
    Z = np.random.default_rng(2).standard_normal((150, 120))
    a, b = partial_svd(Z, 4, seed=9), partial_svd(Z, 4, seed=9)
    assert a.U.tobytes() == b.U.tobytes() and a.V.tobytes() == b.V.tobytes()


def test_dense_reconstruction_full_rank():
    Z = np.random.default_rng(3).standard_normal((7, 5))
    res = dense_svd(Z)
    assert np.linalg.norm(res.reconstruct() - Z) <= 1e-8 * np.linalg.norm(Z)


def test_nonconvergence_carries_best():
    Z = np.random.default_rng(0).standard_normal((300, 200))
    with pytest.raises(SvdConvergenceError) as info:
        partial_svd(Z, 10, maxiter=5)
    best = info.value.best
    assert best is not None
    top = np.linalg.svd(Z, compute_uv=False)[:10]
    for s in best:                   # every converged value is a true top value
        assert np.min(np.abs(top - s)) <= 1e-6 * top[0]


def test_zero_matrix_above_cutoff():
    Z = np.zeros((DENSE_CUTOFF + 40, DENSE_CUTOFF + 20))
    assert not np.any(partial_svd(Z, 3).singular_values)
    assert thresholded_svd(Z, 0.5, rank_hint=2).k == 0


def test_top_singular_pair():
    s1, u, v = top_singular_pair(np.diag([2.0, 7.0, 1.0]))
    assert s1 == pytest.approx(7.0)
    Z = np.random.default_rng(4).standard_normal((90, 80))
    s1, u, v = top_singular_pair(Z)
    assert u.shape == (90, 1) and v.shape == (80, 1)
    assert s1 == pytest.approx(np.linalg.norm(Z, 2), rel=1e-8)
    assert np.linalg.norm(u) == pytest.approx(1.0) and np.linalg.norm(v) == pytest.approx(1.0)
    assert np.linalg.norm(Z @ v - s1 * u) <= 1e-6
    with pytest.raises(ValueError):
        top_singular_pair(np.zeros((3, 3)))


@pytest.mark.parametrize("hint", [0, 2, 6, 30])
def test_thresholded_svd_brackets_rank(hint):
    s = [50.0, 40.0, 30.0, 20.0, 10.0, 5.0, 1.0]
    Z = known_spectrum(150, 120, s)
    res = thresholded_svd(Z, 7.5, rank_hint=hint, seed=1)
    np.testing.assert_allclose(res.singular_values, s[:5], rtol=1e-9)
