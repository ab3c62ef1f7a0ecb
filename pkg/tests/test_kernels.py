"""Both kernel builds (numba and numpy) must agree on every pair."""

import numpy as np
import pytest

from ferfuse import kernels
from ferfuse.accel import HAVE_NUMBA

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(123)


def test_pairwise_sq(rng):
    x = rng.normal(size=(40, 7))
    y = rng.normal(size=(25, 7))
    a = kernels.pairwise_sq_nb(x, y)
    b = kernels.pairwise_sq_np(x, y)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    # identical rows must give exactly zero on both builds
    same = np.vstack([x[0], x[0]])
    assert kernels.pairwise_sq_nb(same, same)[0, 1] == 0.0
    assert kernels.pairwise_sq_np(same, same)[0, 1] == 0.0


def test_hamming(rng):
    a = rng.integers(0, 256, size=(10, 32), dtype=np.uint8)
    b = rng.integers(0, 256, size=(8, 32), dtype=np.uint8)
    assert np.array_equal(kernels.hamming_matrix_nb(a, b), kernels.hamming_matrix_np(a, b))


def test_jacobi(rng):
    m = rng.normal(size=(20, 20))
    m = 0.5 * (m + m.T)
    da, va, _, ca = kernels.jacobi_eig_nb(m, 1e-10, 100)
    db, vb, _, cb = kernels.jacobi_eig_np(m, 1e-10, 100)
    assert ca and cb
    assert np.allclose(np.sort(da), np.sort(db), atol=1e-9)
    # each build must satisfy the eigen equation
    for d, v in ((da, va), (db, vb)):
        assert np.abs(m @ v - v * d).max() < 1e-8 * np.abs(m).max()


def test_dijkstra(rng):
    n = 30
    indptr = [0]
    indices = []
    weights = []
    for i in range(n):
        nbrs = [(i + 1) % n, (i + 7) % n]
        indices.extend(nbrs)
        weights.extend([1.0, 2.5])
        indptr.append(len(indices))
    args = (
        np.asarray(indptr, dtype=np.int64),
        np.asarray(indices, dtype=np.int64),
        np.asarray(weights, dtype=np.float64),
        n,
    )
    assert np.array_equal(kernels.dijkstra_all_nb(*args), kernels.dijkstra_all_np(*args))


def test_fast_response(rng):
    img = np.round(rng.random((40, 40)) * 6) / 6.0
    a = kernels.fast_response_nb(img, 20 / 255, 9)
    b = kernels.fast_response_np(img, 20 / 255, 9)
    assert np.array_equal(a > 0, b > 0)
    assert np.allclose(a, b, atol=1e-12)


def test_tsne_grad(rng):
    y = rng.normal(size=(15, 2))
    p = rng.random((15, 15))
    p = 0.5 * (p + p.T)
    np.fill_diagonal(p, 0.0)
    p /= p.sum()
    ga, kla = kernels.tsne_grad_nb(y, p)
    gb, klb = kernels.tsne_grad_np(y, p)
    assert np.allclose(ga, gb, rtol=1e-10, atol=1e-12)
    assert kla == pytest.approx(klb, rel=1e-12)


def test_umap_epoch(rng):
    n, d = 20, 2
    y = rng.normal(size=(n, d))
    head = rng.integers(0, n, size=30).astype(np.int64)
    tail = rng.integers(0, n, size=30).astype(np.int64)
    edge_ids = np.arange(30, dtype=np.int64)
    neg_counts = rng.integers(0, 4, size=30)
    offsets = np.zeros(31, dtype=np.int64)
    np.cumsum(neg_counts, out=offsets[1:])
    targets = rng.integers(0, n, size=int(offsets[-1])).astype(np.int64)
    a = kernels.umap_epoch_nb(y.copy(), head, tail, edge_ids, targets, offsets, 1.57, 0.89, 0.5)
    b = kernels.umap_epoch_np(y.copy(), head, tail, edge_ids, targets, offsets, 1.57, 0.89, 0.5)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_best_split(rng):
    x = rng.normal(size=(50, 6))
    y = rng.integers(0, 3, size=50).astype(np.int64)
    fa, ta, sa, oka = kernels.best_split_nb(x, y, 3)
    fb, tb, sb, okb = kernels.best_split_np(x, y, 3)
    assert oka and okb
    assert fa == fb
    assert ta == pytest.approx(tb, rel=1e-12)
    assert sa == pytest.approx(sb, rel=1e-12)


def test_every_pair_is_listed():
    assert set(kernels.KERNEL_PAIRS) == {
        "pairwise_sq",
        "hamming_matrix",
        "jacobi_eig",
        "dijkstra_all",
        "fast_response",
        "tsne_grad",
        "umap_epoch",
        "best_split",
    }
