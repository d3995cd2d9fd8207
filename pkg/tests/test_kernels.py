"""Both kernel backends must agree bit-for-bit."""

import numpy as np
import pytest

from metriclab.kernels import _numpy_impl

try:
    from metriclab.kernels import _numba_impl
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")


def random_regular_csr(rng, n, d):
    nbr = np.empty(n * d, dtype=np.int64)
    for v in range(n):
        nbr[v * d:(v + 1) * d] = rng.integers(0, n, d)
    # make it symmetric enough to be connected: add a cycle
    for v in range(n):
        nbr[v * d] = (v + 1) % n
        nbr[v * d + 1] = (v - 1) % n
    indptr = np.arange(0, (n + 1) * d, d, dtype=np.int64)
    return indptr, nbr


def test_matp_mul_batch_agree():
    rng = np.random.default_rng(0)
    for p, level in ((2, 1), (2, 2), (3, 2), (3, 3)):
        A = rng.integers(0, p, (40, 9 * level)).astype(np.uint8)
        b = rng.integers(0, p, 9 * level).astype(np.uint8)
        got_np = _numpy_impl.matp_mul_batch(A, b, p, level)
        got_nb = _numba_impl.matp_mul_batch(A, b, p, level)
        assert np.array_equal(got_np, got_nb)


def test_perm_apply_batch_agree():
    rng = np.random.default_rng(1)
    A = np.stack([rng.permutation(12) for _ in range(30)]).astype(np.uint16)
    b = rng.permutation(12).astype(np.uint16)
    assert np.array_equal(_numpy_impl.perm_apply_batch(A, b),
                          _numba_impl.perm_apply_batch(A, b))


def test_bfs_and_matvec_agree():
    rng = np.random.default_rng(2)
    indptr, nbr = random_regular_csr(rng, 60, 4)
    for s in (0, 17, 59):
        assert np.array_equal(_numpy_impl.bfs_distances(indptr, nbr, 60, s),
                              _numba_impl.bfs_distances(indptr, nbr, 60, s))
    x = rng.standard_normal(60)
    assert np.allclose(_numpy_impl.adj_matvec(indptr, nbr, x),
                       _numba_impl.adj_matvec(indptr, nbr, x))


def test_pair_scan_agree():
    rng = np.random.default_rng(3)
    indptr, nbr = random_regular_csr(rng, 40, 4)
    X = rng.standard_normal((40, 5))
    out_np = _numpy_impl.pair_scan_graph(indptr, nbr, X, 10)
    out_nb = _numba_impl.pair_scan_graph(indptr, nbr, X, 10)
    assert np.allclose(out_np[0], out_nb[0])
    assert np.array_equal(out_np[1], out_nb[1])
    assert np.array_equal(out_np[2], out_nb[2])
    assert np.isclose(out_np[3], out_nb[3])
