"""Pure-numpy reference implementations of the hot kernels.

Every function here must stay bit-identical to its numba twin in
``_numba_impl``; the test suite runs both backends against each other.
"""

from __future__ import annotations

import numpy as np


def matp_mul_batch(A, b, p, level):
    """Multiply a batch of packed 3x3 matrices over F_p[t]/(t^level) by one matrix.

    A: (m, 9*level) uint8, row-major 3x3, each entry `level` coefficients.
    b: (9*level,) uint8.  Returns (m, 9*level) uint8.
    """
    m = A.shape[0]
    a = A.reshape(m, 3, 3, level).astype(np.int64)
    bb = b.reshape(3, 3, level).astype(np.int64)
    out = np.zeros((m, 3, 3, level), dtype=np.int64)
    for u in range(level):
        for v in range(level - u):
            out[:, :, :, u + v] += np.einsum("mik,kj->mij", a[:, :, :, u], bb[:, :, v])
    out %= p
    return out.reshape(m, 9 * level).astype(np.uint8)


def perm_apply_batch(A, b):
    """Compose a batch of permutations with one permutation, (a*b)(x) = b(a(x)).

    A: (m, k) integer image tables, b: (k,).  Returns b[A].
    """
    return b[A]


def bfs_distances(indptr, nbr, n, source):
    """Exact BFS distances from `source` on a CSR graph; -1 marks unreachable."""
    dist = np.full(n, -1, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    degree = indptr[1] - indptr[0] if n > 0 else 0
    regular = n > 0 and np.all(np.diff(indptr) == degree)
    while frontier.size:
        if regular:
            nxt = nbr.reshape(n, degree)[frontier].ravel()
        else:
            nxt = np.concatenate([nbr[indptr[v]:indptr[v + 1]] for v in frontier])
        nxt = np.unique(nxt)
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = d + 1
        frontier = nxt
        d += 1
    return dist


def adj_matvec(indptr, nbr, x):
    """y[v] = sum of x over neighbors of v (parallel edges counted)."""
    if nbr.size == 0:
        return np.zeros_like(x)
    y = np.add.reduceat(x[nbr], indptr[:-1])
    # reduceat misbehaves on empty rows; patch them to zero
    empty = indptr[:-1] == indptr[1:]
    if empty.any():
        y[empty] = 0.0
    return y


def pair_scan_graph(indptr, nbr, X, maxd):
    """Scan all ordered vertex pairs of a connected CSR graph.

    For every graph distance d in 0..maxd returns the minimum squared
    Euclidean image distance over pairs at exactly distance d, with an
    arg pair, plus the maximum of graph-distance / image-distance over
    distinct pairs (the inverse-Lipschitz defect of the embedding X).
    """
    n = X.shape[0]
    min_img2 = np.full(maxd + 1, np.inf)
    argx = np.full(maxd + 1, -1, dtype=np.int64)
    argy = np.full(maxd + 1, -1, dtype=np.int64)
    max_ratio = 0.0
    rargx = -1
    rargy = -1
    for s in range(n):
        dist = bfs_distances(indptr, nbr, n, s)
        diff = X - X[s]
        img2 = np.einsum("ij,ij->i", diff, diff)
        for d in range(maxd + 1):
            sel = np.nonzero(dist == d)[0]
            if sel.size == 0:
                continue
            k = sel[np.argmin(img2[sel])]
            if img2[k] < min_img2[d]:
                min_img2[d] = img2[k]
                argx[d] = s
                argy[d] = k
        pos = dist > 0
        if pos.any():
            with np.errstate(divide="ignore"):
                ratios = dist[pos] / np.sqrt(img2[pos])
            k = int(np.argmax(ratios))
            if ratios[k] > max_ratio:
                max_ratio = float(ratios[k])
                idx = np.nonzero(pos)[0][k]
                rargx, rargy = s, int(idx)
    return min_img2, argx, argy, max_ratio, rargx, rargy
