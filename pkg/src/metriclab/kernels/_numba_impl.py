"""Numba-accelerated kernels; signatures mirror ``_numpy_impl`` exactly."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def matp_mul_batch(A, b, p, level):
    m = A.shape[0]
    w = 9 * level
    out = np.zeros((m, w), dtype=np.uint8)
    for r in range(m):
        for i in range(3):
            for j in range(3):
                for u in range(level):
                    acc = 0
                    for k in range(3):
                        for v in range(u + 1):
                            acc += int(A[r, (3 * i + k) * level + v]) * int(b[(3 * k + j) * level + (u - v)])
                    out[r, (3 * i + j) * level + u] = acc % p
    return out


@njit(cache=True)
def perm_apply_batch(A, b):
    m, k = A.shape
    out = np.empty((m, k), dtype=A.dtype)
    for r in range(m):
        for x in range(k):
            out[r, x] = b[A[r, x]]
    return out


@njit(cache=True)
def bfs_distances(indptr, nbr, n, source):
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    queue[0] = source
    dist[source] = 0
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v]
        for e in range(indptr[v], indptr[v + 1]):
            u = nbr[e]
            if dist[u] < 0:
                dist[u] = dv + 1
                queue[tail] = u
                tail += 1
    return dist


@njit(cache=True)
def adj_matvec(indptr, nbr, x):
    n = indptr.shape[0] - 1
    y = np.zeros(n, dtype=np.float64)
    for v in range(n):
        acc = 0.0
        for e in range(indptr[v], indptr[v + 1]):
            acc += x[nbr[e]]
        y[v] = acc
    return y


@njit(cache=True)
def pair_scan_graph(indptr, nbr, X, maxd):
    n = X.shape[0]
    dim = X.shape[1]
    min_img2 = np.full(maxd + 1, np.inf)
    argx = np.full(maxd + 1, -1, dtype=np.int64)
    argy = np.full(maxd + 1, -1, dtype=np.int64)
    max_ratio = 0.0
    rargx = np.int64(-1)
    rargy = np.int64(-1)
    dist = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        for v in range(n):
            dist[v] = -1
        queue[0] = s
        dist[s] = 0
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            dv = dist[v]
            for e in range(indptr[v], indptr[v + 1]):
                u = nbr[e]
                if dist[u] < 0:
                    dist[u] = dv + 1
                    queue[tail] = u
                    tail += 1
        for y in range(n):
            d = dist[y]
            if d < 0 or d > maxd:
                continue
            img2 = 0.0
            for c in range(dim):
                t = X[y, c] - X[s, c]
                img2 += t * t
            if img2 < min_img2[d]:
                min_img2[d] = img2
                argx[d] = s
                argy[d] = y
            if d > 0:
                r = d / np.sqrt(img2) if img2 > 0 else np.inf
                if r > max_ratio:
                    max_ratio = r
                    rargx = np.int64(s)
                    rargy = np.int64(y)
    return min_img2, argx, argy, max_ratio, rargx, rargy
