"""Second-smallest Laplacian eigenvalue of a connected regular graph.

Lanczos with full reorthogonalization, run on the orthogonal complement of
the constant vector.  The combinatorial Laplacian is L = d_reg I - A with
parallel edges counted in A.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .cayley import CayleyGraph


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, best: float, residual: float, iterations: int):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SpectralData:
    lambda1: float
    d_reg: int
    residual: float
    iterations: int

    def __post_init__(self):
        if not (0.0 < self.lambda1 <= 2.0 * self.d_reg + 1e-9):
            raise ValueError(f"lambda1 {self.lambda1} outside (0, 2d]")


def _laplacian_matvec(graph: CayleyGraph, x: np.ndarray) -> np.ndarray:
    return graph.degree * x - kernels.adj_matvec(graph.indptr, graph.nbr, x)


def spectral_gap(graph: CayleyGraph, tol: float = 1e-8, seed: int = 0,
                 max_iter: int | None = None) -> SpectralData:
    """Smallest eigenvalue of the Laplacian restricted to 1-perp.

    Deterministic given ``seed``; the Ritz residual ||Lv - lam v|| is driven
    below ``tol`` or ConvergenceError carries the best estimate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    graph.check_connected()
    n = graph.n
    if max_iter is None:
        max_iter = min(n - 1, int(50 * np.sqrt(n)) + 20)
    # memory guard: full reorthogonalization keeps every basis vector
    max_iter = min(max_iter, max(32, int(1.5e9 / (8 * n))))

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v -= v.mean()
    v /= np.linalg.norm(v)

    V = np.empty((min(64, max_iter + 1), n))
    V[0] = v
    alphas: list[float] = []
    betas: list[float] = []
    best = np.inf
    best_res = np.inf

    for j in range(max_iter):
        if j + 1 >= V.shape[0]:
            V = np.vstack([V, np.empty_like(V)])
        w = _laplacian_matvec(graph, V[j])
        if j > 0:
            w -= betas[-1] * V[j - 1]
        a = float(w @ V[j])
        alphas.append(a)
        w -= a * V[j]
        # full reorthogonalization (twice) plus constant-vector deflation
        basis = V[:j + 1]
        for _ in range(2):
            w -= basis.T @ (basis @ w)
            w -= w.mean()
        b = float(np.linalg.norm(w))

        if (j + 1) % 5 == 0 or b <= tol * 1e-3 or j == max_iter - 1:
            T = np.diag(alphas)
            if betas:
                off = np.asarray(betas)
                T += np.diag(off, 1) + np.diag(off, -1)
            evals, evecs = np.linalg.eigh(T)
            theta = float(evals[0])
            y = evecs[:, 0]
            ritz = basis.T @ y
            ritz /= np.linalg.norm(ritz)
            res = float(np.linalg.norm(_laplacian_matvec(graph, ritz) - theta * ritz))
            if res < best_res:
                best, best_res = theta, res
            if res <= tol:
                return SpectralData(lambda1=theta, d_reg=graph.degree,
                                    residual=res, iterations=j + 1)
        if b <= tol * 1e-3:
            break
        betas.append(b)
        V[j + 1] = w / b

    raise ConvergenceError(
        f"Lanczos did not reach residual {tol} in {max_iter} iterations",
        best=best, residual=best_res, iterations=max_iter)


def dense_lambda1(graph: CayleyGraph) -> float:
    """Full-spectrum cross-check for small graphs."""
    n = graph.n
    if n > 4000:
        raise ValueError("dense path is for small graphs")
    A = np.zeros((n, n))
    for v in range(n):
        for u in graph.neighbors(v):
            A[v, u] += 1.0
    L = graph.degree * np.eye(n) - A
    evals = np.linalg.eigvalsh(L)
    return float(evals[1])
