"""The SL3 family over truncated polynomial rings: construction, Steinberg
identities, perfectness, and numerical spectral certificates.

Default generating set is the six elementary transvections X_{r,c}(1) plus
X_{1,2}(t) at level >= 2 (the "small" set).  The "large" alternative
(all of SL3(F_p) plus the X_{1,2}(t) cycle) makes near-complete graphs at
desk scale and is kept only as a sanity control.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import (Matrix3, RingElement, UsageError, commutator,
                      elementary_matrix, matrix_handle, matrix_identity,
                      ring_one, ring_t, GroupHandle)
from .cayley import CayleyGraph, bfs_closure, far_pair_table
from .perfect import derived_subgroup
from .spectral import SpectralData


LEVEL_CAPS = {2: 2, 3: 1}   # keeps every closure at n <= 5e4


def sl3_order(p: int, level: int) -> int:
    """|SL3(F_p[t]/(t^level))| = |SL3(F_p)| * p^(8(level-1))."""
    base = (p ** 3 - 1) * (p ** 3 - p) * (p ** 3 - p ** 2) // (p - 1)
    return base * p ** (8 * (level - 1))


def sl3_generators(p: int, level: int, genset: str = "small") -> list[tuple[str, Matrix3]]:
    one = ring_one(p, level)
    gens = [(f"x{r}{c}", elementary_matrix(r, c, one))
            for r in range(1, 4) for c in range(1, 4) if r != c]
    if level >= 2:
        gens.append(("x12t", elementary_matrix(1, 2, ring_t(p, level))))
    if genset == "small":
        return gens
    if genset == "large":
        small_handle = matrix_handle("tmp", p, 1, sl3_generators(p, 1, "small"))
        level1 = bfs_closure(small_handle, budget=sl3_order(p, 1))
        from .perfect import element_object

        big = []
        for v in range(1, level1.n):
            m1 = element_object(small_handle, level1, v)
            lifted = Matrix3(tuple(
                RingElement(p, tuple(e.coeffs) + (0,) * (level - 1)) for e in m1.entries))
            big.append((f"a{v}", lifted))
        if level >= 2:
            big.append(("x12t", elementary_matrix(1, 2, ring_t(p, level))))
        return big
    raise UsageError(f"unknown generating set {genset!r}")


def build_sl3(p: int, level: int, genset: str = "small",
              budget: Optional[int] = None) -> tuple[GroupHandle, CayleyGraph]:
    if p not in LEVEL_CAPS:
        raise UsageError("supported primes: 2, 3")
    if level < 1 or level > LEVEL_CAPS[p]:
        raise UsageError(f"p={p} supports levels 1..{LEVEL_CAPS[p]}")
    order = sl3_order(p, level)
    handle = matrix_handle(f"SL3(F{p}[t]/t^{level})", p, level,
                           sl3_generators(p, level, genset))
    graph = bfs_closure(handle, budget=budget or order)
    if graph.n != order:
        raise AssertionError(f"closure found {graph.n} elements, expected {order}")
    return handle, graph


def truncate_matrix(m: Matrix3, new_level: int) -> Matrix3:
    return Matrix3(tuple(RingElement(e.p, e.coeffs[:new_level]) for e in m.entries))


def check_quotient_compatibility(p: int) -> bool:
    """Truncating level-2 generators to level 1 and closing yields exactly
    the level-1 group."""
    gens2 = sl3_generators(p, 2, "small")
    truncated = [(n, truncate_matrix(g, 1)) for n, g in gens2]
    truncated = [(n, g) for n, g in truncated
                 if g.encode() != matrix_identity(p, 1).encode()]
    handle = matrix_handle("trunc", p, 1, truncated)
    graph = bfs_closure(handle, budget=sl3_order(p, 1) + 1)
    return graph.n == sl3_order(p, 1)


def check_perfect(handle: GroupHandle, graph: CayleyGraph) -> bool:
    _, is_perfect = derived_subgroup(handle, graph)
    return is_perfect


@dataclass
class SteinbergReport:
    p: int
    level: int
    trials: int
    additive_checked: int
    multiplicative_checked: int
    failures: int


def steinberg_check(p: int, level: int, trials: int, seed: int = 0) -> SteinbergReport:
    """X(P+Q) = X(P)X(Q) and X_{i,j}(PQ) = [X_{i,k}(P), X_{k,j}(Q)] for
    random P, Q over every valid index configuration; any failure raises."""
    rng = np.random.default_rng(seed)
    add = mult = 0
    perms = [(i, j, k) for i in (1, 2, 3) for j in (1, 2, 3) for k in (1, 2, 3)
             if len({i, j, k}) == 3]
    for _ in range(trials):
        P = RingElement(p, tuple(int(v) for v in rng.integers(0, p, level)))
        Q = RingElement(p, tuple(int(v) for v in rng.integers(0, p, level)))
        for (i, j, k) in perms:
            lhs = elementary_matrix(i, j, P + Q)
            rhs = elementary_matrix(i, j, P) * elementary_matrix(i, j, Q)
            if lhs.encode() != rhs.encode():
                raise AssertionError(f"additive Steinberg failed at ({i},{j})")
            add += 1
            lhs = elementary_matrix(i, j, P * Q)
            rhs = commutator(elementary_matrix(i, k, P), elementary_matrix(k, j, Q))
            if lhs.encode() != rhs.encode():
                raise AssertionError(f"multiplicative Steinberg failed at ({i},{k},{j})")
            mult += 1
    return SteinbergReport(p=p, level=level, trials=trials,
                           additive_checked=add, multiplicative_checked=mult,
                           failures=0)


@dataclass
class SpectralCertificate:
    name: str
    p: int
    level: int
    genset: str
    n: int
    d_reg: int
    lambda1: float
    residual: float
    diameter: int
    table: list[dict]            # {t, P_t, M_t}
    lower_bound: float           # max_t t / M(t)
    M_star: float                # min over t >= ceil(diam/2) of M(t)

    def to_json(self) -> str:
        return json.dumps({
            "name": self.name, "p": self.p, "level": self.level,
            "genset": self.genset, "n": self.n, "d_reg": self.d_reg,
            "lambda1": self.lambda1, "residual": self.residual,
            "diameter": self.diameter, "table": self.table,
            "lower_bound": self.lower_bound, "M_star": self.M_star,
            "M_star_derivation": "min over t >= ceil(diam/2) of "
                                 "sqrt(d_reg/(lambda1*P_t))",
        }, indent=2, sort_keys=True)


def certificate(graph: CayleyGraph, spectral: SpectralData, name: str,
                p: int, level: int, genset: str = "small") -> SpectralCertificate:
    """Poincare data for one level: C = d/(2 lambda1), the (t, P_t, M(t))
    table, the distortion lower bound and the family-constant component."""
    diam = graph.diameter()
    table = []
    lower = 0.0
    m_star_candidates = []
    for t, P in far_pair_table(graph):
        if P <= 0:
            continue
        M_t = math.sqrt(spectral.d_reg / (spectral.lambda1 * P))
        table.append({"t": t, "P_t": P, "M_t": M_t})
        if t >= 1:
            lower = max(lower, t / M_t)
        if t >= (diam + 1) // 2:
            m_star_candidates.append(M_t)
    return SpectralCertificate(
        name=name, p=p, level=level, genset=genset, n=graph.n,
        d_reg=graph.degree, lambda1=spectral.lambda1, residual=spectral.residual,
        diameter=diam, table=table, lower_bound=lower,
        M_star=min(m_star_candidates),
    )


def family_constant(certs: list[SpectralCertificate]) -> float:
    """Definition-style family constant: max over levels of M_star."""
    return max(c.M_star for c in certs)
