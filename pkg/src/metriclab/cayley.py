"""BFS enumeration of finite groups from generators, word metrics, growth
functions and far-pair statistics on the resulting Cayley graphs.

Generator multisets are symmetrized (s and s^-1 both listed, so involutions
contribute parallel edges); every graph here is regular of degree
2 * #generators and vertex 0 is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .algebra import GroupHandle, UsageError


class PartialClosureError(RuntimeError):
    """Budget exceeded; carries the enumerated prefix encodings."""

    def __init__(self, message: str, prefix: list[bytes]):
        super().__init__(message)
        self.prefix = prefix


class DisconnectedGraphError(ValueError):
    pass


@dataclass
class GrowthFunction:
    """Cumulative ball sizes gamma(0..R)."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        if self.sizes[0] != 1:
            raise UsageError("gamma(0) must be 1")
        if any(b < a for a, b in zip(self.sizes, self.sizes[1:])):
            raise UsageError("growth function must be nondecreasing")

    def __getitem__(self, r: int) -> int:
        return self.sizes[r]

    def __len__(self) -> int:
        return len(self.sizes)


@dataclass
class CayleyGraph:
    """Labeled regular adjacency over canonicalized elements (CSR form).

    Edge (v, v*s) carries label index k into ``edge_labels``; labels come in
    (generator, inverse) pairs in generator order.
    """

    n: int
    enc_len: int
    element_bytes: list[bytes]
    indptr: np.ndarray
    nbr: np.ndarray
    lbl: np.ndarray
    edge_labels: list[str]
    gen_count: int
    carrier_desc: str
    vertex_transitive: bool = False
    handle: Optional[GroupHandle] = None
    index: dict = field(default_factory=dict, repr=False)
    _dist0: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return len(self.edge_labels)

    def element_index(self, enc: bytes) -> int:
        return self.index[enc]

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr[self.indptr[v]:self.indptr[v + 1]]

    def dist_from_identity(self) -> np.ndarray:
        if self._dist0 is None:
            self._dist0 = kernels.bfs_distances(self.indptr, self.nbr, self.n, 0)
        return self._dist0

    def diameter(self) -> int:
        if not self.vertex_transitive:
            return max(int(kernels.bfs_distances(self.indptr, self.nbr, self.n, s).max())
                       for s in range(self.n))
        return int(self.dist_from_identity().max())

    def check_connected(self):
        if (self.dist_from_identity() < 0).any():
            raise DisconnectedGraphError("graph is not connected")


def bfs_closure(handle: GroupHandle, budget: int = 200_000) -> CayleyGraph:
    """Enumerate the full group generated by ``handle``'s generators.

    The element table is ordered by (BFS layer, canonical encoding) so the
    result is deterministic.  Raises PartialClosureError past ``budget``.
    """
    if budget < 1:
        raise UsageError("budget must be >= 1")
    if handle.packed is not None:
        layers = _closure_layers_packed(handle, budget)
        objects = None
    else:
        layers, objects = _closure_layers_generic(handle, budget)

    elements: list[bytes] = []
    for layer in layers:
        elements.extend(sorted(layer))
    index = {enc: i for i, enc in enumerate(elements)}
    n = len(elements)

    sym: list[tuple[str, object]] = []
    for name, g in handle.generators:
        sym.append((name, g))
        sym.append((name + "^-1", g.inverse()))
    deg = len(sym)

    nbr = np.empty(n * deg, dtype=np.int64)
    lbl = np.empty(n * deg, dtype=np.uint16)
    if handle.packed is not None:
        codec = handle.packed
        packed = np.stack([np.frombuffer(e, dtype=codec.dtype) for e in elements])
        for k, (_, g) in enumerate(sym):
            rows = codec.mul_batch(packed, codec.encode(g))
            for v in range(n):
                nbr[v * deg + k] = index[rows[v].tobytes()]
                lbl[v * deg + k] = k
    else:
        for v, enc in enumerate(elements):
            a = objects[enc]
            for k, (_, g) in enumerate(sym):
                nbr[v * deg + k] = index[handle.encode(a * g)]
                lbl[v * deg + k] = k

    indptr = np.arange(0, (n + 1) * deg, deg, dtype=np.int64)
    return CayleyGraph(
        n=n,
        enc_len=len(elements[0]),
        element_bytes=elements,
        indptr=indptr,
        nbr=nbr,
        lbl=lbl,
        edge_labels=[name for name, _ in sym],
        gen_count=len(handle.generators),
        carrier_desc=handle.describe(),
        vertex_transitive=True,
        handle=handle,
        index=index,
    )


def _closure_layers_packed(handle: GroupHandle, budget: int) -> list[set[bytes]]:
    codec = handle.packed
    gens = [codec.encode(g) for _, g in handle.generators]
    gens += [codec.encode(g.inverse()) for _, g in handle.generators]
    seen = {handle.encode(handle.identity)}
    layers = [set(seen)]
    frontier = np.stack([codec.encode(handle.identity)])
    while frontier.shape[0]:
        new: set[bytes] = set()
        rows = []
        for g in gens:
            rows.append(codec.mul_batch(frontier, g))
        cand = np.concatenate(rows, axis=0)
        for row in cand:
            enc = row.tobytes()
            if enc not in seen:
                seen.add(enc)
                new.add(enc)
                if len(seen) > budget:
                    raise PartialClosureError(
                        f"closure budget {budget} exceeded", sorted(seen))
        if not new:
            break
        layers.append(new)
        frontier = np.stack([np.frombuffer(e, dtype=codec.dtype) for e in sorted(new)])
    return layers


def _closure_layers_generic(handle: GroupHandle, budget: int):
    gens = [g for _, g in handle.generators]
    gens += [g.inverse() for g in gens[:len(handle.generators)]]
    ident = handle.identity
    objects = {handle.encode(ident): ident}
    layers = [{handle.encode(ident)}]
    frontier = [ident]
    while frontier:
        new = {}
        for a in frontier:
            for g in gens:
                b = a * g
                enc = handle.encode(b)
                if enc not in objects and enc not in new:
                    new[enc] = b
                    if len(objects) + len(new) > budget:
                        raise PartialClosureError(
                            f"closure budget {budget} exceeded",
                            sorted(set(objects) | set(new)))
        if not new:
            break
        layers.append(set(new))
        objects.update(new)
        frontier = [new[enc] for enc in sorted(new)]
    return layers, objects


def word_distance(graph: CayleyGraph, x: int, y: int) -> int:
    if not (0 <= x < graph.n and 0 <= y < graph.n):
        raise UsageError("vertex out of range")
    dist = kernels.bfs_distances(graph.indptr, graph.nbr, graph.n, x)
    return int(dist[y])


def growth_function(graph: CayleyGraph, R: int) -> GrowthFunction:
    if R < 0:
        raise UsageError("R must be >= 0")
    dist = graph.dist_from_identity()
    hist = np.bincount(dist[dist >= 0], minlength=R + 1)
    return GrowthFunction(tuple(int(hist[:r + 1].sum()) for r in range(R + 1)))


def distance_histogram(graph: CayleyGraph) -> np.ndarray:
    """Counts of ordered pairs per distance, divided out by symmetry.

    For vertex-transitive graphs this is n * (single-source histogram);
    otherwise it falls back to per-source BFS.
    """
    if graph.vertex_transitive:
        dist = graph.dist_from_identity()
        graph.check_connected()
        hist = np.bincount(dist)
        return hist.astype(np.int64) * graph.n
    total = None
    for s in range(graph.n):
        d = kernels.bfs_distances(graph.indptr, graph.nbr, graph.n, s)
        if (d < 0).any():
            raise DisconnectedGraphError("graph is not connected")
        h = np.bincount(d)
        if total is None:
            total = h.astype(np.int64)
        elif h.size > total.size:
            h = h.astype(np.int64)
            h[:total.size] += total
            total = h
        else:
            total[:h.size] += h
    return total


def far_pair_fraction(graph: CayleyGraph, t: int) -> float:
    """P_t = #{ordered (x, y): d(x,y) >= t} / n^2."""
    if t <= 0:
        return 1.0
    hist = distance_histogram(graph)
    if t >= hist.size:
        return 0.0
    return float(hist[t:].sum()) / float(graph.n) ** 2


def far_pair_table(graph: CayleyGraph) -> list[tuple[int, float]]:
    hist = distance_histogram(graph)
    n2 = float(graph.n) ** 2
    suffix = np.cumsum(hist[::-1])[::-1]
    return [(t, float(suffix[t]) / n2) for t in range(hist.size)]


def cycle_graph(n: int) -> CayleyGraph:
    """Plain n-cycle built directly in CSR form (non-group test fixture)."""
    nbr = np.empty(2 * n, dtype=np.int64)
    lbl = np.tile(np.array([0, 1], dtype=np.uint16), n)
    for v in range(n):
        nbr[2 * v] = (v + 1) % n
        nbr[2 * v + 1] = (v - 1) % n
    return CayleyGraph(
        n=n, enc_len=4,
        element_bytes=[v.to_bytes(4, "little") for v in range(n)],
        indptr=np.arange(0, 2 * (n + 1), 2, dtype=np.int64),
        nbr=nbr, lbl=lbl, edge_labels=["s", "s^-1"], gen_count=1,
        carrier_desc=f"cycle:{n}", vertex_transitive=True,
        index={v.to_bytes(4, "little"): v for v in range(n)},
    )


def complete_graph(n: int) -> CayleyGraph:
    nbr = np.empty(n * (n - 1), dtype=np.int64)
    lbl = np.zeros(n * (n - 1), dtype=np.uint16)
    pos = 0
    for v in range(n):
        for u in range(n):
            if u != v:
                nbr[pos] = u
                lbl[pos] = 0
                pos += 1
    return CayleyGraph(
        n=n, enc_len=4,
        element_bytes=[v.to_bytes(4, "little") for v in range(n)],
        indptr=np.arange(0, (n + 1) * (n - 1), n - 1, dtype=np.int64),
        nbr=nbr, lbl=lbl, edge_labels=["e"] * (n - 1), gen_count=n - 1,
        carrier_desc=f"complete:{n}", vertex_transitive=True,
        index={v.to_bytes(4, "little"): v for v in range(n)},
    )


def path_graph(n: int) -> CayleyGraph:
    """Path 0-1-...-(n-1); irregular, not vertex-transitive."""
    indptr = [0]
    nbr = []
    lbl = []
    for v in range(n):
        if v > 0:
            nbr.append(v - 1)
            lbl.append(1)
        if v < n - 1:
            nbr.append(v + 1)
            lbl.append(0)
        indptr.append(len(nbr))
    return CayleyGraph(
        n=n, enc_len=4,
        element_bytes=[v.to_bytes(4, "little") for v in range(n)],
        indptr=np.asarray(indptr, dtype=np.int64),
        nbr=np.asarray(nbr, dtype=np.int64),
        lbl=np.asarray(lbl, dtype=np.uint16),
        edge_labels=["s", "s^-1"], gen_count=1,
        carrier_desc=f"path:{n}", vertex_transitive=False,
        index={v.to_bytes(4, "little"): v for v in range(n)},
    )
