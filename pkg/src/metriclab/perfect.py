"""Balanced-word ("perfect") norm on derived subgroups.

A word in the free group on the generators is balanced when every
generator occurs as often inverted as not; the perfect norm of g is the
least length of a balanced word evaluating to g.  All searches run on an
enumerated Cayley graph, so a BFS step is an edge hop: edge label k
encodes generator k//2, inverted when k is odd.
"""

from __future__ import annotations

import csv
from typing import Iterable, Optional, Sequence

import numpy as np

from .algebra import GroupHandle, UsageError
from .cayley import CayleyGraph


class UnknownBeyondBudgetError(RuntimeError):
    """The norm exceeds the search budget: not a failure, just unknown."""

    def __init__(self, budget: int):
        super().__init__(f"perfect norm exceeds budget {budget}")
        self.budget = budget


class NotInDerivedSubgroupError(ValueError):
    pass


def exponent_vector(word: Sequence[int], gen_count: int) -> tuple[int, ...]:
    """Componentwise signed letter counts; letters are signed 1-based indices."""
    out = [0] * gen_count
    for letter in word:
        if letter == 0 or abs(letter) > gen_count:
            raise UsageError(f"letter {letter} out of range")
        out[abs(letter) - 1] += 1 if letter > 0 else -1
    return tuple(out)


def is_balanced(word: Sequence[int], gen_count: int) -> bool:
    return all(v == 0 for v in exponent_vector(word, gen_count))


def _edge_moves(graph: CayleyGraph) -> list[tuple[int, int, int]]:
    """(label index, generator index, sign) for each symmetrized generator."""
    return [(k, k // 2, +1 if k % 2 == 0 else -1) for k in range(graph.degree)]


def perfect_norm_table(graph: CayleyGraph, budget: int) -> dict[int, int]:
    """Exact perfect norms of every element reachable within ``budget``.

    BFS over states (vertex, exponent vector); a state at depth L is
    expandable only while L + sum|v| <= budget, since each remaining letter
    changes the imbalance by one.
    """
    g = graph.gen_count
    zero = (0,) * g
    moves = _edge_moves(graph)
    norms: dict[int, int] = {0: 0}
    seen = {(0, zero)}
    frontier: list[tuple[int, tuple[int, ...]]] = [(0, zero)]
    depth = 0
    while frontier and depth < budget:
        depth += 1
        nxt: list[tuple[int, tuple[int, ...]]] = []
        for v, vec in frontier:
            base = graph.indptr[v]
            for k, gi, sign in moves:
                u = int(graph.nbr[base + k])
                w = list(vec)
                w[gi] += sign
                imbalance = sum(abs(x) for x in w)
                if depth + imbalance > budget:
                    continue
                state = (u, tuple(w))
                if state in seen:
                    continue
                seen.add(state)
                if imbalance == 0 and u not in norms:
                    norms[u] = depth
                nxt.append(state)
        frontier = nxt
    return norms


def perfect_norm_word(graph: CayleyGraph, target: int, budget: int) -> list[int]:
    """A minimal balanced word (signed 1-based letters) reaching ``target``."""
    g = graph.gen_count
    zero = (0,) * g
    if target == 0:
        return []
    moves = _edge_moves(graph)
    start = (0, zero)
    parent: dict[tuple, tuple] = {start: None}
    frontier = [start]
    depth = 0
    while frontier and depth < budget:
        depth += 1
        nxt = []
        for state in frontier:
            v, vec = state
            base = graph.indptr[v]
            for k, gi, sign in moves:
                u = int(graph.nbr[base + k])
                w = list(vec)
                w[gi] += sign
                if depth + sum(abs(x) for x in w) > budget:
                    continue
                child = (u, tuple(w))
                if child in parent:
                    continue
                parent[child] = (state, (gi + 1) * sign)
                if child == (target, zero):
                    word = []
                    cur = child
                    while parent[cur] is not None:
                        cur, letter = parent[cur]
                        word.append(letter)
                    return word[::-1]
                nxt.append(child)
        frontier = nxt
    raise UnknownBeyondBudgetError(budget)


def perfect_norm_bidir(graph: CayleyGraph, target: int, cap: int) -> int:
    """Meet-in-the-middle perfect norm of a single element."""
    g = graph.gen_count
    zero = (0,) * g
    if target == 0:
        return 0
    moves = _edge_moves(graph)

    def expand(layer, known, depth, budget):
        out = []
        for v, vec in layer:
            base = graph.indptr[v]
            for k, gi, sign in moves:
                u = int(graph.nbr[base + k])
                w = list(vec)
                w[gi] += sign
                if depth + sum(abs(x) for x in w) > budget:
                    continue
                state = (u, tuple(w))
                if state in known:
                    continue
                known[state] = depth
                out.append(state)
        return out

    # forward states (eval(p), exp(p)); backward states (x, exp(q)) with
    # x * eval(q) = target; p q balanced and meeting means exp(p) = -exp(q)
    fwd = {(0, zero): 0}
    bwd = {(target, zero): 0}
    fl = [(0, zero)]
    bl = [(target, zero)]
    fd = bd = 0
    best = None

    def meets(new_states, other, flip, new_depth):
        nonlocal best
        for v, vec in new_states:
            probe = (v, tuple(-x for x in vec)) if flip else (v, vec)
            d = other.get(probe)
            if d is not None:
                total = new_depth + d
                if best is None or total < best:
                    best = total

    # backward moves mirror forward ones: prepend s^e to the suffix
    while True:
        if best is not None and best <= min(fd, bd) + 1:
            return best
        if fd + bd >= cap or (not fl and not bl):
            break
        if (len(fl) <= len(bl) and fl) or not bl:
            fd += 1
            fl = expand(fl, fwd, fd, cap)
            meets(fl, bwd, True, fd)
        else:
            bd += 1
            new = []
            for v, vec in bl:
                base = graph.indptr[v]
                for k, gi, sign in moves:
                    # x' = x * s^{-sign} via the paired edge label
                    kk = k ^ 1
                    u = int(graph.nbr[base + kk])
                    w = list(vec)
                    w[gi] += sign
                    if bd + sum(abs(x) for x in w) > cap:
                        continue
                    state = (u, tuple(w))
                    if state in bwd:
                        continue
                    bwd[state] = bd
                    new.append(state)
            bl = new
            meets(bl, fwd, True, bd)
    if best is not None:
        return best
    raise UnknownBeyondBudgetError(cap)


def perfect_norm_bidir_objects(identity, generators: Sequence, target, cap: int) -> int:
    """Perfect norm search over raw group elements (no enumerated graph).

    ``generators`` are the group generators as objects; the state space is
    (element encoding, exponent vector) and both frontiers expand by
    right-multiplication, as in :func:`perfect_norm_bidir`.
    """
    gcount = len(generators)
    zero = (0,) * gcount
    id_enc = identity.encode()
    t_enc = target.encode()
    if t_enc == id_enc:
        return 0
    moves = []
    for gi, g in enumerate(generators):
        moves.append((g, gi, +1))
        moves.append((g.inverse(), gi, -1))

    fwd: dict[tuple, int] = {(id_enc, zero): 0}
    bwd: dict[tuple, int] = {(t_enc, zero): 0}
    fl = [(identity, zero)]
    bl = [(target, zero)]
    fd = bd = 0
    best = None

    def check(states, other, depth):
        nonlocal best
        for obj, vec in states:
            probe = (obj.encode(), tuple(-x for x in vec))
            d = other.get(probe)
            if d is not None:
                total = depth + d
                if best is None or total < best:
                    best = total

    while True:
        if best is not None and best <= min(fd, bd) + 1:
            return best
        if fd + bd >= cap or (not fl and not bl):
            break
        forward_turn = (len(fl) <= len(bl) and fl) or not bl
        if forward_turn:
            fd += 1
            new = []
            for obj, vec in fl:
                for g, gi, sign in moves:
                    w = list(vec)
                    w[gi] += sign
                    if fd + sum(abs(x) for x in w) > cap:
                        continue
                    nobj = obj * g
                    state = (nobj.encode(), tuple(w))
                    if state in fwd:
                        continue
                    fwd[state] = fd
                    new.append((nobj, tuple(w)))
            fl = new
            check(fl, bwd, fd)
        else:
            bd += 1
            new = []
            for obj, vec in bl:
                for g, gi, sign in moves:
                    w = list(vec)
                    w[gi] += sign
                    if bd + sum(abs(x) for x in w) > cap:
                        continue
                    nobj = obj * g.inverse() if sign > 0 else obj * generators[gi]
                    state = (nobj.encode(), tuple(w))
                    if state in bwd:
                        continue
                    bwd[state] = bd
                    new.append((nobj, tuple(w)))
            bl = new
            check(bl, fwd, bd)
    if best is not None:
        return best
    raise UnknownBeyondBudgetError(cap)


def derived_subgroup(handle: GroupHandle, graph: CayleyGraph) -> tuple[set[int], bool]:
    """Derived subgroup as vertex indices, with the perfectness flag.

    Computed as the normal closure of generator commutators: closure under
    right multiplication by the seed commutators and conjugation by
    generators (both realized as index permutations).
    """
    gens = [g for _, g in handle.generators]
    sym = []
    for g in gens:
        sym.append(g)
        sym.append(g.inverse())
    seed_words: list[list[int]] = []
    for i in range(len(sym)):
        for j in range(len(sym)):
            if i != j:
                # [si, sj] as an edge-label word: si^-1 sj^-1 si sj, where the
                # inverse of the label-k generator carries label k^1
                seed_words.append([i ^ 1, j ^ 1, i, j])
    conj_tables = _conjugation_tables(handle, graph)

    members = {0}
    frontier = [0]
    while frontier:
        new = []
        for v in frontier:
            for word in seed_words:
                u = _walk(graph, v, word)
                if u not in members:
                    members.add(u)
                    new.append(u)
            for table in conj_tables:
                u = int(table[v])
                if u not in members:
                    members.add(u)
                    new.append(u)
        frontier = new
    return members, len(members) == graph.n


def _walk(graph: CayleyGraph, v: int, labels: Iterable[int]) -> int:
    for k in labels:
        v = int(graph.nbr[graph.indptr[v] + k])
    return v


def _conjugation_tables(handle: GroupHandle, graph: CayleyGraph) -> list[np.ndarray]:
    """For each symmetrized generator s, the index permutation v -> s^-1 v s."""
    tables = []
    n = graph.n
    sym = []
    for _, g in handle.generators:
        sym.append(g)
        sym.append(g.inverse())
    if handle.packed is not None:
        codec = handle.packed
        packed = np.stack([np.frombuffer(e, dtype=codec.dtype) for e in graph.element_bytes])
        for k, s in enumerate(sym):
            rows = _left_mul_packed(codec, codec.encode(s.inverse()), packed, handle)
            out = np.empty(n, dtype=np.int64)
            for v in range(n):
                li = graph.index[rows[v].tobytes()]
                out[v] = int(graph.nbr[graph.indptr[li] + k])
            tables.append(out)
    else:
        objs = [_decode_via_walk(handle, graph, v) for v in range(n)]
        for k, s in enumerate(sym):
            sinv = s.inverse()
            out = np.empty(n, dtype=np.int64)
            for v in range(n):
                out[v] = graph.index[handle.encode(sinv * objs[v] * s)]
            tables.append(out)
    return tables


def _left_mul_packed(codec, brow: np.ndarray, packed: np.ndarray, handle: GroupHandle) -> np.ndarray:
    """Indices of b * elem(v) for all v, using only right-multiplied batches."""
    if handle.kind == "matrix":
        # (b A)^T = A^T b^T: transpose is a fixed column permutation
        level = packed.shape[1] // 9
        perm = np.concatenate([np.arange(level) + level * (3 * (i % 3) + i // 3)
                               for i in range(9)])
        At = packed[:, perm]
        bt = brow[perm]
        rows = codec.mul_batch(At, bt)[:, perm]
    elif handle.kind == "permutation":
        # (b * a)(x) = a(b(x)): gather columns of each row through b
        rows = packed[:, brow.astype(np.int64)]
    else:
        raise UsageError(f"no packed left multiply for kind {handle.kind}")
    # map rows back to indices lazily via the graph dict
    return rows


def left_multiplication_indices(handle: GroupHandle, graph: CayleyGraph, g) -> np.ndarray:
    """Vertex table of v -> index(g * elem(v))."""
    n = graph.n
    out = np.empty(n, dtype=np.int64)
    if handle.packed is not None:
        codec = handle.packed
        packed = np.stack([np.frombuffer(e, dtype=codec.dtype) for e in graph.element_bytes])
        rows = _left_mul_packed(codec, codec.encode(g), packed, handle)
        for v in range(n):
            out[v] = graph.index[rows[v].tobytes()]
    else:
        for v in range(n):
            obj = _decode_via_walk(handle, graph, v)
            out[v] = graph.index[handle.encode(g * obj)]
    return out


def _decode_via_walk(handle: GroupHandle, graph: CayleyGraph, v: int):
    """Reconstruct the element object at vertex v by walking a BFS geodesic."""
    # walk backwards to the identity greedily along distance-decreasing edges
    dist = graph.dist_from_identity()
    path = []
    cur = v
    while dist[cur] > 0:
        base = graph.indptr[cur]
        for k in range(graph.degree):
            u = int(graph.nbr[base + k])
            if dist[u] == dist[cur] - 1:
                path.append(k)
                cur = u
                break
    gens = []
    for _, g in handle.generators:
        gens.append(g)
        gens.append(g.inverse())
    out = handle.identity
    for k in reversed(path):
        # stepping down used v -> v * s_k, so rebuilding up multiplies by s_k^-1
        out = out * gens[k ^ 1]
    return out


def element_object(handle: GroupHandle, graph: CayleyGraph, v: int):
    return _decode_via_walk(handle, graph, v)


def perfect_norm(handle: GroupHandle, graph: CayleyGraph, v: int, budget: int,
                 derived: Optional[set[int]] = None) -> int:
    """Exact perfect norm of vertex v, or UnknownBeyondBudgetError."""
    if derived is None:
        derived, _ = derived_subgroup(handle, graph)
    if v not in derived:
        raise NotInDerivedSubgroupError(f"vertex {v} is not in the derived subgroup")
    return perfect_norm_bidir(graph, v, budget)


def generator_balanced_norms(graph: CayleyGraph, cap: int = 12) -> dict[str, int]:
    """Shortest balanced word length for each generator (the J constant data)."""
    out = {}
    for gi in range(graph.gen_count):
        v = int(graph.nbr[graph.indptr[0] + 2 * gi])
        name = graph.edge_labels[2 * gi]
        out[name] = perfect_norm_bidir(graph, v, cap)
    return out


def perfect_constant_J(graph: CayleyGraph, cap: int = 12) -> int:
    return max(generator_balanced_norms(graph, cap).values())


def export_norm_table(graph: CayleyGraph, norms: dict[int, int], path) -> None:
    dist = graph.dist_from_identity()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["element", "word_norm", "perfect_norm"])
        for v in sorted(norms):
            writer.writerow([graph.element_bytes[v].hex(), int(dist[v]), norms[v]])


def naive_balanced_norms(handle: GroupHandle, graph: CayleyGraph, budget: int) -> dict[int, int]:
    """Independent oracle: enumerate every word up to ``budget`` and keep
    the balanced ones.  Exponential; only for tiny groups."""
    norms = {0: 0}
    g = graph.gen_count
    words: list[tuple[tuple[int, ...], int]] = [((), 0)]
    for depth in range(1, budget + 1):
        nxt = []
        for word, v in words:
            base = graph.indptr[v]
            for k in range(graph.degree):
                u = int(graph.nbr[base + k])
                nxt.append((word + (k,), u))
        words = nxt
        for word, v in words:
            letters = [(k // 2 + 1) * (1 if k % 2 == 0 else -1) for k in word]
            if v not in norms and is_balanced(letters, g):
                norms[v] = depth
    return norms
