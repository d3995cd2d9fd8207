"""W = <Grigorchuk, f> inside B^X x| Grigorchuk, for B a restricted product
of finite factors times an order-adjusting cyclic group.

W itself is infinite: everything here works with BFS balls of the finite
approximants W_i = <G, f_i> (f_i carrying the first i placed values), per
the ball-coincidence statement that justifies treating them as W locally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .algebra import GroupHandle, lcm
from .cayley import CayleyGraph, GrowthFunction
from .grigorchuk import (GENS, GRIG_IDENTITY, GrigWord, Ray, act_on_ray,
                         ball_signature, find_rectifier, marked_ray,
                         schreier_ball, schreier_geodesic_word, UndecidedError)
from . import perfect as perfect_mod


class PlanError(RuntimeError):
    pass


@dataclass(frozen=True)
class BElement:
    """Element of (prod' H_i) x C_N: non-identity factor parts plus a z-power."""

    parts: tuple[tuple[int, bytes], ...]  # (factor id, element encoding), sorted
    zpow: int
    zmod: int

    def encode(self) -> bytes:
        chunks = [self.zpow.to_bytes(4, "little")]
        for fid, enc in self.parts:
            chunks.append(fid.to_bytes(2, "little"))
            chunks.append(len(enc).to_bytes(4, "little"))
            chunks.append(enc)
        return b"".join(chunks)

    def is_identity(self) -> bool:
        return not self.parts and self.zpow == 0


@dataclass(frozen=True)
class WElement:
    """(finitely supported function X -> B, Grigorchuk element)."""

    fun: tuple[tuple[str, BElement], ...]  # (ray prefix, value), sorted
    g: GrigWord

    def encode(self) -> bytes:
        g = self.g.encode()
        chunks = [len(g).to_bytes(4, "little"), g]
        for prefix, val in self.fun:
            entry = prefix.encode() + b"\x00" + val.encode()
            chunks.append(len(entry).to_bytes(4, "little"))
            chunks.append(entry)
        return b"".join(chunks)

    def support(self) -> list[Ray]:
        return [Ray(p) for p, _ in self.fun]

    def is_identity(self) -> bool:
        return not self.fun and not self.g.word


@dataclass
class FactorSpec:
    fid: int
    name: str
    handle: GroupHandle
    graph: CayleyGraph
    gen_names: list[str]
    gen_indices: list[int]   # vertex index of each generator, after padding
    gen_orders: list[int]
    _objects: dict = field(default_factory=dict, repr=False)

    def obj(self, vertex: int):
        got = self._objects.get(vertex)
        if got is None:
            got = perfect_mod.element_object(self.handle, self.graph, vertex)
            self._objects[vertex] = got
        return got


@dataclass
class PlacementPlan:
    """Placement bookkeeping: factor generators b_k at rays x_{n(k)}.

    Global index k (1-based) runs over all factor generators, block by
    block; block i of width d occupies indices off_i+1 .. off_i+d and its
    designated base is x_{n(off_i+d)}.
    """

    factors: list[FactorSpec]
    width: int
    N: int
    eps: list[float]
    n_values: list[int] = field(default_factory=list)
    m_values: list[int] = field(default_factory=list)
    choose_witnesses: list[dict] = field(default_factory=list)

    @property
    def total_indices(self) -> int:
        return self.width * len(self.factors)

    def block_indices(self, block: int) -> list[int]:
        off = self.width * block
        return list(range(off + 1, off + self.width + 1))

    def assignment(self) -> list[tuple[int, int, int]]:
        """(global index k, factor id, generator slot j)."""
        out = []
        for b, spec in enumerate(self.factors):
            for j, k in enumerate(self.block_indices(b)):
                out.append((k, spec.fid, j))
        return out

    def b_value(self, k: int) -> BElement:
        """b_k = t_{i,j} z for global index k."""
        block = (k - 1) // self.width
        j = (k - 1) % self.width
        spec = self.factors[block]
        enc = spec.graph.element_bytes[spec.gen_indices[j]]
        return BElement(((spec.fid, enc),), 1 % self.N, self.N)

    # -- B arithmetic -------------------------------------------------------

    def _factor(self, fid: int) -> FactorSpec:
        return self.factors[fid]

    def b_identity(self) -> BElement:
        return BElement((), 0, self.N)

    def b_singleton(self, fid: int, enc: bytes, zpow: int = 0) -> BElement:
        """Single-factor value with identity parts pruned."""
        spec = self._factor(fid)
        if enc == spec.handle.encode(spec.handle.identity):
            return BElement((), zpow % self.N, self.N)
        return BElement(((fid, enc),), zpow % self.N, self.N)

    def b_mul(self, u: BElement, v: BElement) -> BElement:
        vals = dict(u.parts)
        for fid, enc in v.parts:
            if fid in vals:
                spec = self._factor(fid)
                a = spec.obj(spec.graph.index[vals[fid]])
                b = spec.obj(spec.graph.index[enc])
                prod = spec.handle.encode(a * b)
                if prod == spec.handle.encode(spec.handle.identity):
                    del vals[fid]
                else:
                    vals[fid] = prod
            else:
                vals[fid] = enc
        return BElement(tuple(sorted(vals.items())), (u.zpow + v.zpow) % self.N, self.N)

    def b_inv(self, u: BElement) -> BElement:
        vals = {}
        for fid, enc in u.parts:
            spec = self._factor(fid)
            a = spec.obj(spec.graph.index[enc])
            vals[fid] = spec.handle.encode(a.inverse())
        return BElement(tuple(sorted(vals.items())), (-u.zpow) % self.N, self.N)

    # -- W arithmetic -------------------------------------------------------

    def w_identity(self) -> WElement:
        return WElement((), GRIG_IDENTITY)

    def w_from_fun(self, values: dict[Ray, BElement], g: GrigWord = GRIG_IDENTITY) -> WElement:
        items = [(r.prefix, v) for r, v in values.items() if not v.is_identity()]
        return WElement(tuple(sorted(items)), g)

    def w_mul(self, A: WElement, B: WElement) -> WElement:
        """(f, g)(f', g') = (x -> f(x) f'(x g), g g')."""
        ginv = A.g.inverse()
        vals: dict[str, BElement] = dict(A.fun)
        for prefix, val in B.fun:
            x = act_on_ray(ginv, Ray(prefix)).prefix
            if x in vals:
                prod = self.b_mul(vals[x], val)
                if prod.is_identity():
                    del vals[x]
                else:
                    vals[x] = prod
            else:
                vals[x] = val
        return WElement(tuple(sorted(vals.items())), A.g * B.g)

    def w_inv(self, A: WElement) -> WElement:
        g = A.g
        vals = {}
        for prefix, val in A.fun:
            vals[act_on_ray(g, Ray(prefix)).prefix] = self.b_inv(val)
        return WElement(tuple(sorted(vals.items())), g.inverse())

    def w_conj(self, A: WElement, g: GrigWord) -> WElement:
        wg = WElement((), g)
        return self.w_mul(self.w_mul(self.w_inv(wg), A), wg)

    def w_commutator(self, A: WElement, B: WElement) -> WElement:
        return self.w_mul(self.w_mul(self.w_inv(A), self.w_inv(B)), self.w_mul(A, B))

    def f_element(self, upto: Optional[int] = None) -> WElement:
        """f_i supported on the first ``upto`` placed rays (default: all)."""
        if upto is None:
            upto = len(self.n_values)
        if upto > len(self.n_values):
            raise PlanError("placement not chosen that far")
        vals = {}
        for k in range(1, upto + 1):
            vals[marked_ray(self.n_values[k - 1])] = self.b_value(k)
        return self.w_from_fun(vals)

    def w_generators(self, upto: Optional[int] = None) -> list[tuple[str, WElement]]:
        gens = [(g, WElement((), GrigWord((g,)))) for g in GENS]
        gens.append(("f", self.f_element(upto)))
        return gens


def configure_plan(factor_groups: Sequence[tuple[str, GroupHandle, CayleyGraph]],
                   eps: Optional[Sequence[float]] = None,
                   pad_to: Optional[int] = None) -> PlacementPlan:
    """Fix factors, pad generator lists to a common width, and size the
    order-adjusting factor Z = C_N with N the lcm of all generator orders."""
    if not factor_groups:
        raise PlanError("empty factor selection")
    specs = []
    orders_all = []
    width = pad_to or max(len(h.generators) for _, h, _ in factor_groups)
    for fid, (name, handle, graph) in enumerate(factor_groups):
        if len(handle.generators) > width:
            raise PlanError(f"factor {name} has more than {width} generators")
        gen_names = [n for n, _ in handle.generators]
        gen_idx = [graph.index[handle.encode(g)] for _, g in handle.generators]
        # pad by repeating the last generator so every block has equal width
        while len(gen_idx) < width:
            gen_names.append(gen_names[-1])
            gen_idx.append(gen_idx[-1])
        orders = [handle.element_order(g) for _, g in handle.generators]
        orders += [orders[-1]] * (width - len(orders))
        specs.append(FactorSpec(fid, name, handle, graph, gen_names, gen_idx, orders))
        orders_all.extend(orders)
    N = lcm(orders_all)
    if eps is None:
        eps = [1.0 + 2.0 ** (-i) for i in range(1, len(specs) * width + 1)]
    plan = PlacementPlan(factors=specs, width=width, N=N, eps=list(eps))
    return plan


def choose_n(plan: PlacementPlan, k: int, m_k: int, index_cap: int = 64) -> int:
    """Least placement index for global slot k satisfying, among indices up
    to ``index_cap``: pairwise ray distances >= m_k beyond the candidate, and
    labeled m_k-ball agreement at and beyond the candidate."""
    if k != len(plan.n_values) + 1:
        raise PlanError("placements must be chosen in order")
    if plan.m_values and m_k < plan.m_values[-1]:
        raise PlanError("m schedule must be nondecreasing")
    start = plan.n_values[-1] + 1 if plan.n_values else 1
    rays = [marked_ray(i) for i in range(index_cap + 1)]

    if m_k == 0:
        plan.n_values.append(start)
        plan.m_values.append(m_k)
        plan.choose_witnesses.append({"candidate": start, "m": 0})
        return start

    # distance condition: the largest b such that some a != b has
    # d(x_a, x_b) < m_k forces every candidate above b
    min_n_dist = 0
    for b in range(index_cap + 1):
        ball = schreier_ball(rays[b], m_k - 1)
        if any(a != b and rays[a] in ball.distances for a in range(index_cap + 1)):
            min_n_dist = b + 1
    sigs = [ball_signature(x, m_k) for x in rays]

    for cand in range(max(start, min_n_dist), index_cap + 1):
        if all(sigs[b] == sigs[cand] for b in range(cand + 1, index_cap + 1)):
            plan.n_values.append(cand)
            plan.m_values.append(m_k)
            plan.choose_witnesses.append(
                {"candidate": cand, "m": m_k, "distance_floor": min_n_dist})
            return cand
    raise PlanError(f"no admissible index <= {index_cap} for slot {k} at m={m_k}")


def place_all(plan: PlacementPlan, m_schedule: Sequence[int], index_cap: int = 64) -> None:
    if len(m_schedule) != plan.total_indices:
        raise PlanError("m schedule length must match the assignment")
    for k in range(1, plan.total_indices + 1):
        choose_n(plan, k, m_schedule[k - 1], index_cap)


def force_placement(plan: PlacementPlan, n_values: Sequence[int],
                    m_values: Sequence[int]) -> None:
    """Install placement indices without the admissibility checks (for
    adversarial / negative-control plans)."""
    plan.n_values = list(n_values)
    plan.m_values = list(m_values)
    plan.choose_witnesses = [{"forced": True}] * len(plan.n_values)


def verify_ball_coincidence(plan: PlacementPlan, i: int, m: int) -> tuple[bool, dict]:
    """Check the radius-m balls of W_i and W_{i+1} agree under f_i <-> f_{i+1}.

    Runs a product-automaton BFS: both groups step through the same labeled
    generator word; the identification is a label-preserving bijection iff
    no state ever merges on one side but not the other.
    """
    if i + 1 > len(plan.n_values):
        raise PlanError("placement not chosen far enough")
    gens_a = plan.w_generators(upto=i)
    gens_b = plan.w_generators(upto=i + 1)
    moves = []
    for (name, ga), (_, gb) in zip(gens_a, gens_b):
        moves.append((name, ga, gb))
        moves.append((name + "^-1", plan.w_inv(ga), plan.w_inv(gb)))

    ida, idb = plan.w_identity(), plan.w_identity()
    pair_of_a = {ida.encode(): 0}
    pair_of_b = {idb.encode(): 0}
    pairs = [(ida, idb)]
    frontier = [0]
    checked = 0
    for depth in range(1, m + 1):
        nxt = []
        for pid in frontier:
            ua, ub = pairs[pid]
            for name, ga, gb in moves:
                va = plan.w_mul(ua, ga)
                vb = plan.w_mul(ub, gb)
                ea, eb = va.encode(), vb.encode()
                ia, ib = pair_of_a.get(ea), pair_of_b.get(eb)
                checked += 1
                if ia is None and ib is None:
                    newid = len(pairs)
                    pairs.append((va, vb))
                    pair_of_a[ea] = newid
                    pair_of_b[eb] = newid
                    nxt.append(newid)
                elif ia != ib:
                    return False, {
                        "radius": depth,
                        "ball_a": len(pair_of_a),
                        "witness_move": name,
                        "detail": "merge on one side only",
                    }
        frontier = nxt
    return True, {"radius": m, "ball_size": len(pairs), "edges_checked": checked}


def commutator_witness(plan: PlacementPlan, ki: int, kj: int,
                       rect_budget: int = 14) -> WElement:
    """[f^{g_i}, f^{g_j}] for rectifiers moving x_{n(ki)}, x_{n(kj)} to the
    base ray x_0; asserts the result is the delta at x_0 with value
    [b_ki, b_kj] and trivial Grigorchuk part."""
    n_i, n_j = plan.n_values[ki - 1], plan.n_values[kj - 1]
    placed = [plan.n_values[k - 1] for k in range(1, len(plan.n_values) + 1)]
    h = find_rectifier(n_i, n_j, marked=placed, budget=rect_budget)
    g_j = find_rectifier(n_j, 0, marked=[], budget=rect_budget)
    g_i = h * g_j

    F = plan.f_element()
    A = plan.w_conj(F, g_i)
    B = plan.w_conj(F, g_j)
    C = plan.w_commutator(A, B)

    want = plan.b_mul(
        plan.b_mul(plan.b_inv(plan.b_value(ki)), plan.b_inv(plan.b_value(kj))),
        plan.b_mul(plan.b_value(ki), plan.b_value(kj)))
    expected = plan.w_from_fun({marked_ray(0): want})
    if C.encode() != expected.encode():
        raise PlanError("commutator witness is not the expected delta function")
    return C


def block_rectifiers(plan: PlacementPlan, block: int, rect_budget: int = 14,
                     candidates: int = 40,
                     geodesic_cap: int = 256) -> tuple[list[GrigWord], int]:
    """Rectifiers g_j : x_{n(off+j)} -> block base, pairwise compatible.

    Pairwise condition: g_{j'} g_j^-1 moves no placed ray onto a different
    placed ray except the designated one.  Complete BFS over group elements
    up to ``rect_budget``; distant slots fall back to Schreier-geodesic
    words capped at ``geodesic_cap``.  Returns (words, L') or raises.
    """
    idxs = plan.block_indices(block)
    base_n = plan.n_values[idxs[-1] - 1]
    placed = [plan.n_values[k - 1] for k in range(1, len(plan.n_values) + 1)]
    placed_rays = {marked_ray(p) for p in placed}

    def pair_ok(ga: GrigWord, gb: GrigWord, na: int, nb: int) -> bool:
        move = ga * gb.inverse()
        for p in placed:
            img = act_on_ray(move, marked_ray(p))
            if img in placed_rays and img != marked_ray(p):
                if not (p == na and img == marked_ray(nb)):
                    return False
        return True

    def candidate_list(n_from: int) -> list[GrigWord]:
        # breadth-first words sending x_{n_from} to the base, several kept
        out = []
        seen = {GRIG_IDENTITY.encode()}
        frontier = [GRIG_IDENTITY]
        target = marked_ray(base_n)
        if act_on_ray(GRIG_IDENTITY, marked_ray(n_from)) == target:
            out.append(GRIG_IDENTITY)
        for _ in range(rect_budget):
            nxt = []
            for w in frontier:
                for gletter in GENS:
                    u = w * GrigWord((gletter,))
                    enc = u.encode()
                    if enc in seen:
                        continue
                    seen.add(enc)
                    nxt.append(u)
                    if len(out) < candidates and act_on_ray(u, marked_ray(n_from)) == target:
                        out.append(u)
            frontier = nxt
            if len(out) >= candidates:
                break
        return out

    options = []
    for k in idxs:
        n_from = plan.n_values[k - 1]
        opts = candidate_list(n_from)
        if not opts:
            # fall back to a Schreier-geodesic word (valid but not minimal)
            try:
                word = schreier_geodesic_word(n_from, base_n, geodesic_cap)
                opts = [GrigWord.from_letters(word)]
            except UndecidedError as exc:
                raise PlanError(
                    f"no rectifier for block {block} slot {k}: {exc}") from exc
        options.append(opts)

    chosen: list[GrigWord] = []
    def backtrack(j: int) -> bool:
        if j == len(options):
            return True
        nj = plan.n_values[idxs[j] - 1]
        for cand in options[j]:
            good = True
            for jj, prev in enumerate(chosen):
                npj = plan.n_values[idxs[jj] - 1]
                if not (pair_ok(prev, cand, npj, nj) and pair_ok(cand, prev, nj, npj)):
                    good = False
                    break
            if good:
                chosen.append(cand)
                if backtrack(j + 1):
                    return True
                chosen.pop()
        return False

    if not backtrack(0):
        raise PlanError(f"no pairwise-compatible rectifier set for block {block}")
    L_prime = max(len(w.word) for w in chosen)
    return chosen, L_prime


def psi_imbed(plan: PlacementPlan, block: int, h_vertex: int,
              rectifiers: Optional[list[GrigWord]] = None,
              perfect_budget: int = 12, rect_budget: int = 14) -> WElement:
    """Map h in [H_block, H_block] into W along its minimal balanced word.

    Asserts the image equals the delta function at the block base carrying
    (h, z^0), which makes multiplicativity automatic.
    """
    spec = plan.factors[block]
    idxs = plan.block_indices(block)
    if rectifiers is None:
        rectifiers, _ = block_rectifiers(plan, block, rect_budget)
    word = perfect_mod.perfect_norm_word(spec.graph, h_vertex, perfect_budget)

    F = plan.f_element()
    conj = [plan.w_conj(F, g) for g in rectifiers]
    conj_inv = [plan.w_inv(c) for c in conj]

    out = plan.w_identity()
    for letter in word:
        gi = abs(letter) - 1
        # generator gi of the factor sits at block slot(s) with that index;
        # padded slots repeat generators, any slot with the right generator works
        slot = spec.gen_indices.index(spec.gen_indices[gi])
        piece = conj[slot] if letter > 0 else conj_inv[slot]
        out = plan.w_mul(out, piece)

    base_ray = marked_ray(plan.n_values[idxs[-1] - 1])
    h_enc = spec.graph.element_bytes[h_vertex]
    expected = plan.w_from_fun({base_ray: plan.b_singleton(spec.fid, h_enc)})
    if out.encode() != expected.encode():
        raise PlanError("psi image is not the expected delta at the block base")
    return out


def w_ball(plan: PlacementPlan, radius: int, upto: Optional[int] = None,
           budget: int = 2_000_000) -> dict[bytes, int]:
    """BFS ball of W_upto; returns encoding -> distance."""
    return w_ball_elements(plan, radius, upto, budget)[0]


def w_ball_elements(plan: PlacementPlan, radius: int, upto: Optional[int] = None,
                    budget: int = 2_000_000) -> tuple[dict[bytes, int], list[WElement]]:
    moves = []
    for name, g in plan.w_generators(upto):
        moves.append(g)
        moves.append(plan.w_inv(g))
    ident = plan.w_identity()
    dist = {ident.encode(): 0}
    elements = [ident]
    frontier = [ident]
    for r in range(1, radius + 1):
        nxt = []
        for u in frontier:
            for mv in moves:
                v = plan.w_mul(u, mv)
                enc = v.encode()
                if enc not in dist:
                    dist[enc] = r
                    elements.append(v)
                    nxt.append(v)
                    if len(dist) > budget:
                        raise PlanError(f"W ball budget {budget} exceeded")
        frontier = nxt
    return dist, elements


def w_norm_bidir(plan: PlacementPlan, target: WElement, cap: int,
                 forward: Optional[dict[bytes, int]] = None,
                 forward_radius: Optional[int] = None) -> int:
    """Word norm of ``target`` in W via meet-in-the-middle BFS."""
    enc_id = plan.w_identity().encode()
    tenc = target.encode()
    if tenc == enc_id:
        return 0
    if forward is None:
        forward_radius = (cap + 1) // 2
        forward = w_ball(plan, forward_radius)
    if tenc in forward:
        return forward[tenc]
    moves = []
    for name, g in plan.w_generators():
        moves.append(plan.w_inv(g))
        moves.append(g)
    # backward states u satisfy u * q = target for some suffix q of length r;
    # the norm is min over meets of forward depth + backward depth
    back = {tenc: 0}
    frontier = [target]
    best = None
    max_back = cap - forward_radius
    for r in range(1, max_back + 1):
        if best is not None and best <= r:
            break
        nxt = []
        for u in frontier:
            for mv in moves:
                v = plan.w_mul(u, mv)
                enc = v.encode()
                if enc in back:
                    continue
                back[enc] = r
                nxt.append(v)
                d = forward.get(enc)
                if d is not None and (best is None or d + r < best):
                    best = d + r
        frontier = nxt
        if not frontier:
            break
    if best is None:
        raise UndecidedError(f"W norm exceeds budget {cap}")
    return best


@dataclass
class BiLipschitzReport:
    block: int
    L_prime: int
    envelope: tuple[float, float]
    rows: list[dict]
    measured_K: Optional[float]
    measured_L: Optional[float]
    unknown: int


def measure_bilipschitz(plan: PlacementPlan, block: int, radius: int = 12,
                        perfect_budget: int = 10, rect_budget: int = 14) -> BiLipschitzReport:
    """Empirical extremal ratios ||Psi(h)||_W / ||h||_perfect over the
    derived subgroup of the block factor, within a W-norm search budget."""
    spec = plan.factors[block]
    rectifiers, L_prime = block_rectifiers(plan, block, rect_budget)
    derived, _ = perfect_mod.derived_subgroup(spec.handle, spec.graph)
    norms = perfect_mod.perfect_norm_table(spec.graph, perfect_budget)

    forward_radius = (radius + 1) // 2
    forward = w_ball(plan, forward_radius)

    rows = []
    ratios = []
    unknown = 0
    for v in sorted(derived):
        if v == 0 or v not in norms:
            continue
        pn = norms[v]
        psi = psi_imbed(plan, block, v, rectifiers=rectifiers, perfect_budget=perfect_budget)
        try:
            wn = w_norm_bidir(plan, psi, radius, forward=forward, forward_radius=forward_radius)
            rows.append({"vertex": v, "perfect": pn, "w_norm": wn, "ratio": wn / pn})
            ratios.append(wn / pn)
        except UndecidedError:
            unknown += 1
            rows.append({"vertex": v, "perfect": pn, "w_norm": None, "ratio": None})
    return BiLipschitzReport(
        block=block,
        L_prime=L_prime,
        envelope=(1.0, 2.0 * L_prime + 1.0),
        rows=rows,
        measured_K=min(ratios) if ratios else None,
        measured_L=max(ratios) if ratios else None,
        unknown=unknown,
    )


def plan_to_json(plan: PlacementPlan,
                 rectifiers: Optional[dict[int, tuple[list[GrigWord], int]]] = None,
                 measurements: Optional[dict[int, BiLipschitzReport]] = None) -> str:
    """Serialize a plan (factors, N, placements, rectifier words, L',
    measurement tables) for inspection and reproducibility."""
    import json

    doc = {
        "factors": [{"fid": f.fid, "name": f.name,
                     "generators": f.gen_names, "orders": f.gen_orders}
                    for f in plan.factors],
        "width": plan.width,
        "N": plan.N,
        "eps": plan.eps[:plan.total_indices],
        "n_values": plan.n_values,
        "m_values": plan.m_values,
        "assignment": [{"k": k, "factor": fid, "slot": j}
                       for k, fid, j in plan.assignment()],
    }
    if rectifiers:
        doc["rectifiers"] = {
            str(block): {"words": ["".join(w.word) for w in words],
                         "L_prime": lp}
            for block, (words, lp) in rectifiers.items()
        }
    if measurements:
        doc["measurements"] = {
            str(block): {"L_prime": rep.L_prime,
                         "envelope": list(rep.envelope),
                         "measured_K": rep.measured_K,
                         "measured_L": rep.measured_L,
                         "unknown": rep.unknown,
                         "rows": rep.rows}
            for block, rep in measurements.items()
        }
    return json.dumps(doc, indent=2, sort_keys=True)


def growth_and_m(plan: PlacementPlan, i: int, eps: float,
                 radius_budget: int = 8) -> dict:
    """Least m with v_i(m) <= eps^m, or the growth prefix if unresolved."""
    dist = w_ball(plan, radius_budget, upto=i)
    sizes = [0] * (radius_budget + 1)
    for _, d in dist.items():
        sizes[d] += 1
    growth = []
    acc = 0
    for s in sizes:
        acc += s
        growth.append(acc)
    for m in range(1, radius_budget + 1):
        if growth[m] <= eps ** m:
            return {"resolved": True, "m": m, "growth": GrowthFunction(tuple(growth))}
    return {"resolved": False, "m": None, "growth": GrowthFunction(tuple(growth))}
