"""The first Grigorchuk group acting on the orbit of the rightmost ray.

Fixed wreath recursion (any standard variant permuting b, c, d gives an
isomorphic group; all claims here are stated against this one):

    a = top swap,   b = (a, c),   c = (a, d),   d = (1, b)

Group elements are reduced words over {a, b, c, d}; each generator is an
involution and {1, b, c, d} is a Klein four-group.  Rays in the orbit
X = 1^inf . G are eventually-all-ones strings, canonicalized as the finite
prefix with trailing ones stripped (so the prefix is empty or ends in '0');
the marked sequence is x_i = 0^i 1^inf.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .algebra import GroupHandle, UsageError
from .cayley import GrowthFunction

GENS = ("a", "b", "c", "d")

_KLEIN = {
    frozenset("bc"): "d",
    frozenset("bd"): "c",
    frozenset("cd"): "b",
}

# letter -> (top swap, section at 0, section at 1); None is the identity
_DECOMP = {
    "a": (1, None, None),
    "b": (0, "a", "c"),
    "c": (0, "a", "d"),
    "d": (0, None, "b"),
}


class UndecidedError(RuntimeError):
    """Equality could not be settled within the level budget."""


def reduce_word(word: Iterable[str]) -> tuple[str, ...]:
    """Cancel squares and fuse adjacent {b,c,d} letters via Klein relations."""
    stack: list[str] = []
    for letter in word:
        if letter not in _DECOMP:
            raise UsageError(f"unknown generator {letter!r}")
        stack.append(letter)
        while len(stack) >= 2:
            x, y = stack[-2], stack[-1]
            if x == y:
                stack.pop()
                stack.pop()
            elif x != "a" and y != "a":
                stack.pop()
                stack.pop()
                stack.append(_KLEIN[frozenset((x, y))])
            else:
                break
    return tuple(stack)


def word_sections(word: Sequence[str]) -> tuple[int, tuple[str, ...], tuple[str, ...]]:
    """Top parity and the two (reduced) section words of a reduced word."""
    e = 0
    u0: list[str] = []
    u1: list[str] = []
    for letter in word:
        swap, s0, s1 = _DECOMP[letter]
        if e == 0:
            if s0 is not None:
                u0.append(s0)
            if s1 is not None:
                u1.append(s1)
        else:
            if s0 is not None:
                u1.append(s0)
            if s1 is not None:
                u0.append(s1)
        e ^= swap
    return e, reduce_word(u0), reduce_word(u1)


_trivial_cache: dict[tuple[str, ...], bool] = {(): True}


def is_trivial(word: Iterable[str]) -> bool:
    """Exact triviality via the contracting recursion."""
    w = reduce_word(word)
    cached = _trivial_cache.get(w)
    if cached is not None:
        return cached
    if len(w) == 1:
        result = False
    else:
        e, w0, w1 = word_sections(w)
        result = e == 0 and is_trivial(w0) and is_trivial(w1)
    _trivial_cache[w] = result
    return result


_key_cache: dict[tuple[str, ...], bytes] = {}


def canonical_key(word: Iterable[str]) -> bytes:
    """Portrait-based canonical encoding; equal words get equal keys."""
    w = reduce_word(word)
    cached = _key_cache.get(w)
    if cached is not None:
        return cached
    if is_trivial(w):
        key = b"1"
    else:
        for g in GENS:
            if is_trivial(w + (g,)):
                key = g.encode()
                break
        else:
            e, w0, w1 = word_sections(w)
            key = b"(" + (b"s" if e else b"-") + canonical_key(w0) + canonical_key(w1) + b")"
    _key_cache[w] = key
    return key


@dataclass(frozen=True)
class GrigWord:
    """Group element represented by a reduced word."""

    word: tuple[str, ...]

    @staticmethod
    def from_letters(letters: Iterable[str]) -> "GrigWord":
        return GrigWord(reduce_word(letters))

    def __mul__(self, other: "GrigWord") -> "GrigWord":
        return GrigWord(reduce_word(self.word + other.word))

    def inverse(self) -> "GrigWord":
        return GrigWord(tuple(reversed(self.word)))

    def encode(self) -> bytes:
        return canonical_key(self.word)

    def __eq__(self, other):
        return isinstance(other, GrigWord) and self.encode() == other.encode()

    def __hash__(self):
        return hash(self.encode())

    def __len__(self):
        return len(self.word)

    def __repr__(self):
        return "Grig(" + ("".join(self.word) or "1") + ")"


GRIG_IDENTITY = GrigWord(())


def grigorchuk_handle() -> GroupHandle:
    gens = [(g, GrigWord((g,))) for g in GENS]
    return GroupHandle("grigorchuk-word", "Grigorchuk", gens, GRIG_IDENTITY)


# ---------------------------------------------------------------------------
# Boundary rays and the Schreier graph


@dataclass(frozen=True)
class Ray:
    """Point u . 1^inf of the boundary orbit, u stripped of trailing ones."""

    prefix: str = ""

    def __post_init__(self):
        if self.prefix and not set(self.prefix) <= {"0", "1"}:
            raise UsageError("binary prefix required")
        if self.prefix.endswith("1"):
            raise UsageError("canonical prefix must not end in 1")

    @staticmethod
    def from_string(s: str) -> "Ray":
        return Ray(s.rstrip("1"))

    def letter(self, pos: int) -> str:
        return self.prefix[pos] if pos < len(self.prefix) else "1"

    def flip(self, pos: int) -> "Ray":
        n = max(len(self.prefix), pos + 1)
        bits = list(self.prefix.ljust(n, "1"))
        bits[pos] = "0" if bits[pos] == "1" else "1"
        return Ray.from_string("".join(bits))

    def __repr__(self):
        return f"Ray({self.prefix or ''}1^inf)"


def marked_ray(i: int) -> Ray:
    """x_i = 0^i 1^inf."""
    return Ray("0" * i)


def act_letter(letter: str, ray: Ray) -> Ray:
    """Apply one generator; a single letter flips at most one position."""
    g = letter
    pos = 0
    while True:
        if g is None:
            return ray
        if g == "a":
            return ray.flip(pos)
        cur = ray.letter(pos)
        if pos >= len(ray.prefix) and g in ("b", "c", "d"):
            # sections along the all-ones tail cycle through {b,c,d}
            return ray
        swap, s0, s1 = _DECOMP[g]
        g = s0 if cur == "0" else s1
        pos += 1


def act_on_ray(word, ray: Ray) -> Ray:
    """Right action of a word or GrigWord, letters applied left to right."""
    letters = word.word if isinstance(word, GrigWord) else word
    for letter in letters:
        ray = act_letter(letter, ray)
    return ray


def act_on_finite(word, bits: str) -> str:
    """Action on a level-k tree vertex (finite binary word)."""
    letters = word.word if isinstance(word, GrigWord) else word
    for letter in letters:
        out = []
        g = letter
        for i, ch in enumerate(bits):
            if g is None:
                out.append(bits[i:])
                break
            if g == "a":
                out.append("0" if ch == "1" else "1")
                out.append(bits[i + 1:])
                g = None
                break
            swap, s0, s1 = _DECOMP[g]
            out.append(ch)
            g = s0 if ch == "0" else s1
        bits = "".join(out) if out else bits
    return bits


_level_tables_cache: dict[int, dict[str, np.ndarray]] = {}


def level_tables(k: int) -> dict[str, np.ndarray]:
    """Permutation tables of the four generators on the 2^k level-k
    vertices (vertex index reads the binary word MSB-first)."""
    cached = _level_tables_cache.get(k)
    if cached is not None:
        return cached
    if k == 0:
        out = {g: np.zeros(1, dtype=np.int64) for g in GENS}
    else:
        prev = level_tables(k - 1)
        half = 1 << (k - 1)
        rest = np.arange(half, dtype=np.int64)
        out = {}
        for g in GENS:
            swap, s0, s1 = _DECOMP[g]
            table = np.empty(1 << k, dtype=np.int64)
            for b, sec in ((0, s0), (1, s1)):
                lower = prev[sec] if sec is not None else rest
                table[b * half:(b + 1) * half] = ((b ^ swap) << (k - 1)) | lower
            out[g] = table
    _level_tables_cache[k] = out
    return out


def word_level_table(word, k: int) -> np.ndarray:
    """Action of a word on all level-k vertices, letters left to right."""
    letters = word.word if isinstance(word, GrigWord) else tuple(word)
    tables = level_tables(k)
    out = np.arange(1 << k, dtype=np.int64)
    for letter in letters:
        out = tables[letter][out]
    return out


def equal_by_level_action(w1, w2, level: int) -> bool:
    """Compare the actions on every vertex of the level-``level`` tree."""
    u = (w1 if isinstance(w1, GrigWord) else GrigWord.from_letters(w1))
    v = (w2 if isinstance(w2, GrigWord) else GrigWord.from_letters(w2))
    w = u * v.inverse()
    table = word_level_table(w, level)
    return bool((table == np.arange(1 << level, dtype=np.int64)).all())


def grig_equal(w1, w2, level_budget: Optional[int] = None) -> bool:
    """Exact equality; the contraction verdict is cross-checked against the
    level action at k = 2 * word length (capped by ``level_budget``)."""
    u = w1 if isinstance(w1, GrigWord) else GrigWord.from_letters(w1)
    v = w2 if isinstance(w2, GrigWord) else GrigWord.from_letters(w2)
    w = u * v.inverse()
    verdict = is_trivial(w.word)
    # a lone b/c/d first acts at depth 3, so the level floor is 3
    k = min(max(2 * len(w.word), 3), 14 if level_budget is None else level_budget)
    level = equal_by_level_action(w, GRIG_IDENTITY, k)
    if verdict != level:
        if level and not verdict:
            # the level test can only under-resolve, never over-resolve
            raise UndecidedError(
                f"level-{k} action fixed everything but contraction says nontrivial")
        raise UndecidedError("equality oracles disagree")
    return verdict


def grig_growth(R: int, cap: int = 12) -> GrowthFunction:
    """Ball sizes of the Grigorchuk group via BFS with canonical keys."""
    if R > cap:
        raise UsageError(f"radius {R} above configured cap {cap}")
    seen = {GRIG_IDENTITY.encode()}
    frontier = [GRIG_IDENTITY]
    sizes = [1]
    for _ in range(R):
        nxt = []
        for w in frontier:
            for g in GENS:
                u = w * GrigWord((g,))
                enc = u.encode()
                if enc not in seen:
                    seen.add(enc)
                    nxt.append(u)
        sizes.append(sizes[-1] + len(nxt))
        frontier = nxt
    return GrowthFunction(tuple(sizes))


@dataclass
class SchreierBall:
    base: Ray
    radius: int
    distances: dict[Ray, int]
    edges: list[tuple[Ray, str, Ray]]

    def vertices(self) -> list[Ray]:
        return list(self.distances)

    def to_dot_edges(self) -> str:
        lines = [f'"{u.prefix or "e"}" -- "{v.prefix or "e"}" [label="{g}"];'
                 for u, g, v in self.edges]
        return "\n".join(lines)


def schreier_ball(base: Ray, R: int) -> SchreierBall:
    """Lazy BFS over rays; exact distances within radius R."""
    dist = {base: 0}
    edges = []
    frontier = [base]
    for r in range(R):
        nxt = []
        for x in frontier:
            for g in GENS:
                y = act_letter(g, x)
                if y not in dist:
                    dist[y] = r + 1
                    nxt.append(y)
                edges.append((x, g, y))
        frontier = nxt
    return SchreierBall(base, R, dist, edges)


def schreier_distance(x: Ray, y: Ray, radius_cap: int = 1 << 20) -> int:
    """Exact distance between rays; -1 if not reached within the cap."""
    if x == y:
        return 0
    dist = {x: 0}
    frontier = [x]
    r = 0
    while frontier and r < radius_cap:
        r += 1
        nxt = []
        for v in frontier:
            for g in GENS:
                u = act_letter(g, v)
                if u == y:
                    return r
                if u not in dist:
                    dist[u] = r
                    nxt.append(u)
        frontier = nxt
    return -1


def ball_signature(base: Ray, R: int) -> tuple:
    """Canonical form of the labeled R-ball rooted at ``base``.

    Deterministic traversal in generator order; two balls are isomorphic as
    rooted labeled graphs iff their signatures are equal (the Schreier graph
    is deterministically labeled, so the isomorphism is forced).  Edges are
    recorded from interior vertices only, so a radius-0 ball is structureless
    and the ball of radius R carries every edge of some geodesic extension.
    """
    ball = schreier_ball(base, R)
    number = {base: 0}
    order = [base]
    sig = []
    for v in order:
        if ball.distances[v] >= R:
            sig.append(("leaf",))
            continue
        row = []
        for g in GENS:
            u = act_letter(g, v)
            if u not in ball.distances:
                row.append(-2)
                continue
            if u not in number:
                number[u] = len(order)
                order.append(u)
            row.append(number[u])
        sig.append(tuple(row))
    return tuple(sig)


def check_sequence_properties(R: int, index_cap: int = 64) -> dict:
    """Least N witnessing spreading / local stabilization among x_0..x_cap."""
    rays = [marked_ray(i) for i in range(index_cap + 1)]

    spreading_N = None
    for N in range(index_cap + 1):
        ok = True
        for i in range(N, index_cap + 1):
            ball = schreier_ball(rays[i], max(R - 1, 0))
            for j in range(N, index_cap + 1):
                if i != j and R > 0 and rays[j] in ball.distances:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            spreading_N = N
            break

    sigs = [ball_signature(x, R) for x in rays]
    stabilizing_N = None
    for N in range(index_cap + 1):
        if all(sigs[i] == sigs[N] for i in range(N, index_cap + 1)):
            stabilizing_N = N
            break

    return {
        "R": R,
        "spreading": spreading_N,
        "stabilizing": stabilizing_N,
        "index_cap": index_cap,
    }


def find_rectifier(i: int, j: int, marked: Sequence[int], budget: int,
                   max_candidates: int = 1) -> GrigWord:
    """Group element g with x_i g = x_j such that no other marked ray lands
    on a different marked ray.  BFS over words; raises if the budget ends."""
    xi, xj = marked_ray(i), marked_ray(j)
    marked_rays = {k: marked_ray(k) for k in marked}
    targets = set(marked_rays.values())

    def admissible(g: GrigWord) -> bool:
        if act_on_ray(g, xi) != xj:
            return False
        for k, xk in marked_rays.items():
            if k == i:
                continue
            img = act_on_ray(g, xk)
            if img in targets and img != xk:
                return False
        return True

    if admissible(GRIG_IDENTITY):
        return GRIG_IDENTITY
    seen = {GRIG_IDENTITY.encode()}
    frontier = [GRIG_IDENTITY]
    for _ in range(budget):
        nxt = []
        for w in frontier:
            for g in GENS:
                u = w * GrigWord((g,))
                enc = u.encode()
                if enc in seen:
                    continue
                seen.add(enc)
                if admissible(u):
                    return u
                nxt.append(u)
        frontier = nxt
    raise UndecidedError(f"no rectifier within word-length budget {budget}")


def schreier_geodesic_word(i: int, j: int, length_cap: int) -> tuple[str, ...]:
    """A label word moving x_i to x_j along a Schreier geodesic.

    BFS over rays (not over group elements), so it scales to the large
    marked-ray distances; the word is geodesic but carries no marked-set
    guarantees -- callers must verify those by evaluation."""
    xi, xj = marked_ray(i), marked_ray(j)
    if xi == xj:
        return ()
    parent: dict[Ray, tuple[Ray, str]] = {xi: None}
    frontier = [xi]
    for _ in range(length_cap):
        nxt = []
        for v in frontier:
            for g in GENS:
                u = act_letter(g, v)
                if u in parent:
                    continue
                parent[u] = (v, g)
                if u == xj:
                    word = []
                    cur = u
                    while parent[cur] is not None:
                        cur, letter = parent[cur]
                        word.append(letter)
                    return tuple(reversed(word))
                nxt.append(u)
        frontier = nxt
    raise UndecidedError(
        f"Schreier distance d(x_{i}, x_{j}) exceeds length cap {length_cap}")
