"""Exact arithmetic carriers: truncated polynomial rings over F_p, 3x3
matrix groups, permutations, direct and finite wreath products, plus the
GroupHandle contract every enumeration module consumes.

Conventions fixed project-wide:
  * permutations act on the right, (a*b)(x) = b(a(x));
  * commutators are [a, b] = a^-1 b^-1 a b;
  * every element type is immutable and exposes ``encode()`` returning a
    stable canonical byte string, with equality == encoding equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels


class UsageError(ValueError):
    """Malformed call: mismatched moduli, degrees or domains."""


class NonInvertibleError(ArithmeticError):
    """Inversion of a non-unit in the local ring."""


class InvalidElementError(ValueError):
    """Value fails a group-membership invariant (e.g. det != 1)."""


def commutator(a, b):
    """[a, b] = a^-1 b^-1 a b."""
    return a.inverse() * b.inverse() * a * b


# ---------------------------------------------------------------------------
# F_p[t]/(t^level)


@dataclass(frozen=True)
class RingElement:
    """Element of F_p[t]/(t^level); coeffs[i] is the coefficient of t^i."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if any(not (0 <= c < self.p) for c in self.coeffs):
            raise UsageError(f"coefficients must lie in [0, {self.p})")

    @property
    def level(self) -> int:
        return len(self.coeffs)

    def _check(self, other: "RingElement"):
        if self.p != other.p or self.level != other.level:
            raise UsageError("ring modulus mismatch")

    def __add__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.p, tuple((a + b) % self.p for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "RingElement":
        return RingElement(self.p, tuple((-a) % self.p for a in self.coeffs))

    def __sub__(self, other: "RingElement") -> "RingElement":
        return self + (-other)

    def __mul__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        L = self.level
        out = [0] * L
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j in range(L - i):
                out[i + j] = (out[i + j] + a * other.coeffs[j]) % self.p
        return RingElement(self.p, tuple(out))

    def inverse(self) -> "RingElement":
        """Series inversion; requires the constant coefficient to be a unit."""
        if self.coeffs[0] == 0:
            raise NonInvertibleError("constant coefficient is zero")
        L = self.level
        inv0 = pow(self.coeffs[0], -1, self.p)
        out = [inv0] + [0] * (L - 1)
        for k in range(1, L):
            acc = sum(self.coeffs[i] * out[k - i] for i in range(1, k + 1)) % self.p
            out[k] = (-inv0 * acc) % self.p
        return RingElement(self.p, tuple(out))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def encode(self) -> bytes:
        return bytes(self.coeffs)

    def __repr__(self):
        return f"R{self.p}^{self.level}{self.coeffs}"


def ring_zero(p: int, level: int) -> RingElement:
    return RingElement(p, (0,) * level)


def ring_one(p: int, level: int) -> RingElement:
    return RingElement(p, (1,) + (0,) * (level - 1))


def ring_t(p: int, level: int) -> RingElement:
    if level < 2:
        raise UsageError("t is zero below level 2")
    return RingElement(p, (0, 1) + (0,) * (level - 2))


def ring_arith(op: str, a: RingElement, b: Optional[RingElement] = None) -> RingElement:
    """Dispatch wrapper matching the module contract."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    raise UsageError(f"unknown ring op {op!r}")


# ---------------------------------------------------------------------------
# 3x3 matrices over the local ring


@dataclass(frozen=True)
class Matrix3:
    """3x3 matrix with RingElement entries, row-major tuple of length 9."""

    entries: tuple[RingElement, ...]

    def __post_init__(self):
        if len(self.entries) != 9:
            raise UsageError("Matrix3 needs 9 entries")

    @property
    def ring(self) -> tuple[int, int]:
        e = self.entries[0]
        return (e.p, e.level)

    def __getitem__(self, rc: tuple[int, int]) -> RingElement:
        r, c = rc
        return self.entries[3 * r + c]

    def __mul__(self, other: "Matrix3") -> "Matrix3":
        a, b = self.entries, other.entries
        out = []
        for i in range(3):
            for j in range(3):
                acc = a[3 * i] * b[j]
                acc = acc + a[3 * i + 1] * b[3 + j]
                acc = acc + a[3 * i + 2] * b[6 + j]
                out.append(acc)
        return Matrix3(tuple(out))

    def det(self) -> RingElement:
        e = self.entries
        pos = e[0] * e[4] * e[8] + e[1] * e[5] * e[6] + e[2] * e[3] * e[7]
        neg = e[2] * e[4] * e[6] + e[0] * e[5] * e[7] + e[1] * e[3] * e[8]
        return pos - neg

    def inverse(self) -> "Matrix3":
        """Adjugate times det^-1; dets are units in the local ring."""
        e = self.entries

        def minor(r1, r2, c1, c2):
            return e[3 * r1 + c1] * e[3 * r2 + c2] - e[3 * r1 + c2] * e[3 * r2 + c1]

        d = self.det()
        dinv = d.inverse()
        # row-major adjugate: adj[i][j] = cofactor C[j][i]
        adj = [
            minor(1, 2, 1, 2), -minor(0, 2, 1, 2), minor(0, 1, 1, 2),
            -minor(1, 2, 0, 2), minor(0, 2, 0, 2), -minor(0, 1, 0, 2),
            minor(1, 2, 0, 1), -minor(0, 2, 0, 1), minor(0, 1, 0, 1),
        ]
        return Matrix3(tuple(x * dinv for x in adj))

    def encode(self) -> bytes:
        return b"".join(x.encode() for x in self.entries)

    def __repr__(self):
        p, lvl = self.ring
        return f"M3(p={p},lvl={lvl},{[x.coeffs for x in self.entries]})"


def matrix_identity(p: int, level: int) -> Matrix3:
    one, zero = ring_one(p, level), ring_zero(p, level)
    return Matrix3(tuple(one if i % 4 == 0 else zero for i in range(9)))


def elementary_matrix(r: int, c: int, P: RingElement) -> Matrix3:
    """X_{r,c}(P): identity plus P in (1-based) position (r, c)."""
    if r == c:
        raise UsageError("off-diagonal position required")
    if not (1 <= r <= 3 and 1 <= c <= 3):
        raise UsageError("row/col must be in 1..3")
    m = matrix_identity(P.p, P.level)
    ent = list(m.entries)
    ent[3 * (r - 1) + (c - 1)] = P
    return Matrix3(tuple(ent))


def matrix_op(op: str, a: Matrix3, b: Optional[Matrix3] = None) -> Matrix3:
    one = ring_one(*a.ring)
    if a.det() != one or (b is not None and b.det() != one):
        raise InvalidElementError("matrix is not a group element: det != 1")
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    raise UsageError(f"unknown matrix op {op!r}")


# ---------------------------------------------------------------------------
# Permutations


@dataclass(frozen=True)
class Permutation:
    """Permutation of {0..k-1} as an image table, acting on the right."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise UsageError("image table is not a bijection")

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise UsageError("degree mismatch")
        return Permutation(tuple(other.images[i] for i in self.images))

    def inverse(self) -> "Permutation":
        out = [0] * self.degree
        for i, im in enumerate(self.images):
            out[im] = i
        return Permutation(tuple(out))

    def encode(self) -> bytes:
        if self.degree > 0xFFFF:
            raise UsageError("degree too large to encode")
        return np.asarray(self.images, dtype="<u2").tobytes()

    def __repr__(self):
        return f"Perm{self.images}"


def perm_identity(k: int) -> Permutation:
    return Permutation(tuple(range(k)))


def perm_from_cycles(k: int, cycles: Iterable[Sequence[int]]) -> Permutation:
    images = list(range(k))
    for cyc in cycles:
        for i, x in enumerate(cyc):
            images[x] = cyc[(i + 1) % len(cyc)]
    return Permutation(tuple(images))


def perm_compose(op: str, a: Permutation, b: Optional[Permutation] = None) -> Permutation:
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    raise UsageError(f"unknown permutation op {op!r}")


# ---------------------------------------------------------------------------
# Direct products and finite wreath products


@dataclass(frozen=True)
class DirectProductElement:
    parts: tuple

    def __mul__(self, other: "DirectProductElement") -> "DirectProductElement":
        if len(self.parts) != len(other.parts):
            raise UsageError("component count mismatch")
        return DirectProductElement(tuple(a * b for a, b in zip(self.parts, other.parts)))

    def inverse(self) -> "DirectProductElement":
        return DirectProductElement(tuple(a.inverse() for a in self.parts))

    def encode(self) -> bytes:
        chunks = []
        for a in self.parts:
            e = a.encode()
            chunks.append(len(e).to_bytes(4, "little"))
            chunks.append(e)
        return b"".join(chunks)


@dataclass(frozen=True)
class FiniteWreathElement:
    """Element of Q wr C_k: base function on the k coordinates plus a shift.

    Multiplication follows (f, g)(f', g') = (x -> f(x) f'(x + g), g + g'),
    the cyclic top acting on coordinates on the right.
    """

    base: tuple
    shift: int
    modulus: int

    def __mul__(self, other: "FiniteWreathElement") -> "FiniteWreathElement":
        if self.modulus != other.modulus:
            raise UsageError("wreath coordinate mismatch")
        k, g = self.modulus, self.shift
        new = tuple(self.base[x] * other.base[(x + g) % k] for x in range(k))
        return FiniteWreathElement(new, (g + other.shift) % k, k)

    def inverse(self) -> "FiniteWreathElement":
        k, g = self.modulus, self.shift
        ginv = (-g) % k
        new = tuple(self.base[(x + ginv) % k].inverse() for x in range(k))
        return FiniteWreathElement(new, ginv, k)

    def encode(self) -> bytes:
        chunks = [self.shift.to_bytes(4, "little")]
        for a in self.base:
            chunks.append(a.encode())
        return b"".join(chunks)


# ---------------------------------------------------------------------------
# GroupHandle


class PackedCodec:
    """Fixed-width array encoding of elements for batched kernel products."""

    def __init__(self, width: int, dtype, encode, decode, mul_batch):
        self.width = width
        self.dtype = dtype
        self.encode = encode
        self.decode = decode
        self.mul_batch = mul_batch


def _matrix_codec(p: int, level: int) -> PackedCodec:
    w = 9 * level

    def enc(m: Matrix3) -> np.ndarray:
        return np.frombuffer(m.encode(), dtype=np.uint8).copy()

    def dec(row: np.ndarray) -> Matrix3:
        ent = tuple(
            RingElement(p, tuple(int(v) for v in row[level * i:level * (i + 1)]))
            for i in range(9)
        )
        return Matrix3(ent)

    def mul(A: np.ndarray, brow: np.ndarray) -> np.ndarray:
        return kernels.matp_mul_batch(np.ascontiguousarray(A, dtype=np.uint8), brow, p, level)

    return PackedCodec(w, np.uint8, enc, dec, mul)


def _perm_codec(degree: int) -> PackedCodec:
    def enc(g: Permutation) -> np.ndarray:
        return np.asarray(g.images, dtype=np.uint16)

    def dec(row: np.ndarray) -> Permutation:
        return Permutation(tuple(int(v) for v in row))

    def mul(A: np.ndarray, brow: np.ndarray) -> np.ndarray:
        return kernels.perm_apply_batch(np.ascontiguousarray(A, dtype=np.uint16), brow)

    return PackedCodec(degree, np.uint16, enc, dec, mul)


class GroupHandle:
    """A finitely generated group presented by generator elements.

    Elements are immutable objects supporting ``*``, ``inverse()`` and
    ``encode()``; equality of elements must agree with equality of their
    canonical encodings.  ``kind`` tags the element universe.
    """

    def __init__(self, kind: str, name: str, generators: Sequence[tuple[str, object]],
                 identity, packed: Optional[PackedCodec] = None):
        if not generators:
            raise UsageError("at least one generator required")
        self.kind = kind
        self.name = name
        self.generators = list(generators)
        self.identity = identity
        self.packed = packed
        if identity.encode() != (identity * identity).encode():
            raise InvalidElementError("identity is not idempotent")

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return a.inverse()

    def encode(self, a) -> bytes:
        return a.encode()

    def equal(self, a, b) -> bool:
        return a.encode() == b.encode()

    def conjugate(self, a, g):
        return g.inverse() * a * g

    def element_order(self, a, cap: int = 10_000) -> int:
        acc = a
        ident = self.identity.encode()
        for k in range(1, cap + 1):
            if acc.encode() == ident:
                return k
            acc = acc * a
        raise UsageError(f"order exceeds cap {cap}")

    def describe(self) -> str:
        gens = ",".join(n for n, _ in self.generators)
        return f"{self.kind}:{self.name}[{gens}]"


def cyclic_handle(n: int) -> GroupHandle:
    g = perm_from_cycles(n, [tuple(range(n))])
    return GroupHandle("permutation", f"C{n}", [("s", g)], perm_identity(n), packed=_perm_codec(n))


def symmetric_handle(n: int) -> GroupHandle:
    gens = [("s", perm_from_cycles(n, [(0, 1)])), ("t", perm_from_cycles(n, [tuple(range(n))]))]
    return GroupHandle("permutation", f"S{n}", gens, perm_identity(n), packed=_perm_codec(n))


def permutation_handle(name: str, gens: Sequence[tuple[str, Permutation]]) -> GroupHandle:
    degree = gens[0][1].degree
    return GroupHandle("permutation", name, gens, perm_identity(degree), packed=_perm_codec(degree))


def matrix_handle(name: str, p: int, level: int, gens: Sequence[tuple[str, Matrix3]]) -> GroupHandle:
    one = ring_one(p, level)
    for gname, g in gens:
        if g.det() != one:
            raise InvalidElementError(f"generator {gname} has det != 1")
    return GroupHandle("matrix", name, gens, matrix_identity(p, level), packed=_matrix_codec(p, level))


def direct_product_handle(name: str, handles: Sequence[GroupHandle],
                          gens: Sequence[tuple[str, DirectProductElement]]) -> GroupHandle:
    ident = DirectProductElement(tuple(h.identity for h in handles))
    return GroupHandle("direct-product", name, gens, ident)


def lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out
