import random

import pytest

from metriclab.algebra import (DirectProductElement, FiniteWreathElement,
                               Matrix3, NonInvertibleError, Permutation,
                               RingElement, UsageError, commutator,
                               cyclic_handle, elementary_matrix,
                               matrix_identity, matrix_op, perm_compose,
                               perm_from_cycles, perm_identity, ring_arith,
                               ring_one, ring_t, ring_zero, symmetric_handle)


class TestRing:
    def test_char2_square_kills_cross_term(self):
        a = RingElement(2, (1, 1))
        assert (a * a).coeffs == (1, 0)

    def test_inverse_mod3(self):
        assert RingElement(3, (2,)).inverse().coeffs == (2,)

    def test_inverse_series(self):
        # multiply out (1+t)(1+t+t^2) mod (2, t^3) = 1
        a = RingElement(2, (1, 1, 0))
        inv = a.inverse()
        assert inv.coeffs == (1, 1, 1)
        assert (a * inv).coeffs == (1, 0, 0)

    def test_non_unit_inversion(self):
        with pytest.raises(NonInvertibleError):
            ring_t(2, 2).inverse()

    def test_modulus_mismatch(self):
        with pytest.raises(UsageError):
            ring_arith("add", RingElement(2, (1,)), RingElement(3, (1,)))

    def test_ring_laws_random(self):
        rng = random.Random(0)
        for p, level in ((2, 2), (3, 3)):
            elems = [RingElement(p, tuple(rng.randrange(p) for _ in range(level)))
                     for _ in range(40)]
            for _ in range(10_000):
                a, b, c = rng.choice(elems), rng.choice(elems), rng.choice(elems)
                assert ((a * b) * c).coeffs == (a * (b * c)).coeffs
                assert (a * ring_one(p, level)).coeffs == a.coeffs
                assert (a + ring_zero(p, level)).coeffs == a.coeffs


class TestMatrix:
    def test_identity_mul(self):
        one = ring_one(2, 1)
        a = elementary_matrix(1, 2, one)
        assert (matrix_identity(2, 1) * a).encode() == a.encode()

    def test_elementary_inverse(self):
        p = ring_t(3, 2)
        x = elementary_matrix(1, 2, p)
        assert x.inverse().encode() == elementary_matrix(1, 2, -p).encode()

    def test_elementary_zero_is_identity(self):
        assert elementary_matrix(1, 2, ring_zero(2, 1)).encode() == \
            matrix_identity(2, 1).encode()

    def test_elementary_diagonal_rejected(self):
        with pytest.raises(UsageError):
            elementary_matrix(2, 2, ring_one(2, 1))

    def test_additive_relation(self):
        P, Q = RingElement(3, (1, 2)), RingElement(3, (2, 2))
        lhs = elementary_matrix(1, 2, P + Q)
        rhs = elementary_matrix(1, 2, P) * elementary_matrix(1, 2, Q)
        assert lhs.encode() == rhs.encode()

    def test_commutator_of_transvections(self):
        # [X_12(1), X_23(1)] = X_13(1), direct 3x3 multiplication oracle
        one = ring_one(2, 1)
        got = commutator(elementary_matrix(1, 2, one), elementary_matrix(2, 3, one))
        assert got.encode() == elementary_matrix(1, 3, one).encode()

    def test_char2_transvection_involution(self):
        x = elementary_matrix(1, 2, ring_t(2, 2))
        assert (x * x).encode() == matrix_identity(2, 2).encode()

    def test_inverse_via_adjugate(self):
        rng = random.Random(1)
        one = ring_one(3, 2)
        m = matrix_identity(3, 2)
        for _ in range(8):
            r, c = rng.sample([1, 2, 3], 2)
            coeffs = tuple(rng.randrange(3) for _ in range(2))
            m = m * elementary_matrix(r, c, RingElement(3, coeffs))
        assert m.det() == one
        assert (m * m.inverse()).encode() == matrix_identity(3, 2).encode()

    def test_matrix_op_det_check(self):
        bad = Matrix3(tuple(ring_zero(2, 1) for _ in range(9)))
        with pytest.raises(Exception):
            matrix_op("inv", bad)


class TestPermutation:
    def test_right_action_convention(self):
        # (a*b)(x) = b(a(x)): (01)*(12) maps 0->2, 2->1, 1->0
        a = perm_from_cycles(3, [(0, 1)])
        b = perm_from_cycles(3, [(1, 2)])
        assert (a * b).images == (2, 0, 1)

    def test_identity(self):
        s = perm_from_cycles(3, [(0, 1, 2)])
        assert (perm_identity(3) * s).images == s.images

    def test_cycle_inverse(self):
        s = perm_from_cycles(3, [(0, 1, 2)])
        assert s.inverse().images == perm_from_cycles(3, [(0, 2, 1)]).images

    def test_degree_mismatch(self):
        with pytest.raises(UsageError):
            perm_compose("mul", perm_identity(3), perm_identity(4))

    def test_not_bijection(self):
        with pytest.raises(UsageError):
            Permutation((0, 0, 1))

    def test_perm_laws_random(self):
        rng = random.Random(2)
        elems = [Permutation(tuple(rng.sample(range(6), 6))) for _ in range(30)]
        for _ in range(10_000):
            a, b, c = rng.choice(elems), rng.choice(elems), rng.choice(elems)
            assert ((a * b) * c).images == (a * (b * c)).images
        for a in elems:
            assert (a * a.inverse()).images == perm_identity(6).images
            assert a.inverse().inverse().images == a.images


class TestProducts:
    def test_direct_componentwise(self):
        a = DirectProductElement((perm_from_cycles(2, [(0, 1)]), perm_identity(3)))
        e = DirectProductElement((perm_identity(2), perm_identity(3)))
        assert (e * a).encode() == a.encode()
        assert (a * a.inverse()).encode() == e.encode()

    def test_wreath_square_of_swap_with_lamp(self):
        # in C2 wr C2: ((1,0), swap)^2 = ((1,1), id), by hand expansion
        one = perm_identity(2)
        lamp = perm_from_cycles(2, [(0, 1)])
        g = FiniteWreathElement((lamp, one), 1, 2)
        sq = g * g
        assert sq.shift == 0
        assert sq.base == (lamp, lamp)

    def test_wreath_identity(self):
        one = perm_identity(2)
        ident = FiniteWreathElement((one, one), 0, 2)
        f = FiniteWreathElement((perm_from_cycles(2, [(0, 1)]), one), 1, 2)
        assert (ident * f).encode() == f.encode()
        assert (f * f.inverse()).encode() == ident.encode()

    def test_wreath_commutator_support_shift(self):
        # [(f,1),(1,g)] has base x -> f(x)^-1 f(x g^-1)
        one = perm_identity(2)
        lamp = perm_from_cycles(2, [(0, 1)])
        k = 3
        f = FiniteWreathElement((lamp, one, one), 0, k)
        g = FiniteWreathElement((one, one, one), 1, k)
        got = commutator(f, g)
        assert got.shift == 0
        expect = tuple(f.base[x].inverse() * f.base[(x - 1) % k] for x in range(k))
        assert got.base == expect

    def test_wreath_assoc_random(self):
        rng = random.Random(3)
        one = perm_identity(3)
        pool = [perm_identity(3), perm_from_cycles(3, [(0, 1)]),
                perm_from_cycles(3, [(0, 1, 2)])]
        elems = [FiniteWreathElement(tuple(rng.choice(pool) for _ in range(4)),
                                     rng.randrange(4), 4)
                 for _ in range(40)]
        for _ in range(10_000):
            a, b, c = rng.choice(elems), rng.choice(elems), rng.choice(elems)
            assert ((a * b) * c).encode() == (a * (b * c)).encode()


class TestGroupHandle:
    def test_generator_inverse_laws(self):
        for handle in (cyclic_handle(5), symmetric_handle(4)):
            for _, g in handle.generators:
                assert handle.equal(g.inverse().inverse(), g)
                assert handle.equal(g * g.inverse(), handle.identity)

    def test_encoding_injective_on_ball(self):
        from metriclab.cayley import bfs_closure

        graph = bfs_closure(symmetric_handle(4))
        assert len(set(graph.element_bytes)) == graph.n == 24

    def test_element_order(self):
        h = cyclic_handle(6)
        assert h.element_order(h.generators[0][1]) == 6
