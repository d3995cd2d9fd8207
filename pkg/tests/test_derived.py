import pytest

from metriclab.algebra import commutator, cyclic_handle
from metriclab.cayley import bfs_closure
from metriclab.derived import (BallBudgetError, QuotientSearchError,
                               check_iota_homomorphism,
                               count_free_product_ball, faithfulness_scale,
                               find_ball_faithful_quotient, free_product_ball,
                               imbed_derived, regular_representation,
                               reverify_candidate)


@pytest.fixture(scope="module")
def c2():
    h = cyclic_handle(2)
    return h, bfs_closure(h)


@pytest.fixture(scope="module")
def c2_host(c2):
    handle, graph = c2
    return imbed_derived(handle, graph, seed=0)


class TestFreeProductBall:
    def test_radius0(self, c2):
        _, graph = c2
        assert free_product_ball(graph, 0) == [()]

    def test_c2_radius1(self, c2):
        _, graph = c2
        ball = free_product_ball(graph, 1)
        assert len(ball) == 4
        assert set(ball) == {(), (("g", 1),), (("x", 1),), (("x", -1),)}

    def test_c2_radius2(self, c2):
        _, graph = c2
        ball = free_product_ball(graph, 2)
        assert len(ball) == 10
        assert (("g", 1), ("x", 1)) in ball
        assert (("x", -1), ("g", 1)) in ball
        assert (("x", 2),) in ball

    def test_c2_radius5_count(self, c2):
        # enumeration oracle: 94 normal forms of length <= 5 in C2 * Z
        _, graph = c2
        assert count_free_product_ball(graph, 5) == 94

    def test_budget_error(self, c2):
        _, graph = c2
        with pytest.raises(BallBudgetError):
            free_product_ball(graph, 5, count_budget=20)


class TestQuotientSearch:
    def test_trivial_group(self):
        h = cyclic_handle(1)
        graph = bfs_closure(h)
        cand = find_ball_faithful_quotient(h, graph, m=2, seed=0)
        # only x-syllables need separating: x^k distinct for |k| <= 5
        assert cand.ball_size == 11
        assert reverify_candidate(h, graph, cand)

    def test_c2_quotient_verified(self, c2):
        handle, graph = c2
        cand = find_ball_faithful_quotient(handle, graph, m=2, seed=0)
        assert cand.verified_radius == 5
        assert cand.ball_size == 94
        assert reverify_candidate(handle, graph, cand)

    def test_regular_rep_is_homomorphism(self, c2):
        handle, graph = c2
        tables = regular_representation(handle, graph, 6)
        from metriclab.algebra import Permutation
        from metriclab.perfect import element_object

        perms = {v: Permutation(t) for v, t in tables.items()}
        for a in range(graph.n):
            for b in range(graph.n):
                oa = element_object(handle, graph, a)
                ob = element_object(handle, graph, b)
                c = graph.index[handle.encode(oa * ob)]
                assert (perms[a] * perms[b]).images == perms[c].images

    def test_identity_x_rejected(self, c2):
        # adversarial: an x-image of order <= 2(2m+1) can never pass
        handle, graph = c2
        with pytest.raises(QuotientSearchError):
            find_ball_faithful_quotient(handle, graph, m=2,
                                        degree_schedule=[4], seed=0, attempts=50)


class TestHost:
    def test_iota_identity(self, c2, c2_host):
        handle, graph = c2
        host, _ = c2_host
        ident = host.handle.identity
        assert host.iota[0].encode() == ident.encode()

    def test_iota_is_commutator(self, c2, c2_host):
        handle, graph = c2
        host, _ = c2_host
        s_vertex = graph.index[handle.encode(handle.generators[0][1])]
        lhs = commutator(host.t_elements["s"], host.r_element)
        assert lhs.encode() == host.iota[s_vertex].encode()

    def test_iota_homomorphism(self, c2, c2_host):
        handle, graph = c2
        host, _ = c2_host
        assert check_iota_homomorphism(handle, graph, host)

    def test_sandwich_c2(self, c2_host):
        host, rows = c2_host
        by_norm = {r.word_norm: r for r in rows}
        assert by_norm[0].perfect_norm == 0
        assert by_norm[1].perfect_norm == 4
        assert 2 <= by_norm[1].perfect_norm <= 4
        assert all(r.upper_ok for r in rows)

    def test_sandwich_c3(self):
        h = cyclic_handle(3)
        graph = bfs_closure(h)
        host, rows = imbed_derived(h, graph, seed=0)
        assert check_iota_homomorphism(h, graph, host)
        for r in rows:
            assert r.upper_ok
            assert r.perfect_norm <= 4 * r.word_norm
            assert r.perfect_norm >= 2 * r.word_norm  # flagged bound, holds here

    def test_faithfulness_scale(self, c2):
        _, graph = c2
        assert faithfulness_scale(graph) == 2
