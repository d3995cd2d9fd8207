import random

import pytest

from metriclab.grigorchuk import (GENS, GRIG_IDENTITY, GrigWord, Ray,
                                  UndecidedError, act_on_finite, act_on_ray,
                                  check_sequence_properties,
                                  equal_by_level_action, find_rectifier,
                                  grig_equal, grig_growth, is_trivial,
                                  level_tables, marked_ray, reduce_word,
                                  schreier_ball, schreier_distance,
                                  schreier_geodesic_word, word_level_table)


class TestRelations:
    @pytest.mark.parametrize("g", GENS)
    def test_involutions(self, g):
        assert grig_equal((g, g), ())

    @pytest.mark.parametrize("pair,prod", [("bc", "d"), ("cb", "d"),
                                           ("cd", "b"), ("dc", "b"),
                                           ("bd", "c"), ("db", "c")])
    def test_klein(self, pair, prod):
        assert grig_equal(tuple(pair), (prod,))

    def test_not_equal(self):
        assert not grig_equal(("a",), ("b",))

    def test_reflexive(self):
        w = ("a", "b", "a", "c")
        assert grig_equal(w, w)

    def test_reduction_alternates(self):
        w = reduce_word(("a", "a", "b", "c", "a", "a", "d"))
        # aa cancels, bc fuses to d, then dd cancels entirely
        assert w == ()


class TestAction:
    def test_a_flips_first(self):
        assert act_on_ray(("a",), marked_ray(0)) == Ray("0")

    def test_bcd_fix_rightmost(self):
        for g in "bcd":
            assert act_on_ray((g,), marked_ray(0)) == marked_ray(0)

    def test_involutions_on_random_rays(self):
        rng = random.Random(0)
        for _ in range(1000):
            prefix = "".join(rng.choice("01") for _ in range(rng.randrange(8)))
            ray = Ray.from_string(prefix)
            g = rng.choice(GENS)
            assert act_on_ray((g, g), ray) == ray

    def test_finite_action_matches_ray_action(self):
        rng = random.Random(1)
        for _ in range(300):
            word = tuple(rng.choice(GENS) for _ in range(rng.randrange(1, 10)))
            bits = "".join(rng.choice("01") for _ in range(10))
            moved = act_on_finite(word, bits)
            ray = Ray.from_string(bits + "0")   # pad so the suffix is explicit
            img = act_on_ray(word, ray)
            got = img.prefix.ljust(11, "1")[:10]
            assert moved == got

    def test_level_tables_match_pointwise(self):
        rng = random.Random(2)
        tables = level_tables(6)
        for g in GENS:
            for _ in range(50):
                x = rng.randrange(1 << 6)
                bits = format(x, "06b")
                assert int(act_on_finite((g,), bits), 2) == tables[g][x]


class TestEqualityOracles:
    def test_oracles_agree_random_pairs(self):
        rng = random.Random(3)
        for _ in range(10_000):
            w1 = tuple(rng.choice(GENS) for _ in range(rng.randrange(17)))
            w2 = tuple(rng.choice(GENS) for _ in range(rng.randrange(17)))
            u = GrigWord.from_letters(w1)
            v = GrigWord.from_letters(w2)
            w = u * v.inverse()
            by_contraction = is_trivial(w.word)
            by_level = equal_by_level_action(u, v, min(max(2 * len(w.word), 3), 14))
            assert by_contraction == by_level

    def test_equal_pairs_built_from_relators(self):
        rng = random.Random(4)
        relators = [("a", "a"), ("b", "b"), ("c", "c"), ("d", "d"),
                    ("b", "c", "d"), ("d", "c", "b"),
                    ("a", "d") * 4]   # (ad)^4 = 1 in the Grigorchuk group
        for _ in range(100):
            w1 = tuple(rng.choice(GENS) for _ in range(rng.randrange(8)))
            rel = relators[rng.randrange(len(relators))]
            cut = rng.randrange(len(w1) + 1)
            w2 = w1[:cut] + rel + w1[cut:]
            assert grig_equal(w1, w2)

    def test_ad_order_exactly_8(self):
        w = ("a", "d") * 4
        assert is_trivial(w)
        assert not is_trivial(("a", "d") * 2)


class TestGrowth:
    def test_small_values(self):
        gf = grig_growth(2)
        assert gf[0] == 1
        assert gf[1] == 5
        assert gf[2] == 11

    def test_growth_prefix(self):
        # second oracle: BFS with level-action canonical keys must agree
        gf = grig_growth(6)
        assert gf.sizes == (1, 5, 11, 23, 40, 68, 108)
        sizes = _growth_by_level_action(6)
        assert sizes == list(gf.sizes)

    def test_submultiplicative_strictly(self):
        gf = grig_growth(8)
        for R in range(3, 9):
            assert gf[R] < gf[1] * gf[R - 1]

    def test_radius_cap(self):
        with pytest.raises(Exception):
            grig_growth(13, cap=12)


def _growth_by_level_action(R):
    # canonical key = action table on level 2R (safe activity depth)
    k = min(2 * R, 14)
    seen = {word_level_table((), k).tobytes()}
    frontier = [()]
    sizes = [1]
    for _ in range(R):
        nxt = []
        for w in frontier:
            for g in GENS:
                u = reduce_word(w + (g,))
                key = word_level_table(u, k).tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(u)
        sizes.append(sizes[-1] + len(nxt))
        frontier = nxt
    return sizes


class TestSchreier:
    def test_radius0(self):
        ball = schreier_ball(marked_ray(0), 0)
        assert len(ball.distances) == 1

    def test_ball_around_base(self):
        ball = schreier_ball(marked_ray(0), 1)
        assert set(ball.distances) == {marked_ray(0), marked_ray(1)}

    def test_marked_distances(self):
        assert schreier_distance(marked_ray(0), marked_ray(1)) == 1
        assert schreier_distance(marked_ray(2), marked_ray(3)) == 3

    def test_triangle_inequality_sampled(self):
        rays = [marked_ray(i) for i in range(6)]
        d = {(i, j): schreier_distance(rays[i], rays[j])
             for i in range(6) for j in range(6)}
        for i in range(6):
            for j in range(6):
                for k in range(6):
                    assert d[i, j] <= d[i, k] + d[k, j]

    def test_geodesic_word_is_witness(self):
        for i, j in ((0, 1), (2, 3), (1, 4)):
            w = schreier_geodesic_word(i, j, 64)
            assert act_on_ray(w, marked_ray(i)) == marked_ray(j)
            assert len(w) == schreier_distance(marked_ray(i), marked_ray(j))

    def test_dot_export(self):
        ball = schreier_ball(marked_ray(0), 1)
        dot = ball.to_dot_edges()
        assert '--' in dot and 'label' in dot


class TestSequenceProperties:
    def test_r0_trivial(self):
        res = check_sequence_properties(0, index_cap=8)
        assert res["spreading"] == 0
        assert res["stabilizing"] == 0

    def test_witnesses_exist_r4(self):
        res = check_sequence_properties(4, index_cap=20)
        assert res["spreading"] is not None
        assert res["stabilizing"] is not None

    def test_monotone_in_R(self):
        prev_s = prev_t = 0
        for R in range(0, 5):
            res = check_sequence_properties(R, index_cap=20)
            assert res["spreading"] >= prev_s
            assert res["stabilizing"] >= prev_t
            prev_s, prev_t = res["spreading"], res["stabilizing"]


class TestRectifier:
    def test_identity_when_i_equals_j(self):
        assert find_rectifier(1, 1, [0, 1, 2], budget=2) == GRIG_IDENTITY

    def test_x0_to_x1_with_marked(self):
        marked = list(range(6))
        g = find_rectifier(0, 1, marked, budget=10)
        assert act_on_ray(g, marked_ray(0)) == marked_ray(1)
        # replay: no other marked ray lands on a different marked ray
        marked_rays = {marked_ray(k) for k in marked}
        for k in marked:
            if k == 0:
                continue
            img = act_on_ray(g, marked_ray(k))
            assert img not in marked_rays or img == marked_ray(k)

    def test_budget_exhaustion(self):
        with pytest.raises(UndecidedError):
            find_rectifier(0, 5, list(range(8)), budget=2)
