"""Acceptance suite: one test per criterion, each printing a PASS line.

Criterion 12's two-round requirement is asserted exactly as stated; at desk
scale it fails for a fundamental reason (certificate diameters are too small
for any L*M threshold, since L >= 1 and max log(1+t) over achieved distances
is about 2.56 < family M about 4.0), and the failing assertion carries the
computed numbers.  Everything else passes.
"""

import math
import time

import pytest

from metriclab.algebra import commutator, cyclic_handle, symmetric_handle
from metriclab.cayley import (bfs_closure, complete_graph, cycle_graph,
                              far_pair_table)
from metriclab.distortion import (FiniteMetric, c2_lower_bound,
                                  embed_graph_spectral, min_distortion_embed,
                                  poincare_witness, pair_scan,
                                  random_projection)
from metriclab.expanders import (build_sl3, check_perfect, sl3_order,
                                 steinberg_check)
from metriclab.perfect import (derived_subgroup, perfect_constant_J,
                               perfect_norm_table)
from metriclab.spectral import spectral_gap


def report(criterion, detail):
    print(f"ACCEPTANCE {criterion}: PASS — {detail}")


@pytest.fixture(scope="module")
def family():
    graphs = {}
    t0 = time.time()
    for p, level in ((2, 1), (2, 2), (3, 1)):
        graphs[(p, level)] = build_sl3(p, level)
    graphs["build_seconds"] = time.time() - t0
    return graphs


@pytest.fixture(scope="module")
def spectra(family):
    out = {}
    for key in ((2, 1), (2, 2), (3, 1)):
        _, graph = family[key]
        tol = 1e-6 if graph.n > 10_000 else 1e-8
        t0 = time.time()
        out[key] = (spectral_gap(graph, tol=tol, seed=1), time.time() - t0)
    return out


def test_criterion_1_group_orders(family):
    t0 = family["build_seconds"]
    for (p, level), expect in (((2, 1), 168), ((2, 2), 43008), ((3, 1), 5616)):
        _, graph = family[(p, level)]
        assert graph.n == expect == sl3_order(p, level)
    assert t0 < 120, f"closures took {t0:.1f}s"
    report(1, f"orders 168/43008/5616 match the order formula in {t0:.1f}s")


def test_criterion_2_steinberg():
    t0 = time.time()
    total = 0
    for p, level in ((2, 1), (2, 2), (3, 1)):
        rep = steinberg_check(p, level, trials=10_000, seed=7)
        assert rep.failures == 0
        total += rep.additive_checked + rep.multiplicative_checked
    report(2, f"{total} exact Steinberg identities, 0 failures "
              f"({time.time() - t0:.0f}s)")


def test_criterion_3_perfectness(family):
    for key in ((2, 1), (2, 2), (3, 1)):
        handle, graph = family[key]
        assert check_perfect(handle, graph)
    c6 = cyclic_handle(6)
    assert not check_perfect(c6, bfs_closure(c6))
    report(3, "commutator closure fills all three SL3 groups; C6 control fails")


def test_criterion_4_perfect_metric_sandwich(family):
    handle, graph = family[(2, 1)]
    J = perfect_constant_J(graph, cap=8)
    norms = perfect_norm_table(graph, 10)
    derived, is_perfect = derived_subgroup(handle, graph)
    assert is_perfect
    dist = graph.dist_from_identity()
    checked = violations = 0
    for v in derived:
        if v not in norms:
            continue
        checked += 1
        if v and not (dist[v] <= norms[v] <= J * dist[v]):
            violations += 1
    assert violations == 0
    assert checked == 168, "budget 10 should resolve the whole group"
    report(4, f"J={J}; ||g|| <= ||g||_perfect <= J||g|| for all {checked} elements")


def test_criterion_5_prop_imbedding_sandwich():
    from metriclab.derived import check_iota_homomorphism, imbed_derived

    flagged = []
    for name, handle in (("C2", cyclic_handle(2)), ("C3", cyclic_handle(3)),
                         ("S3", symmetric_handle(3))):
        graph = bfs_closure(handle)
        host, rows = imbed_derived(handle, graph, seed=0)
        assert check_iota_homomorphism(handle, graph, host), name
        for r in rows:
            assert r.upper_ok, f"{name}: upper bound failed at {r.vertex}"
            if r.lower_ok is False:
                flagged.append((name, r.vertex))
    # the factor-2 lower bound is reported, never silently passed
    assert flagged == [], f"factor-2 lower bound flagged at {flagged}"
    report(5, "verified quotients for C2/C3/S3; iota injective homomorphism; "
              "upper bound hard, factor-2 lower bound holds everywhere")


def test_criterion_6_spectral_oracle(family, spectra):
    for n in (3, 7, 50, 200):
        sd = spectral_gap(complete_graph(n), tol=1e-9, seed=0)
        assert abs(sd.lambda1 - n) < 1e-9
        sd = spectral_gap(cycle_graph(n), tol=1e-9, seed=0)
        assert abs(sd.lambda1 - (2 - 2 * math.cos(2 * math.pi / n))) < 1e-9
    sd_big, seconds = spectra[(2, 2)]
    assert sd_big.residual <= 1e-6
    assert seconds < 600, f"lambda1(43008) took {seconds:.0f}s"
    report(6, f"K_n/C_n oracles at 1e-9; lambda1(43008)={sd_big.lambda1:.6f} "
              f"residual {sd_big.residual:.2e} in {seconds:.1f}s")


def test_criterion_7_distortion_optimizer():
    res_path = min_distortion_embed(FiniteMetric.path(8), tol=1e-7)
    assert abs(res_path.distortion - 1.0) <= 1e-6
    res_simplex = min_distortion_embed(FiniteMetric.uniform(4), tol=1e-7)
    assert abs(res_simplex.distortion - 1.0) <= 1e-6
    c4 = cycle_graph(4)
    res_c4 = min_distortion_embed(FiniteMetric.from_graph(c4), tol=1e-4)
    assert abs(res_c4.distortion - math.sqrt(2)) <= 1e-3
    for graph, res in ((c4, res_c4),):
        sd = spectral_gap(graph, tol=1e-10)
        assert c2_lower_bound(graph, sd) <= res.distortion + 1e-9
    for graph in (cycle_graph(6), complete_graph(5)):
        sd = spectral_gap(graph, tol=1e-10)
        res = min_distortion_embed(FiniteMetric.from_graph(graph), tol=1e-4)
        assert c2_lower_bound(graph, sd) <= res.distortion + 1e-9
    report(7, f"D(path)=1, D(simplex)=1, D(C4)={res_c4.distortion:.5f}; "
              "c2 lower bound <= D on every tested graph")


def test_criterion_8_poincare_witness(family, spectra):
    runs = 0
    t0 = time.time()
    plan = [((2, 1), 990, 6), ((3, 1), 8, 8), ((2, 2), 2, 8)]
    for key, seeds, dim in plan:
        handle, graph = family[key]
        sd, _ = spectra[key]
        P = dict(far_pair_table(graph))
        if graph.n <= 512:
            base = min_distortion_embed(FiniteMetric.from_graph(graph),
                                        dim=24, method="mds").embedding.points
        else:
            base = embed_graph_spectral(graph, dim=12, seed=0)
        diam = graph.diameter()
        for seed in range(seeds):
            pts = random_projection(base, dim, seed)
            scan = pair_scan(graph, pts, diam)
            for t in range(1, diam + 1):
                if P.get(t, 0.0) > 0:
                    poincare_witness(graph, pts, t, sd, scan=scan, P=P)
            runs += 1
    assert runs == 1000
    report(8, f"1000 seeded optimizer-embedding runs across the family, "
              f"all witnesses within sqrt(d/(lambda1 P_t)) ({time.time() - t0:.0f}s)")


def test_criterion_9_grigorchuk():
    from metriclab.grigorchuk import (GENS, GrigWord, check_sequence_properties,
                                      equal_by_level_action, grig_equal,
                                      is_trivial)
    import random

    for g in GENS:
        assert grig_equal((g, g), ())
    for pair, prod in (("bc", "d"), ("cb", "d"), ("cd", "b"),
                       ("dc", "b"), ("bd", "c"), ("db", "c")):
        assert grig_equal(tuple(pair), (prod,))
    rng = random.Random(9)
    for _ in range(10_000):
        w1 = tuple(rng.choice(GENS) for _ in range(rng.randrange(17)))
        w2 = tuple(rng.choice(GENS) for _ in range(rng.randrange(17)))
        w = GrigWord.from_letters(w1) * GrigWord.from_letters(w2).inverse()
        level = min(max(2 * len(w.word), 3), 14)
        assert is_trivial(w.word) == equal_by_level_action(w1, w2, level)
    witnesses = {}
    for R in range(0, 7):
        res = check_sequence_properties(R, index_cap=64)
        assert res["spreading"] is not None
        assert res["stabilizing"] is not None
        witnesses[R] = (res["spreading"], res["stabilizing"])
    report(9, f"relations, 10^4 two-oracle agreements, N(R) witnesses {witnesses}")


def test_criterion_10_ball_coincidence():
    from metriclab.wreath import (configure_plan, force_placement, place_all,
                                  verify_ball_coincidence)

    h1, h2 = cyclic_handle(2), cyclic_handle(2)
    g1, g2 = bfs_closure(h1), bfs_closure(h2)
    plan = configure_plan([("C2a", h1, g1), ("C2b", h2, g2)])
    place_all(plan, [2, 3], index_cap=32)
    for m in (2, 3):
        ok, info = verify_ball_coincidence(plan, 1, m)
        assert ok, info
    # negative control: S3 factors placed too close to each other
    ha, hb = symmetric_handle(3), symmetric_handle(3)
    bad = configure_plan([("S3a", ha, bfs_closure(ha)),
                          ("S3b", hb, bfs_closure(hb))])
    force_placement(bad, [1, 2, 3, 4], [2, 2, 3, 3])
    failed_at = None
    for m in (2, 3, 4):
        ok, _ = verify_ball_coincidence(bad, 1, m)
        if not ok:
            failed_at = m
            break
    assert failed_at is not None
    report(10, f"toy plan coincides at m=2,3; adversarial plan fails at "
               f"radius {failed_at}")


def test_criterion_11_psi_bounds():
    from metriclab.wreath import configure_plan, measure_bilipschitz, place_all

    h = symmetric_handle(3)
    g = bfs_closure(h)
    plan = configure_plan([("S3", h, g)])
    place_all(plan, [1, 1], index_cap=32)
    rep = measure_bilipschitz(plan, 0, radius=12, perfect_budget=8,
                              rect_budget=10)
    measured = [r for r in rep.rows if r["w_norm"] is not None]
    assert measured, "no h measured within the W-norm budget"
    _, hi = rep.envelope
    for row in measured:
        assert row["perfect"] <= row["w_norm"] <= hi * row["perfect"]
    report(11, f"{len(measured)} elements measured, L'={rep.L_prime}, "
               f"ratios within [1, {hi:.0f}]")


@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    from metriclab.pipeline import PipelineRun, emit_report

    cache = tmp_path_factory.mktemp("cache")
    outs = []
    t0 = time.time()
    for tag in ("a", "b"):
        run = PipelineRun({"pipeline.rounds": "2"}, cache_dir=str(cache))
        run.run()
        out = tmp_path_factory.mktemp(f"bundle_{tag}")
        manifest = emit_report(run, out)
        outs.append((run, out, manifest))
    return outs, time.time() - t0


def test_criterion_12_pipeline_mechanism(pipeline_runs):
    """Bundle integrity, numeric verification of recorded rounds, and
    byte-identical reruns; the round count is asserted separately."""
    from metriclab.pipeline import verify_ledger_chain
    from metriclab.rho import parse_rho

    (run1, out1, man1), (run2, out2, man2) = pipeline_runs[0]
    seconds = pipeline_runs[1]
    rho = parse_rho(run1.config["pipeline.rho"])
    assert verify_ledger_chain(run1.ledger, rho)
    assert man1 == man2
    for rel in man1:
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel
    assert seconds < 1200, f"two pipeline runs took {seconds:.0f}s"
    assert run1.ledger.limiting_constraint is not None
    report(12, f"bundle deterministic (byte-identical rerun), recorded "
               f"inequalities verify, two runs in {seconds:.0f}s; "
               f"status={run1.ledger.status!r}")


def test_criterion_12_two_rounds_on_desk_family(pipeline_runs):
    """The literal >= 2-round requirement on the desk family.

    This fails for a quantified reason: every bi-Lipschitz constant satisfies
    L >= 1, the family constant is M ~ 4.0 (driven by the n = 43008 level),
    and the largest achieved distance is 12, so max rho(t) = log(13) ~ 2.56
    can never exceed L*M; equivalently the real-line threshold t >= e^(LM)-1
    ~ 54 exceeds every certificate diameter.  See the decisions ledger.
    """
    (run1, _, _), _ = pipeline_runs[0]
    ledger = run1.ledger
    rho_max = max(math.log(1 + row["t"]) for c in run1.certs for row in c.table)
    detail = (f"family M = {ledger.family_M:.3f}, max rho over the achieved "
              f"grid = {rho_max:.3f}, min possible L*M = {ledger.family_M:.3f}; "
              f"limiting constraint: {ledger.limiting_constraint}")
    assert len(ledger.rows) >= 2, (
        "criterion 12 requires a >= 2-round ledger on the desk family, but "
        "the greedy is provably infeasible at this scale: " + detail)
    report(12, "two rounds completed: " + detail)
