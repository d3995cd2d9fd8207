import math

import pytest

from metriclab.algebra import UsageError, cyclic_handle
from metriclab.cayley import bfs_closure, cycle_graph
from metriclab.expanders import (build_sl3,
                                 certificate, check_perfect,
                                 check_quotient_compatibility, family_constant,
                                 sl3_generators, sl3_order, steinberg_check)
from metriclab.spectral import spectral_gap


def test_order_formula():
    assert sl3_order(2, 1) == 168
    assert sl3_order(2, 2) == 168 * 2 ** 8 == 43008
    assert sl3_order(3, 1) == (27 - 1) * (27 - 3) * (27 - 9) // 2 == 5616


def test_level1_closure_matches_formula():
    _, graph = build_sl3(2, 1)
    assert graph.n == 168


def test_sl3f3_closure_matches_formula():
    _, graph = build_sl3(3, 1)
    assert graph.n == 5616


def test_level_caps_enforced():
    with pytest.raises(UsageError):
        build_sl3(2, 3)
    with pytest.raises(UsageError):
        build_sl3(3, 2)
    with pytest.raises(UsageError):
        build_sl3(5, 1)


def test_quotient_compatibility():
    assert check_quotient_compatibility(2)


def test_steinberg_small():
    rep = steinberg_check(2, 2, trials=200, seed=0)
    assert rep.failures == 0
    assert rep.additive_checked == rep.multiplicative_checked == 200 * 6
    rep3 = steinberg_check(3, 2, trials=100, seed=1)
    assert rep3.failures == 0


def test_perfectness_and_abelian_control():
    handle, graph = build_sl3(2, 1)
    assert check_perfect(handle, graph)
    c6 = cyclic_handle(6)
    assert not check_perfect(c6, bfs_closure(c6))


def test_certificate_on_c4():
    graph = cycle_graph(4)
    sd = spectral_gap(graph, tol=1e-10)
    cert = certificate(graph, sd, name="C4", p=0, level=0, genset="cycle")
    table = {row["t"]: row for row in cert.table}
    # closed form: lambda1 = 2, d_reg = 2, P_2 = 1/4 gives M(2) = 2
    assert table[2]["M_t"] == pytest.approx(2.0)
    assert cert.lower_bound == pytest.approx(1.0)
    assert cert.diameter == 2
    assert cert.M_star == pytest.approx(math.sqrt(2 / (2 * 0.75)))


def test_certificate_m_monotone():
    _, graph = build_sl3(2, 1)
    sd = spectral_gap(graph, tol=1e-8, seed=1)
    cert = certificate(graph, sd, name="sl3", p=2, level=1)
    ms = [row["M_t"] for row in cert.table]
    assert all(b >= a - 1e-12 for a, b in zip(ms, ms[1:]))
    assert cert.lambda1 > 0


def test_family_constant_is_max():
    graph = cycle_graph(4)
    sd = spectral_gap(graph, tol=1e-10)
    a = certificate(graph, sd, name="a", p=0, level=0)
    b = certificate(cycle_graph(8), spectral_gap(cycle_graph(8), tol=1e-10),
                    name="b", p=0, level=0)
    assert family_constant([a, b]) == max(a.M_star, b.M_star)


def test_large_genset_level1_near_complete():
    handle, graph = build_sl3(2, 1, genset="large")
    # A is all of SL3(F2) at level 1: every non-identity element is a generator
    assert graph.diameter() <= 3


def test_truncation_compatibility_generators():
    gens2 = sl3_generators(2, 2)
    gens1 = sl3_generators(2, 1)
    from metriclab.expanders import truncate_matrix

    named1 = {n: g for n, g in gens1}
    for name, g in gens2:
        if name in named1:
            assert truncate_matrix(g, 1).encode() == named1[name].encode()
