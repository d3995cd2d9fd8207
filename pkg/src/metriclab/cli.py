"""Command-line interface.

Subcommands: group build | cayley stats | spectral | perfect-norm |
imbed-derived | grig {schreier,growth,props} | wreath {plan,verify,measure} |
distortion {profile,bound,optimize} | pipeline run.
Exit codes: 0 success, 2 partial ledger, 3 precondition/config error,
4 internal assertion failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _parse_group(spec: str, budget: int = 200_000):
    """Carrier spec: sl3:p:level[:genset] | cyclic:n | sym:n."""
    from .algebra import cyclic_handle, symmetric_handle
    from .cayley import bfs_closure
    from .expanders import build_sl3

    parts = spec.split(":")
    if parts[0] == "sl3":
        p, level = int(parts[1]), int(parts[2])
        genset = parts[3] if len(parts) > 3 else "small"
        return build_sl3(p, level, genset=genset)
    if parts[0] == "cyclic":
        h = cyclic_handle(int(parts[1]))
    elif parts[0] == "sym":
        h = symmetric_handle(int(parts[1]))
    else:
        raise ValueError(f"unknown carrier {parts[0]!r}")
    return h, bfs_closure(h, budget=budget)


def _out(args, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True, default=float)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "result.json").write_text(text + "\n")
    print(text)


def cmd_group_build(args) -> int:
    handle, graph = _parse_group(args.carrier, budget=args.budget_elements)
    payload = {"carrier": graph.carrier_desc, "order": graph.n,
               "degree": graph.degree, "diameter": graph.diameter()}
    if args.cache_dir:
        from .graphio import GraphCache, cache_key

        key = cache_key(graph.carrier_desc,
                        [g.encode() for _, g in handle.generators],
                        args.budget_elements)
        path = GraphCache(args.cache_dir).store(key, graph)
        payload["cache_file"] = str(path)
    _out(args, payload)
    return 0


def cmd_cayley_stats(args) -> int:
    from .cayley import growth_function, far_pair_table

    handle, graph = _parse_group(args.carrier)
    growth = growth_function(graph, graph.diameter())
    _out(args, {
        "order": graph.n,
        "degree": graph.degree,
        "diameter": graph.diameter(),
        "growth": list(growth.sizes),
        "far_pair_table": [{"t": t, "P_t": P} for t, P in far_pair_table(graph)],
    })
    return 0


def cmd_spectral(args) -> int:
    from .spectral import spectral_gap

    handle, graph = _parse_group(args.carrier)
    sd = spectral_gap(graph, tol=args.tol, seed=args.seed)
    _out(args, {"lambda1": sd.lambda1, "d_reg": sd.d_reg,
                "residual": sd.residual, "iterations": sd.iterations})
    return 0


def cmd_perfect_norm(args) -> int:
    from .perfect import derived_subgroup, perfect_norm_table, export_norm_table

    handle, graph = _parse_group(args.carrier)
    derived, is_perfect = derived_subgroup(handle, graph)
    norms = perfect_norm_table(graph, args.budget)
    known = {v: n for v, n in norms.items() if v in derived}
    payload = {"order": graph.n, "derived_size": len(derived),
               "perfect": is_perfect, "budget": args.budget,
               "norms_known": len(known)}
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        export_norm_table(graph, known, Path(args.out) / "perfect_norms.csv")
        payload["csv"] = str(Path(args.out) / "perfect_norms.csv")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_imbed_derived(args) -> int:
    from .derived import imbed_derived, sandwich_report_csv, sandwich_report_json

    handle, graph = _parse_group(args.carrier)
    host, rows = imbed_derived(handle, graph, seed=args.seed)
    report = sandwich_report_json(handle, graph, host, rows)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "sandwich.json").write_text(report + "\n")
        sandwich_report_csv(graph, rows, Path(args.out) / "sandwich.csv")
    print(report)
    violations = [r for r in rows if r.lower_ok is False]
    if violations:
        print(f"WARNING: factor-2 lower bound violated at {len(violations)} elements",
              file=sys.stderr)
    return 0


def cmd_grig(args) -> int:
    from . import grigorchuk as gr

    if args.what == "schreier":
        ball = gr.schreier_ball(gr.marked_ray(args.base), args.radius)
        payload = {"base": args.base, "radius": args.radius,
                   "vertices": len(ball.distances)}
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "schreier.dot").write_text(ball.to_dot_edges() + "\n")
        _out(args, payload)
    elif args.what == "growth":
        gf = gr.grig_growth(args.radius)
        _out(args, {"radius": args.radius, "growth": list(gf.sizes)})
    else:
        results = [gr.check_sequence_properties(R, args.index_cap)
                   for R in range(args.radius + 1)]
        _out(args, {"properties": results})
    return 0


def _toy_plan(args):
    from .algebra import symmetric_handle
    from .cayley import bfs_closure
    from .wreath import configure_plan, place_all

    h = symmetric_handle(3)
    g = bfs_closure(h)
    plan = configure_plan([("S3", h, g)])
    place_all(plan, [args.m] * plan.total_indices, index_cap=args.index_cap)
    return plan


def cmd_wreath(args) -> int:
    from .wreath import (block_rectifiers, measure_bilipschitz, plan_to_json,
                         verify_ball_coincidence)

    plan = _toy_plan(args)
    if args.what == "plan":
        rect = {0: block_rectifiers(plan, 0, rect_budget=10)}
        text = plan_to_json(plan, rectifiers=rect)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "plan.json").write_text(text + "\n")
        print(text)
    elif args.what == "verify":
        ok, info = verify_ball_coincidence(plan, 1, args.m)
        _out(args, {"coincidence": ok, "info": info})
        return 0 if ok else 4
    else:
        rep = measure_bilipschitz(plan, 0, radius=args.radius)
        _out(args, {"L_prime": rep.L_prime, "envelope": list(rep.envelope),
                    "measured_K": rep.measured_K, "measured_L": rep.measured_L,
                    "unknown": rep.unknown, "rows": rep.rows})
    return 0


def cmd_distortion(args) -> int:
    from .cayley import cycle_graph
    from .distortion import (FiniteMetric, c2_lower_bound, distortion_profile,
                             min_distortion_embed)
    from .spectral import spectral_gap

    if args.carrier.startswith("cyclegraph:"):
        graph = cycle_graph(int(args.carrier.split(":")[1]))
        metric = FiniteMetric.from_graph(graph)
    else:
        handle, graph = _parse_group(args.carrier)
        if graph.n > 512:
            print("carrier too large for dense distortion work", file=sys.stderr)
            return 3
        metric = FiniteMetric.from_graph(graph)
    if args.what == "bound":
        sd = spectral_gap(graph, tol=args.tol, seed=args.seed)
        _out(args, {"c2_lower_bound": c2_lower_bound(graph, sd)})
    elif args.what == "optimize":
        res = min_distortion_embed(metric, tol=args.tol, seed=args.seed)
        _out(args, {"distortion": res.distortion, "method": res.method,
                    "converged": res.converged})
    else:
        res = min_distortion_embed(metric, tol=max(args.tol, 1e-3), seed=args.seed)
        prof = distortion_profile(res.embedding, rescale=True)
        _out(args, {"thresholds": prof.thresholds.tolist(),
                    "rho": prof.rho.tolist(), "lipschitz": prof.lipschitz})
    return 0


def cmd_pipeline_run(args) -> int:
    from .pipeline import (PipelineRun, emit_report, exit_code,
                           parse_config_text, verify_ledger_chain)
    from .rho import parse_rho

    config = {}
    if args.config:
        config.update(parse_config_text(Path(args.config).read_text()))
    if args.rho:
        config["pipeline.rho"] = args.rho
    if args.rounds is not None:
        config["pipeline.rounds"] = str(args.rounds)
    config["pipeline.seed"] = str(args.seed)
    run = PipelineRun(config, cache_dir=args.cache_dir)
    ledger = run.run()
    if args.out:
        emit_report(run, args.out)
    rho = parse_rho(run.config["pipeline.rho"])
    chain_ok = verify_ledger_chain(ledger, rho)
    print(json.dumps({
        "status": ledger.status,
        "rounds_completed": len(ledger.rows),
        "family_M": ledger.family_M,
        "chain_verified": chain_ok,
        "limiting_constraint": ledger.limiting_constraint,
        "out": args.out,
    }, indent=2, sort_keys=True))
    if not chain_ok:
        return 4
    return exit_code(run)


def make_parser() -> argparse.ArgumentParser:
    # global flags are accepted both before and after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--cache-dir", default=argparse.SUPPRESS)
    common.add_argument("--budget-elements", type=int, default=argparse.SUPPRESS)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="metriclab", parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group").add_subparsers(dest="sub", required=True)
    b = g.add_parser("build", parents=[common])
    b.add_argument("carrier")
    b.set_defaults(func=cmd_group_build)

    c = sub.add_parser("cayley").add_subparsers(dest="sub", required=True)
    s = c.add_parser("stats", parents=[common])
    s.add_argument("carrier")
    s.set_defaults(func=cmd_cayley_stats)

    sp = sub.add_parser("spectral", parents=[common])
    sp.add_argument("carrier")
    sp.set_defaults(func=cmd_spectral)

    pn = sub.add_parser("perfect-norm", parents=[common])
    pn.add_argument("carrier")
    pn.add_argument("--budget", type=int, default=10)
    pn.set_defaults(func=cmd_perfect_norm)

    im = sub.add_parser("imbed-derived", parents=[common])
    im.add_argument("carrier")
    im.set_defaults(func=cmd_imbed_derived)

    gr = sub.add_parser("grig", parents=[common])
    gr.add_argument("what", choices=["schreier", "growth", "props"])
    gr.add_argument("--base", type=int, default=0)
    gr.add_argument("--radius", type=int, default=4)
    gr.add_argument("--index-cap", type=int, default=64)
    gr.set_defaults(func=cmd_grig)

    wr = sub.add_parser("wreath", parents=[common])
    wr.add_argument("what", choices=["plan", "verify", "measure"])
    wr.add_argument("--m", type=int, default=2)
    wr.add_argument("--radius", type=int, default=12)
    wr.add_argument("--index-cap", type=int, default=48)
    wr.set_defaults(func=cmd_wreath)

    di = sub.add_parser("distortion", parents=[common])
    di.add_argument("what", choices=["profile", "bound", "optimize"])
    di.add_argument("carrier")
    di.set_defaults(func=cmd_distortion)

    pl = sub.add_parser("pipeline").add_subparsers(dest="sub", required=True)
    r = pl.add_parser("run", parents=[common])
    r.add_argument("--rho", default=None)
    r.add_argument("--rounds", type=int, default=None)
    r.add_argument("--config", default=None)
    r.set_defaults(func=cmd_pipeline_run)

    return ap


_GLOBAL_DEFAULTS = {"seed": 0, "cache_dir": None, "budget_elements": 200_000,
                    "tol": 1e-8, "out": None}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    for key, val in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, val)
    try:
        return args.func(args)
    except AssertionError as exc:
        print(f"internal assertion failure: {exc}", file=sys.stderr)
        return 4
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
