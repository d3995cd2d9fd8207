"""End-to-end orchestration: certificates for the SL3 desk family, the
greedy (t_i, s(i)) selection with its (K_i, L_i, M) bookkeeping, and a
deterministic report bundle.

The greedy follows the distortion-bound bookkeeping literally over the finite
desk family.  Whenever the numbers do not close a round (desk-scale
certificate diameters are logarithmic in n while the L*M thresholds are
not), the ledger is emitted as partial with the limiting constraint named;
that outcome is evidence about scale, not an error in the mechanism.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .distortion import distortion_profile, FiniteMetric, min_distortion_embed
from .expanders import (SpectralCertificate, build_sl3, certificate,
                        family_constant)
from .graphio import GraphCache, cache_key
from .rho import RhoExpression, parse_rho
from .spectral import spectral_gap


@dataclass
class KLEntry:
    """Bi-Lipschitz constants feeding round i, with provenance."""

    K: float
    L: float
    L_prime: Optional[int]
    provenance: str          # "measured" | "envelope" | "unresolved"

    def usable(self) -> bool:
        return self.provenance != "unresolved"


@dataclass
class LedgerRow:
    round: int
    track: str               # alternating "S" / "S'"
    t: float
    s_index: int
    s_name: str
    K: float
    L: float
    L_prime: Optional[int]
    kl_provenance: str
    M: float
    chain: dict


@dataclass
class SelectionLedger:
    rho_source: str
    family_M: float
    rows: list[LedgerRow]
    status: str              # "complete" | "partial"
    limiting_constraint: Optional[str]
    requested_rounds: int

    def to_jsonable(self) -> dict:
        return {
            "rho": self.rho_source,
            "family_M": self.family_M,
            "requested_rounds": self.requested_rounds,
            "status": self.status,
            "limiting_constraint": self.limiting_constraint,
            "rows": [
                {
                    "round": r.round, "track": r.track, "t": r.t,
                    "s_index": r.s_index, "s_name": r.s_name,
                    "K": r.K, "L": r.L, "L_prime": r.L_prime,
                    "kl_provenance": r.kl_provenance, "M": r.M,
                    "chain": r.chain,
                }
                for r in self.rows
            ],
        }


def _cert_M_at(cert: SpectralCertificate, t: int) -> Optional[float]:
    for row in cert.table:
        if row["t"] == t:
            return row["M_t"]
    return None


def select_indices(certs: Sequence[SpectralCertificate], rho: RhoExpression,
                   rounds: int, kl_stream: Sequence[KLEntry]) -> SelectionLedger:
    """Greedy distortion-bound bookkeeping over a finite certificate family.

    Round i picks the least achieved distance t_i with
    rho(t_i) > L_{i+1} * M, then the least unused certificate with diameter
    >= t_i / K_i and M_s(ceil(t_i / K_i)) <= M; K_i, L_i are fixed before
    s(i) per the dependency-order invariant.  Rows alternate between the
    two tracks S and S'.
    """
    if rounds > 0 and len(kl_stream) < rounds + 1:
        raise ValueError("need K/L entries for rounds 1..rounds+1")
    M = family_constant(list(certs))
    grid = sorted({row["t"] for c in certs for row in c.table if row["t"] >= 1})
    rows: list[LedgerRow] = []
    status, constraint = "complete", None
    prev_t = 0.0
    prev_s = -1

    for i in range(1, rounds + 1):
        kl_next = kl_stream[i]      # L_{i+1}: entry index i feeds round i
        kl_here = kl_stream[i - 1]  # (K_i, L_i)
        if not kl_here.usable() or not kl_next.usable():
            best = max((rho(float(t)) for t in grid), default=0.0)
            extra = ""
            if best <= M:
                # the deeper blocker: L >= 1 always, so even a perfect
                # envelope cannot clear rho(t) > L*M on this family
                extra = (f"; moreover even L = 1 gives L*M = {M:.6g} above "
                         f"the max achieved rho(t) = {best:.6g}")
            status, constraint = "partial", (
                f"round {i}: K/L constants unresolved "
                f"(provenance {kl_here.provenance}/{kl_next.provenance}){extra}")
            break
        threshold = kl_next.L * M
        t_i = None
        for t in grid:
            if t <= prev_t:
                continue
            if rho(float(t)) > threshold:
                t_i = float(t)
                break
        if t_i is None:
            best = max((rho(float(t)) for t in grid), default=0.0)
            status, constraint = "partial", (
                f"round {i}: no achieved distance t has rho(t) > L_(i+1)*M = "
                f"{threshold:.6g} (max over grid is {best:.6g})")
            break
        need = int(math.ceil(t_i / kl_here.K))
        s_i = None
        for idx in range(prev_s + 1, len(certs)):
            c = certs[idx]
            if c.diameter < need:
                continue
            m_at = _cert_M_at(c, need)
            if m_at is not None and m_at <= M:
                s_i = idx
                break
        if s_i is None:
            status, constraint = "partial", (
                f"round {i}: no unused certificate has diameter >= {need} "
                f"with M_s({need}) <= M = {M:.6g}")
            break
        chain = {
            "rho_t_i": rho(t_i),
            "L_ip1_M": threshold,
            "t_condition": rho(t_i) > threshold,
            "L_i_M": kl_here.L * M,
            "rho_t_prev": rho(prev_t) if prev_t > 0 else None,
            "chain_condition": (kl_here.L * M < rho(prev_t)) if prev_t > 0 else None,
            "witness_t_over_K": need,
            "M_s_at_witness": _cert_M_at(certs[s_i], need),
        }
        rows.append(LedgerRow(
            round=i, track="S" if i % 2 == 1 else "S'",
            t=t_i, s_index=s_i, s_name=certs[s_i].name,
            K=kl_here.K, L=kl_here.L, L_prime=kl_here.L_prime,
            kl_provenance=kl_here.provenance, M=M, chain=chain))
        prev_t, prev_s = t_i, s_i

    return SelectionLedger(rho_source=rho.source, family_M=M, rows=rows,
                           status=status, limiting_constraint=constraint,
                           requested_rounds=rounds)


def verify_ledger_chain(ledger: SelectionLedger, rho: RhoExpression) -> bool:
    """Re-check every recorded inequality numerically."""
    prev_t = None
    for row in ledger.rows:
        if not rho(row.t) > row.chain["L_ip1_M"]:
            return False
        if prev_t is not None and not row.L * row.M < rho(prev_t):
            return False
        if row.chain["M_s_at_witness"] is not None and \
                row.chain["M_s_at_witness"] > row.M + 1e-12:
            return False
        prev_t = row.t
    return True


# ---------------------------------------------------------------------------
# Pipeline runner


DEFAULT_CONFIG = {
    "pipeline.rho": "log(1+t)",
    "pipeline.rounds": "2",
    "pipeline.family": "sl3:2:1,sl3:2:2,sl3:3:1",
    "pipeline.seed": "0",
    "pipeline.kl_source": "wreath-plan",
    "spectral.tol": "1e-6",
    "wreath.m_schedule": "1",
    "wreath.index_cap": "48",
    "wreath.rect_budget": "12",
    "profiles.embed_dim": "12",
}


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line {line!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def render_config(cfg: dict[str, str]) -> str:
    return "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg)) + "\n"


class PipelineRun:
    def __init__(self, config: Optional[dict[str, str]] = None,
                 cache_dir: Optional[str] = None):
        self.config = dict(DEFAULT_CONFIG)
        if config:
            self.config.update(config)
        self.cache = GraphCache(cache_dir) if cache_dir else None
        self.certs: list[SpectralCertificate] = []
        self.graphs = []
        self.handles = []
        self.kl_stream: list[KLEntry] = []
        self.ledger: Optional[SelectionLedger] = None
        self.profiles = []
        self.warnings: list[str] = []

    # -- building blocks --------------------------------------------------

    def build_family(self):
        seed = int(self.config["pipeline.seed"])
        tol = float(self.config["spectral.tol"])
        for spec in self.config["pipeline.family"].split(","):
            kind, p, level = spec.strip().split(":")
            if kind != "sl3":
                raise ValueError(f"unknown family member {spec!r}")
            p, level = int(p), int(level)
            handle, graph = self._load_or_build(p, level)
            sd = spectral_gap(graph, tol=tol, seed=seed)
            cert = certificate(graph, sd, name=f"SL3(F{p})[t^{level}]",
                               p=p, level=level)
            self.handles.append(handle)
            self.graphs.append(graph)
            self.certs.append(cert)

    def _load_or_build(self, p: int, level: int):
        from .expanders import sl3_generators
        handle_gens = sl3_generators(p, level)
        key = cache_key(f"sl3:p={p}:level={level}",
                        [g.encode() for _, g in handle_gens], 0)
        if self.cache is not None:
            cached = self.cache.load(key)
            if cached is not None:
                from .algebra import matrix_handle
                handle = matrix_handle(f"SL3(F{p}[t]/t^{level})", p, level, handle_gens)
                cached.handle = handle
                return handle, cached
        handle, graph = build_sl3(p, level)
        if self.cache is not None:
            self.cache.store(key, graph)
        return handle, graph

    def build_kl_stream(self, rounds: int):
        """K/L constants per round from the wreath placement geometry.

        Envelope form (K, L) = (1, 2L'+1) with L' the block rectifier
        length bound; blocks whose rectifiers exceed the search budget are
        marked unresolved (never guessed).
        """
        source = self.config["pipeline.kl_source"]
        if source == "unit":
            # degenerate stream for mechanism tests
            self.kl_stream = [KLEntry(1.0, 1.0, 0, "envelope")] * (rounds + 1)
            return
        if source != "wreath-plan":
            raise ValueError(f"unknown kl_source {source!r}")
        from .wreath import PlanError, block_rectifiers, configure_plan, place_all

        m0 = int(self.config["wreath.m_schedule"])
        cap = int(self.config["wreath.index_cap"])
        budget = int(self.config["wreath.rect_budget"])
        factors = [(c.name, h, g) for c, h, g in
                   zip(self.certs, self.handles, self.graphs)]
        plan = configure_plan(factors)
        schedule = [m0] * plan.total_indices
        place_all(plan, schedule, index_cap=cap)
        self.plan = plan
        self.kl_stream = []
        for block in range(min(rounds + 1, len(plan.factors))):
            try:
                _, L_prime = block_rectifiers(plan, block, rect_budget=budget)
                self.kl_stream.append(
                    KLEntry(1.0, 2.0 * L_prime + 1.0, L_prime, "envelope"))
            except PlanError as exc:
                lb = self._rectifier_length_floor(plan, block)
                self.warnings.append(
                    f"block {block}: {exc}; Schreier distances force "
                    f"L' >= {lb}, envelope L >= {2 * lb + 1}")
                self.kl_stream.append(KLEntry(1.0, math.inf, None, "unresolved"))
        while len(self.kl_stream) < rounds + 1:
            self.kl_stream.append(KLEntry(1.0, math.inf, None, "unresolved"))

    @staticmethod
    def _rectifier_length_floor(plan, block: int) -> int:
        """Exact Schreier distances from the block slots to the block base:
        a hard lower bound on any rectifier length bound L'."""
        from .grigorchuk import schreier_geodesic_word, UndecidedError

        idxs = plan.block_indices(block)
        base = plan.n_values[idxs[-1] - 1]
        floor = 0
        for k in idxs[:-1]:
            try:
                word = schreier_geodesic_word(plan.n_values[k - 1], base, 4096)
                floor = max(floor, len(word))
            except UndecidedError:
                return 4096
        return floor

    def build_profiles(self):
        """Distortion profiles of optimizer embeddings, compared to rho."""
        from .distortion import embed_graph_spectral
        from . import kernels

        dim = int(self.config["profiles.embed_dim"])
        seed = int(self.config["pipeline.seed"])
        rho = parse_rho(self.config["pipeline.rho"])
        for cert, graph in zip(self.certs, self.graphs):
            if graph.n <= 512:
                metric = FiniteMetric.from_graph(graph)
                res = min_distortion_embed(metric, dim=min(dim, graph.n - 1),
                                           tol=1e-3, max_iter=300, seed=seed,
                                           method="mds")
                prof = distortion_profile(res.embedding, rescale=True)
                rows = list(zip(prof.thresholds.tolist(), prof.rho.tolist()))
            else:
                pts = embed_graph_spectral(graph, dim=dim, seed=seed)
                scan = kernels.pair_scan_graph(graph.indptr, graph.nbr,
                                               np.ascontiguousarray(pts),
                                               graph.diameter())
                min_img2 = scan[0]
                rows = []
                best = math.inf
                for t in range(len(min_img2) - 1, 0, -1):
                    if min_img2[t] < best:
                        best = min_img2[t]
                    rows.append((float(t), math.sqrt(best)))
                rows.reverse()
            comparison = {
                "certificate": cert.name,
                "verdict_vs_rho": _tail_verdict(rows, rho),
            }
            self.profiles.append({"name": cert.name, "rows": rows,
                                  "comparison": comparison})

    def run(self, rounds: Optional[int] = None) -> SelectionLedger:
        if rounds is None:
            rounds = int(self.config["pipeline.rounds"])
        rho = parse_rho(self.config["pipeline.rho"])
        if rho.warnings:
            self.warnings.extend(rho.warnings)
        if not self.certs:
            self.build_family()
        self.build_kl_stream(rounds)
        self.build_profiles()
        self.ledger = select_indices(self.certs, rho, rounds, self.kl_stream)
        return self.ledger


def _tail_verdict(rows: list[tuple[float, float]], rho: RhoExpression) -> str:
    above = [t for t, v in rows if v > rho(t)]
    below = [t for t, v in rows if v <= rho(t)]
    if not below:
        return "better"
    if not above:
        return "worse"
    return "worse" if max(above) < max(below) else "neither"


# ---------------------------------------------------------------------------
# Report bundle


def emit_report(run: PipelineRun, out_dir: str | Path) -> dict:
    """Write the deterministic bundle: config snapshot, certificates,
    ledger, profiles, and a manifest with the SHA-256 of every artifact."""
    out = Path(out_dir)
    (out / "certificates").mkdir(parents=True, exist_ok=True)
    (out / "profiles").mkdir(parents=True, exist_ok=True)

    artifacts: dict[str, bytes] = {}
    artifacts["config.snapshot"] = render_config(run.config).encode()

    for cert in run.certs:
        name = cert.name.replace("(", "_").replace(")", "_").replace("/", "_")
        artifacts[f"certificates/{name}.json"] = cert.to_json().encode()

    ledger_doc = {
        "ledger": run.ledger.to_jsonable() if run.ledger else None,
        "kl_stream": [
            {"K": e.K, "L": None if math.isinf(e.L) else e.L,
             "L_prime": e.L_prime, "provenance": e.provenance}
            for e in run.kl_stream
        ],
        "warnings": run.warnings,
        "profile_comparisons": [p["comparison"] for p in run.profiles],
    }
    artifacts["ledger.json"] = json.dumps(
        ledger_doc, indent=2, sort_keys=True).encode()

    for prof in run.profiles:
        name = prof["name"].replace("(", "_").replace(")", "_").replace("/", "_")
        lines = ["t,rho_phi"]
        lines += [f"{t},{v}" for t, v in prof["rows"]]
        artifacts[f"profiles/{name}.csv"] = ("\n".join(lines) + "\n").encode()

    manifest = {}
    for rel, data in sorted(artifacts.items()):
        (out / rel).parent.mkdir(parents=True, exist_ok=True)
        (out / rel).write_bytes(data)
        manifest[rel] = hashlib.sha256(data).hexdigest()
    manifest_bytes = json.dumps(manifest, indent=2, sort_keys=True).encode()
    (out / "manifest.json").write_bytes(manifest_bytes)
    return manifest


def exit_code(run: PipelineRun) -> int:
    if run.ledger is None:
        return 3
    if run.ledger.status == "partial":
        return 2
    return 0
