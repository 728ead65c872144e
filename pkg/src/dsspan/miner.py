"""Single-pass pattern mining with coverage-capped eligibility.

Every accepted pattern bumps the coverage counter of each graph containing
it. Once a graph's counter reaches ``gamma * min_cov`` it leaves the
eligible set and stops contributing extensions for the rest of the run.
With ``gamma=None`` the cap is off and the search is plain gSpan.
"""

from __future__ import annotations

import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .dfscode import (
    DEFAULT_AUTOMORPHISM_CAP,
    PatternRecord,
    code_key,
    code_to_text,
    contains,
    enumerate_single_edges,
    is_canonical,
    iter_embeddings,
    iter_graph_codes,
    parse_code,
    rightmost_extensions,
)
from .graph import GraphDataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinerConfig:
    delta: float = 0.1
    min_cov: int = 3
    gamma: float | None = 8.0
    max_edges: int | None = None
    automorphism_cap: int = DEFAULT_AUTOMORPHISM_CAP

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if self.min_cov < 1:
            raise ValueError(f"min_cov must be >= 1, got {self.min_cov}")
        if self.gamma is not None and self.gamma < 1:
            raise ValueError(f"gamma must be >= 1 or None, got {self.gamma}")
        if self.max_edges is not None and self.max_edges < 1:
            raise ValueError(f"max_edges must be >= 1, got {self.max_edges}")
        if self.automorphism_cap < 1:
            raise ValueError("automorphism_cap must be >= 1")

    def min_support(self, n: int) -> int:
        # exact rational ceiling; float products like 0.1 * 30 overshoot, and
        # deltas written as k/N must round-trip to exactly k
        frac = Fraction(self.delta).limit_denominator(10**6)
        return max(1, math.ceil(frac * n))

    @property
    def cap(self) -> float | None:
        return None if self.gamma is None else self.gamma * self.min_cov


@dataclass
class CoverageState:
    cov: list[int]
    eligible: set[int]


@dataclass
class MiningStats:
    extensions_generated: int = 0
    canonical_tests: int = 0
    patterns_accepted: int = 0
    fillers_added: int = 0
    wall_seconds: float = 0.0


@dataclass
class MiningResult:
    candidates: list[PatternRecord]
    final_coverage: list[int]
    filler_flags: list[bool]
    stats: MiningStats
    config: MinerConfig
    n_graphs: int
    uncoverable: list[int] = field(default_factory=list)
    # eligibility set after each acceptance, only kept when tracing
    eligibility_trace: list[int] | None = None

    def codes(self) -> list:
        return [c.code for c in self.candidates]


def _check_dataset(dataset: GraphDataset) -> None:
    if len(dataset.graphs) == 0:
        raise ValueError("cannot mine an empty dataset")


def mine(dataset: GraphDataset, config: MinerConfig, trace: bool = False) -> MiningResult:
    """Depth-first canonical code search with the coverage cap.

    Children are visited in ascending code order, so the (order-dependent)
    eligibility evolution is reproducible.
    """
    _check_dataset(dataset)
    t0 = time.perf_counter()
    n = dataset.n
    minsup = config.min_support(n)
    cap = config.cap
    state = CoverageState([0] * n, set(range(n)))
    stats = MiningStats()
    candidates: list[PatternRecord] = []
    eligibility_trace = [] if trace else None
    max_edges = config.max_edges
    acap = config.automorphism_cap

    def accept(rec: PatternRecord) -> None:
        candidates.append(rec)
        stats.patterns_accepted += 1
        for i in rec.graphs:
            state.cov[i] += 1
            if cap is not None and state.cov[i] >= cap:
                state.eligible.discard(i)
        if eligibility_trace is not None:
            eligibility_trace.append(len(state.eligible))

    def expand(children) -> None:
        for child in children:
            if child.support < minsup:
                continue
            stats.canonical_tests += 1
            if not is_canonical(child.code):
                continue
            accept(child)
            grow(child)

    def grow(rec: PatternRecord) -> None:
        if max_edges is not None and rec.num_edges >= max_edges:
            return
        if not any(g in state.eligible for g in rec.occurrences):
            return
        children = rightmost_extensions(rec, state.eligible, dataset, acap)
        stats.extensions_generated += len(children)
        expand(children.values())

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000))
    try:
        seeds = enumerate_single_edges(dataset, state.eligible, acap)
        stats.extensions_generated += len(seeds)
        expand(seeds)
    finally:
        sys.setrecursionlimit(limit)

    stats.wall_seconds = time.perf_counter() - t0
    log.debug("mined %d candidates from %d graphs (minsup=%d, cap=%s)",
              len(candidates), n, minsup, cap)
    return MiningResult(
        candidates=candidates,
        final_coverage=list(state.cov),
        filler_flags=[False] * len(candidates),
        stats=stats,
        config=config,
        n_graphs=n,
        eligibility_trace=eligibility_trace,
    )


def mine_baseline(dataset: GraphDataset, config: MinerConfig) -> MiningResult:
    """Plain gSpan: the same search with the cap switched off."""
    base = MinerConfig(delta=config.delta, min_cov=config.min_cov, gamma=None,
                       max_edges=config.max_edges, automorphism_cap=config.automorphism_cap)
    return mine(dataset, base)


def complete_coverage(dataset: GraphDataset, result: MiningResult,
                      config: MinerConfig | None = None) -> MiningResult:
    """Top up graphs left below ``min_cov`` with their smallest patterns.

    Fillers bypass the support threshold. A graph whose distinct connected
    subgraphs run out first (always the case for edgeless graphs) is listed
    in ``uncoverable``.
    """
    config = config or result.config
    t0 = time.perf_counter()
    candidates = list(result.candidates)
    flags = list(result.filler_flags)
    cov = list(result.final_coverage)
    known = {c.code for c in candidates}
    uncoverable = []
    added = 0
    for i, g in enumerate(dataset.graphs):
        if cov[i] >= config.min_cov:
            continue
        for code in iter_graph_codes(g):
            if code in known:
                continue
            occ = {}
            for gid, host in enumerate(dataset.graphs):
                maps = []
                for m in iter_embeddings(host, code):
                    maps.append(m)
                    if len(maps) >= config.automorphism_cap:
                        break
                if maps:
                    occ[gid] = maps
            graphs = frozenset(occ)
            partial = frozenset(gid for gid, maps in occ.items()
                                if len(maps) >= config.automorphism_cap)
            rec = PatternRecord(code, occ, graphs, partial)
            candidates.append(rec)
            flags.append(True)
            known.add(code)
            added += 1
            for j in graphs:
                cov[j] += 1
            if cov[i] >= config.min_cov:
                break
        if cov[i] < config.min_cov:
            uncoverable.append(i)
    stats = MiningStats(**asdict(result.stats))
    stats.fillers_added += added
    stats.wall_seconds += time.perf_counter() - t0
    return MiningResult(candidates, cov, flags, stats, result.config, result.n_graphs,
                        uncoverable, result.eligibility_trace)


def recount_support(dataset: GraphDataset, code) -> frozenset[int]:
    """Independent support recount by subgraph search over every graph."""
    return frozenset(g.graph_id for g in dataset.graphs if contains(g, code))


def result_to_dict(result: MiningResult, dataset_name: str = "") -> dict:
    return {
        "dataset": dataset_name,
        "n_graphs": result.n_graphs,
        "config": asdict(result.config),
        "min_support": result.config.min_support(result.n_graphs),
        "candidates": [
            {
                "code": code_to_text(c.code),
                "support": c.support,
                "graphs": sorted(c.graphs),
                "filler": flag,
            }
            for c, flag in zip(result.candidates, result.filler_flags)
        ],
        "coverage": list(result.final_coverage),
        "uncoverable": list(result.uncoverable),
        "stats": asdict(result.stats),
    }


def result_from_dict(doc: dict) -> MiningResult:
    cfg = MinerConfig(**doc["config"])
    cands = [PatternRecord(parse_code(c["code"]), {}, frozenset(c["graphs"]))
             for c in doc["candidates"]]
    return MiningResult(
        candidates=cands,
        final_coverage=list(doc["coverage"]),
        filler_flags=[bool(c["filler"]) for c in doc["candidates"]],
        stats=MiningStats(**doc["stats"]),
        config=cfg,
        n_graphs=doc["n_graphs"],
        uncoverable=list(doc.get("uncoverable", [])),
    )


def save_result(result: MiningResult, path: str, dataset_name: str = "") -> None:
    with open(path, "w") as fh:
        json.dump(result_to_dict(result, dataset_name), fh, indent=1)


def load_result(path: str) -> MiningResult:
    with open(path) as fh:
        return result_from_dict(json.load(fh))


def sorted_codes(result: MiningResult) -> list:
    return sorted(result.codes(), key=code_key)
