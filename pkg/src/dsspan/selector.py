"""Information-gain scoring and coverage-constrained greedy selection."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dfscode import PatternRecord, code_key, code_to_text
from .miner import MiningResult


@dataclass(frozen=True)
class SelectorConfig:
    budget_k: int | None = None
    tau: float = 0.95

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if self.budget_k is not None and self.budget_k < 1:
            raise ValueError(f"budget_k must be >= 1, got {self.budget_k}")


@dataclass(frozen=True)
class ScoredCandidate:
    pattern: PatternRecord
    ig: float
    we: float
    filler: bool = False


@dataclass
class SelectionResult:
    selected: list[ScoredCandidate]
    covered: frozenset[int]
    coverage_fraction: float
    constraint_met: bool

    def codes(self) -> list:
        return [s.pattern.code for s in self.selected]


def entropy(counts: Iterable[int]) -> float:
    """Shannon entropy in bits of a class-count vector."""
    counts = [c for c in counts]
    total = sum(counts)
    if total <= 0:
        raise ValueError("entropy of an all-zero count vector")
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def _counts(ys, n_classes):
    out = [0] * n_classes
    for y in ys:
        out[y] += 1
    return out


def information_gain(cover, labels: Sequence[int], n: int | None = None) -> float:
    n = len(labels) if n is None else n
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} graphs")
    cover = set(cover)
    k = len(cover)
    if k == 0 or k == n:
        return 0.0
    n_classes = max(labels) + 1
    total = _counts(labels, n_classes)
    inside = _counts((labels[i] for i in cover), n_classes)
    outside = [t - c for t, c in zip(total, inside)]
    cond = k / n * entropy(inside) + (n - k) / n * entropy(outside)
    return max(0.0, entropy(total) - cond)


def score_all(result: MiningResult, labels: Sequence[int]) -> list[ScoredCandidate]:
    """IG of every candidate, fillers included, in candidate order.

    ``labels`` must be the labels of the graphs the result was mined from,
    i.e. the training fold.
    """
    if len(labels) != result.n_graphs:
        raise ValueError(f"{len(labels)} labels for {result.n_graphs} mined graphs")
    n = result.n_graphs
    h = entropy(Counter(labels).values())
    cache: dict[frozenset, float] = {}
    scored = []
    for rec, flag in zip(result.candidates, result.filler_flags):
        ig = cache.get(rec.graphs)
        if ig is None:
            ig = cache[rec.graphs] = information_gain(rec.graphs, labels, n)
        scored.append(ScoredCandidate(rec, ig, h - ig, flag))
    return scored


def rank(scored: Sequence[ScoredCandidate]) -> list[ScoredCandidate]:
    return sorted(scored, key=lambda s: (-s.ig, len(s.pattern.code), code_key(s.pattern.code)))


def select(scored: Sequence[ScoredCandidate], config: SelectorConfig, n: int) -> SelectionResult:
    """Greedy scan by descending IG.

    A candidate is taken only if it covers at least one graph not yet
    covered and the budget allows; the scan stops once tau * n graphs
    are covered.
    """
    chosen: list[ScoredCandidate] = []
    covered: set[int] = set()
    target = config.tau * n
    budget = config.budget_k
    met = False
    for s in rank(scored):
        if budget is not None and len(chosen) >= budget:
            break
        if s.pattern.graphs - covered:
            chosen.append(s)
            covered |= s.pattern.graphs
            if len(covered) >= target:
                met = True
                break
    return SelectionResult(chosen, frozenset(covered), len(covered) / n if n else 0.0, met)


def selection_to_dict(sel: SelectionResult, n: int) -> dict:
    return {
        "n_graphs": n,
        "selected": [
            {
                "code": code_to_text(s.pattern.code),
                "ig": s.ig,
                "we": s.we,
                "cover_size": s.pattern.support,
                "graphs": sorted(s.pattern.graphs),
                "filler": s.filler,
            }
            for s in sel.selected
        ],
        "covered": sorted(sel.covered),
        "coverage_fraction": sel.coverage_fraction,
        "constraint_met": sel.constraint_met,
    }


def save_selection(sel: SelectionResult, path: str, n: int) -> None:
    with open(path, "w") as fh:
        json.dump(selection_to_dict(sel, n), fh, indent=1)
