"""Slow, exhaustive reference implementations for tests.

Nothing here imports the production mining code: codes are produced by
simulating every depth-first traversal directly, and isomorphism classes
come from trying every vertex ordering. Size bounds fail loudly.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from typing import Sequence

from .graph import GraphDataset, LabeledGraph

MAX_ORACLE_VERTICES = 8


class OracleBoundError(ValueError):
    """Input exceeds the size an exhaustive oracle is allowed to handle."""


def _check(n: int, bound: int = MAX_ORACLE_VERTICES) -> None:
    if n > bound:
        raise OracleBoundError(f"{n} vertices exceeds oracle bound {bound}")


def canonical_form(vertex_labels: Sequence[int], edges: Sequence[tuple[int, int, int]],
                   bound: int = MAX_ORACLE_VERTICES) -> tuple:
    """Isomorphism-invariant key: lexicographic minimum over all relabelings."""
    n = len(vertex_labels)
    _check(n, bound)
    best = None
    for perm in itertools.permutations(range(n)):
        # perm[old] = new position
        labels = [0] * n
        for old, new in enumerate(perm):
            labels[new] = vertex_labels[old]
        es = tuple(sorted((min(perm[u], perm[v]), max(perm[u], perm[v]), l) for u, v, l in edges))
        key = (n, tuple(labels), es)
        if best is None or key < best:
            best = key
    return best


def graph_form(graph: LabeledGraph) -> tuple:
    return canonical_form(graph.vertex_labels, [tuple(e) for e in graph.edges])


def code_form(code) -> tuple:
    """Canonical form of the graph spelled by a DFS code (tuple of 5-tuples)."""
    labels: dict[int, int] = {}
    edges = []
    for u, v, lu, lv, le in code:
        labels[u] = lu
        labels[v] = lv
        edges.append((u, v, le))
    return canonical_form([labels[i] for i in range(len(labels))], edges)


def _neighbors(n, edges):
    adj = [dict() for _ in range(n)]
    for u, v, l in edges:
        adj[u][v] = l
        adj[v][u] = l
    return adj


def _gspan_less(a, b) -> bool:
    """Strict gSpan order between two edges at the same code position."""
    (i1, j1, *la), (i2, j2, *lb) = a, b
    if (i1, j1) == (i2, j2):
        return (la[0], la[2], la[1]) < (lb[0], lb[2], lb[1])
    f1, f2 = i1 < j1, i2 < j2
    if f1 and f2:
        return j1 < j2 or (j1 == j2 and i1 > i2)
    if not f1 and not f2:
        return i1 < i2 or (i1 == i2 and j1 < j2)
    if not f1 and f2:
        return i1 < j2
    return j1 <= i2


def code_less(a, b) -> bool:
    for x, y in zip(a, b):
        if x == y:
            continue
        return _gspan_less(x, y)
    return len(a) < len(b)


def all_dfs_codes(vertex_labels: Sequence[int], edges: Sequence[tuple[int, int, int]]) -> list:
    """Code of every depth-first traversal of a connected graph.

    A vertex ordering is a valid discovery order iff, after popping stack
    vertices with no undiscovered neighbours, the next vertex is adjacent to
    the stack top; that top is its tree parent.
    """
    n = len(vertex_labels)
    _check(n)
    adj = _neighbors(n, edges)
    codes = []
    for order in itertools.permutations(range(n)):
        pos = {v: k for k, v in enumerate(order)}
        stack = [order[0]]
        seen = {order[0]}
        code = []
        ok = True
        for k in range(1, n):
            v = order[k]
            while stack and all(w in seen for w in adj[stack[-1]]):
                stack.pop()
            if not stack or v not in adj[stack[-1]]:
                ok = False
                break
            p = stack[-1]
            code.append((pos[p], k, vertex_labels[p], vertex_labels[v], adj[p][v]))
            seen.add(v)
            back = sorted(pos[w] for w in adj[v] if w in seen and w != p)
            for t in back:
                w = order[t]
                code.append((k, t, vertex_labels[v], vertex_labels[w], adj[v][w]))
            stack.append(v)
        if ok:
            codes.append(tuple(code))
    return codes


def brute_min_code(vertex_labels: Sequence[int], edges: Sequence[tuple[int, int, int]]) -> tuple:
    """Minimum DFS code as plain ``(u, v, lu, lv, le)`` tuples."""
    best = None
    for code in all_dfs_codes(vertex_labels, edges):
        if best is None or code_less(code, best):
            best = code
    return best


def brute_contains(graph: LabeledGraph, pattern: LabeledGraph) -> bool:
    """Exhaustive search over injective vertex assignments."""
    _check(graph.num_vertices, 12)
    k = pattern.num_vertices
    gadj = _neighbors(graph.num_vertices, graph.edges)
    for assign in itertools.permutations(range(graph.num_vertices), k):
        if any(graph.vertex_labels[assign[i]] != pattern.vertex_labels[i] for i in range(k)):
            continue
        if all(gadj[assign[u]].get(assign[v]) == l for u, v, l in pattern.edges):
            return True
    return False


def connected_edge_subsets(graph: LabeledGraph, max_edges: int) -> set[frozenset]:
    """Every connected edge subset of size 1..max_edges, as frozensets of edge indices."""
    incident: dict[int, list[int]] = {}
    for idx, (u, v, _) in enumerate(graph.edges):
        incident.setdefault(u, []).append(idx)
        incident.setdefault(v, []).append(idx)
    layer = {frozenset([i]) for i in range(graph.num_edges)}
    found = set(layer)
    for _ in range(max_edges - 1):
        nxt = set()
        for sub in layer:
            verts = {x for i in sub for x in graph.edges[i][:2]}
            for x in verts:
                for j in incident[x]:
                    if j not in sub:
                        nxt.add(sub | {j})
        found |= nxt
        layer = nxt
    return found


def subgraph_form(graph: LabeledGraph, edge_ids: frozenset) -> tuple:
    verts = sorted({x for i in edge_ids for x in graph.edges[i][:2]})
    remap = {v: k for k, v in enumerate(verts)}
    labels = [graph.vertex_labels[v] for v in verts]
    es = [(remap[graph.edges[i][0]], remap[graph.edges[i][1]], graph.edges[i][2])
          for i in edge_ids]
    return canonical_form(labels, es)


def brute_frequent(dataset: GraphDataset, min_support: int, max_edges: int) -> set[tuple]:
    """Canonical forms of connected subgraphs found in >= min_support graphs."""
    counts: Counter = Counter()
    for g in dataset.graphs:
        _check(g.num_vertices)
        forms = {subgraph_form(g, sub) for sub in connected_edge_subsets(g, max_edges)}
        counts.update(forms)
    return {f for f, c in counts.items() if c >= min_support}


def brute_ig(cover, labels: Sequence[int]) -> float:
    """Information gain in bits by direct set arithmetic."""
    n = len(labels)
    inside = [labels[i] for i in range(n) if i in cover]
    outside = [labels[i] for i in range(n) if i not in cover]

    def h(ys):
        if not ys:
            return 0.0
        total = len(ys)
        return -sum((c / total) * math.log2(c / total) for c in Counter(ys).values())

    return h(list(labels)) - (len(inside) / n * h(inside) + len(outside) / n * h(outside))
