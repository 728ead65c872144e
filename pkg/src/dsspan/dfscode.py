"""DFS codes, gSpan ordering, minimality test and rightmost-path growth.

A code is a tuple of :class:`DfsEdge`. Occurrences are stored as plain
tuples mapping DFS index -> vertex id of the host graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

from .graph import GraphDataset, LabeledGraph

DEFAULT_AUTOMORPHISM_CAP = 4096


class DfsEdge(NamedTuple):
    u: int
    v: int
    u_label: int
    v_label: int
    e_label: int

    @property
    def is_forward(self) -> bool:
        return self.u < self.v


DfsCode = tuple  # tuple[DfsEdge, ...]
VertexMap = tuple  # tuple[int, ...]


def edge_key(e: DfsEdge) -> tuple:
    """Sort key realizing the gSpan edge order.

    Backward edges sort by (u, v); forward edges by (v, -u), so a forward
    edge from a deeper rightmost-path vertex comes first. A backward edge
    from vertex i precedes every forward edge discovering a vertex > i.
    """
    u, v, lu, lv, le = e
    if u < v:
        return (v, 0, -u, lu, le, lv)
    return (u, 1, v, lu, le, lv)


def code_key(code: DfsCode) -> tuple:
    return tuple(edge_key(e) for e in code)


def compare_codes(a: DfsCode, b: DfsCode) -> int:
    """-1, 0 or 1; prefix-equal shorter code is smaller."""
    ka, kb = code_key(a), code_key(b)
    return (ka > kb) - (ka < kb)


def code_to_text(code: DfsCode) -> str:
    return ";".join(f"({e.u},{e.v},{e.u_label},{e.e_label},{e.v_label})" for e in code)


def parse_code(text: str) -> DfsCode:
    edges = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        u, v, lu, le, lv = (int(x) for x in part.strip("()").split(","))
        edges.append(DfsEdge(u, v, lu, lv, le))
    return tuple(edges)


def code_vertex_labels(code: DfsCode) -> list[int]:
    labels: dict[int, int] = {}
    for u, v, lu, lv, _ in code:
        labels.setdefault(u, lu)
        labels.setdefault(v, lv)
    return [labels[i] for i in range(len(labels))]


def code_to_graph(code: DfsCode, graph_id: int = 0) -> LabeledGraph:
    from .graph import make_graph
    return make_graph(graph_id, code_vertex_labels(code),
                      [(e.u, e.v, e.e_label) for e in code])


def rightmost_path(code: DfsCode) -> list[int]:
    """DFS indices on the rightmost path, rightmost vertex first, root last."""
    path: list[int] = []
    prev = None
    for e in reversed(code):
        if e.u < e.v and (prev is None or e.v == prev):
            if not path:
                path.append(e.v)
            path.append(e.u)
            prev = e.u
    return path


def is_valid_code(code: DfsCode) -> bool:
    if not code or code[0].u != 0 or code[0].v != 1:
        return False
    n = 2
    seen = {(0, 1)}
    labels = {0: code[0].u_label, 1: code[0].v_label}
    for k in range(1, len(code)):
        e = code[k]
        path = rightmost_path(code[:k])
        if e.u < e.v:
            if e.v != n or e.u not in path:
                return False
            n += 1
        else:
            if e.u != path[0] or e.v not in path[1:]:
                return False
        pair = (min(e.u, e.v), max(e.u, e.v))
        if pair in seen or labels.get(e.u, e.u_label) != e.u_label:
            return False
        if e.v in labels and labels[e.v] != e.v_label:
            return False
        labels.setdefault(e.v, e.v_label)
        seen.add(pair)
    return True


@dataclass
class PatternRecord:
    """A pattern with its occurrences.

    ``occurrences`` maps graph id -> vertex maps. ``partial`` holds graph ids
    whose occurrence list was truncated at the automorphism cap; membership
    in ``graphs`` stays exact for those. Records loaded from disk carry
    ``graphs`` only.
    """
    code: DfsCode
    occurrences: dict[int, list[VertexMap]] = field(default_factory=dict)
    graphs: frozenset[int] = frozenset()
    partial: frozenset[int] = frozenset()

    @property
    def support(self) -> int:
        return len(self.graphs)

    @property
    def num_edges(self) -> int:
        return len(self.code)


class _ExtensionContext:
    """Code-level data shared by all occurrences of one pattern."""

    __slots__ = ("path", "rm", "nverts", "present")

    def __init__(self, code: DfsCode):
        self.path = rightmost_path(code)
        self.rm = self.path[0]
        self.nverts = self.rm + 1
        self.present = {(min(e.u, e.v), max(e.u, e.v)) for e in code}


def _extend_occurrence(graph: LabeledGraph, ctx: _ExtensionContext,
                       m: VertexMap) -> Iterator[tuple[DfsEdge, VertexMap]]:
    adj = graph.adjacency
    vl = graph.vertex_labels
    rm = ctx.rm
    rm_v = m[rm]
    rm_adj = adj[rm_v]
    for anc in ctx.path[1:]:
        if (anc, rm) in ctx.present:
            continue
        lab = rm_adj.get(m[anc])
        if lab is not None:
            yield DfsEdge(rm, anc, vl[rm_v], vl[m[anc]], lab), m
    used = set(m)
    n = ctx.nverts
    for u in ctx.path:
        gu = m[u]
        lu = vl[gu]
        for w, lab in adj[gu].items():
            if w not in used:
                yield DfsEdge(u, n, lu, vl[w], lab), m + (w,)


def graph_extensions(graph: LabeledGraph, code: DfsCode,
                     maps: Iterable[VertexMap]) -> dict[DfsEdge, list[VertexMap]]:
    """All one-edge rightmost extensions of ``maps`` inside ``graph``."""
    ctx = _ExtensionContext(code)
    out: dict[DfsEdge, list[VertexMap]] = {}
    for m in maps:
        for ext, m2 in _extend_occurrence(graph, ctx, m):
            out.setdefault(ext, []).append(m2)
    return out


def _single_edge_maps(graph: LabeledGraph) -> dict[DfsEdge, list[VertexMap]]:
    out: dict[DfsEdge, list[VertexMap]] = {}
    vl = graph.vertex_labels
    for u, v, lab in graph.edges:
        for a, b in ((u, v), (v, u)):
            if vl[a] <= vl[b]:
                out.setdefault(DfsEdge(0, 1, vl[a], vl[b], lab), []).append((a, b))
    return out


def is_canonical(code: DfsCode) -> bool:
    """True iff ``code`` is the minimum DFS code of the graph it describes.

    Rebuilds the minimum code edge by edge over the pattern graph itself
    and bails out at the first position where a smaller edge exists.
    """
    g = code_to_graph(code)
    first = _single_edge_maps(g)
    best = min(first, key=edge_key)
    if edge_key(best) < edge_key(code[0]):
        return False
    maps = first[best]
    for k in range(1, len(code)):
        exts = graph_extensions(g, code[:k], maps)
        best = min(exts, key=edge_key)
        if edge_key(best) < edge_key(code[k]):
            return False
        maps = exts[code[k]]
    return True


def iter_embeddings(graph: LabeledGraph, code: DfsCode) -> Iterator[VertexMap]:
    """Injective, label-preserving embeddings of ``code`` into ``graph``."""
    if not code:
        return
    adj = graph.adjacency
    vl = graph.vertex_labels
    nverts = max(max(e.u, e.v) for e in code) + 1
    m = [-1] * nverts
    used: set[int] = set()
    first = code[0]

    def rec(k):
        if k == len(code):
            yield tuple(m)
            return
        e = code[k]
        if e.u < e.v:
            for w, lab in adj[m[e.u]].items():
                if lab == e.e_label and vl[w] == e.v_label and w not in used:
                    m[e.v] = w
                    used.add(w)
                    yield from rec(k + 1)
                    used.discard(w)
                    m[e.v] = -1
        elif adj[m[e.u]].get(m[e.v]) == e.e_label:
            yield from rec(k + 1)

    for a in range(graph.num_vertices):
        if vl[a] != first.u_label:
            continue
        m[0] = a
        used.add(a)
        yield from rec(0)
        used.discard(a)
        m[0] = -1


def contains(graph: LabeledGraph, code: DfsCode) -> bool:
    for _ in iter_embeddings(graph, code):
        return True
    return False


def _build_record(code: DfsCode, occ: dict[int, list[VertexMap]], partial: set[int],
                  extra_graphs: Iterable[int], cap: int) -> PatternRecord:
    partial = set(partial)
    for gid, maps in occ.items():
        if len(maps) > cap:
            del maps[cap:]
            partial.add(gid)
    graphs = frozenset(occ) | frozenset(extra_graphs)
    return PatternRecord(code, occ, graphs, frozenset(partial & graphs))


def enumerate_single_edges(dataset: GraphDataset, scope: Iterable[int],
                           automorphism_cap: int = DEFAULT_AUTOMORPHISM_CAP) -> list[PatternRecord]:
    """One record per canonical 1-edge code found in ``scope``, sorted.

    Occurrences are collected over the whole dataset, not just ``scope``.
    """
    scope = set(scope)
    per_graph = [_single_edge_maps(g) for g in dataset.graphs]
    wanted = set()
    for gid in scope:
        wanted.update(per_graph[gid])
    records = []
    for code_edge in sorted(wanted, key=edge_key):
        occ = {gid: list(maps[code_edge]) for gid, maps in enumerate(per_graph)
               if code_edge in maps}
        records.append(_build_record((code_edge,), occ, set(), (), automorphism_cap))
    return records


def rightmost_extensions(pattern: PatternRecord, eligible: Iterable[int],
                         dataset: GraphDataset,
                         automorphism_cap: int = DEFAULT_AUTOMORPHISM_CAP) -> dict[DfsEdge, PatternRecord]:
    """Children of ``pattern`` generated by occurrences in ``eligible`` graphs.

    Each child's occurrences and support cover the whole dataset. Graphs whose
    occurrence list was truncated are resolved with :func:`contains`.
    """
    eligible = set(eligible)
    code = pattern.code
    ctx = _ExtensionContext(code)
    graphs = dataset.graphs
    occ_by_ext: dict[DfsEdge, dict[int, list[VertexMap]]] = {}

    gen = [g for g in pattern.occurrences if g in eligible]
    for gid in gen:
        g = graphs[gid]
        for m in pattern.occurrences[gid]:
            for ext, m2 in _extend_occurrence(g, ctx, m):
                occ_by_ext.setdefault(ext, {}).setdefault(gid, []).append(m2)
    if not occ_by_ext:
        return {}
    for gid, maps in pattern.occurrences.items():
        if gid in eligible:
            continue
        g = graphs[gid]
        for m in maps:
            for ext, m2 in _extend_occurrence(g, ctx, m):
                slot = occ_by_ext.get(ext)
                if slot is not None:
                    slot.setdefault(gid, []).append(m2)

    children = {}
    for ext in sorted(occ_by_ext, key=edge_key):
        child_code = code + (ext,)
        occ = occ_by_ext[ext]
        extra = [gid for gid in pattern.partial
                 if gid not in occ and contains(graphs[gid], child_code)]
        children[ext] = _build_record(child_code, occ, pattern.partial, extra, automorphism_cap)
    return children


def iter_graph_codes(graph: LabeledGraph, max_edges: int | None = None) -> Iterator[DfsCode]:
    """Canonical codes of all connected subgraphs of ``graph``.

    Yields by ascending edge count, ties in code order. Each level is built
    lazily from the previous one, so a consumer that stops early only pays
    for the levels it reached.
    """
    level = {(e,): maps for e, maps in _single_edge_maps(graph).items()}
    size = 1
    while level and (max_edges is None or size <= max_edges):
        ordered = sorted(level, key=code_key)
        yield from ordered
        nxt: dict[DfsCode, list[VertexMap]] = {}
        for code in ordered:
            for ext, maps in graph_extensions(graph, code, level[code]).items():
                child = code + (ext,)
                if child not in nxt and is_canonical(child):
                    nxt[child] = maps
        level = nxt
        size += 1
