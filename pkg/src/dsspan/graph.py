"""Labeled graph datasets and TU-format ingestion.

Graphs are undirected, vertex- and edge-labeled, with labels interned to
dense small integers at load time. The raw label values are kept on the
dataset so reports can map them back.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence


class DatasetFormatError(ValueError):
    """A TU file could not be parsed or is internally inconsistent."""


class Edge(NamedTuple):
    u: int
    v: int
    label: int


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    graph_id: int
    vertex_labels: tuple[int, ...]
    edges: tuple[Edge, ...]

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> list[dict[int, int]]:
        """Per-vertex ``{neighbor: edge_label}`` maps."""
        adj: list[dict[int, int]] = [{} for _ in self.vertex_labels]
        for u, v, lab in self.edges:
            adj[u][v] = lab
            adj[v][u] = lab
        return adj

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (self.graph_id == other.graph_id
                and self.vertex_labels == other.vertex_labels
                and self.edges == other.edges)

    def __hash__(self):
        return hash((self.graph_id, self.vertex_labels, self.edges))


@dataclass(frozen=True)
class GraphDataset:
    graphs: tuple[LabeledGraph, ...]
    labels: tuple[int, ...]
    class_count: int
    name: str = "dataset"
    # raw values behind the interned ids, index = interned id
    class_values: tuple = ()
    vertex_label_values: tuple = ()
    edge_label_values: tuple = ()
    # original ids when this dataset is a view over a larger one
    source_ids: tuple[int, ...] | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def n(self) -> int:
        return len(self.graphs)

    def subset(self, indices: Sequence[int], name: str | None = None) -> "GraphDataset":
        """Re-indexed view over ``indices``; ``source_ids`` records the origin."""
        indices = list(indices)
        base = self.source_ids
        graphs = tuple(
            LabeledGraph(k, self.graphs[i].vertex_labels, self.graphs[i].edges)
            for k, i in enumerate(indices))
        return GraphDataset(
            graphs=graphs,
            labels=tuple(self.labels[i] for i in indices),
            class_count=self.class_count,
            name=name or self.name,
            class_values=self.class_values,
            vertex_label_values=self.vertex_label_values,
            edge_label_values=self.edge_label_values,
            source_ids=tuple(base[i] if base else i for i in indices),
        )


def make_graph(graph_id: int, vertex_labels: Sequence[int],
               edges: Sequence[tuple[int, int, int]]) -> LabeledGraph:
    return LabeledGraph(graph_id, tuple(vertex_labels),
                        tuple(Edge(int(u), int(v), int(l)) for u, v, l in edges))


def make_dataset(graphs: Sequence[tuple[Sequence[int], Sequence[tuple[int, int, int]]]],
                 labels: Sequence[int], name: str = "dataset",
                 class_count: int | None = None) -> GraphDataset:
    """Build a dataset from ``(vertex_labels, edges)`` pairs; handy for fixtures."""
    built = tuple(make_graph(i, vl, es) for i, (vl, es) in enumerate(graphs))
    if class_count is None:
        class_count = max(labels) + 1 if labels else 1
    return GraphDataset(built, tuple(labels), class_count, name,
                        class_values=tuple(range(class_count)))


def validate(dataset: GraphDataset) -> list[str]:
    """Return a list of invariant violations; empty means well formed."""
    problems: list[str] = []
    if len(dataset.graphs) == 0:
        problems.append("dataset has no graphs")
    if len(dataset.labels) != len(dataset.graphs):
        problems.append(
            f"label count {len(dataset.labels)} != graph count {len(dataset.graphs)}")
    if dataset.class_count < 1:
        problems.append(f"class_count {dataset.class_count} < 1")
    for i, y in enumerate(dataset.labels):
        if not 0 <= y < dataset.class_count:
            problems.append(f"label {y} of graph {i} outside [0, {dataset.class_count})")
    for idx, g in enumerate(dataset.graphs):
        if g.graph_id != idx:
            problems.append(f"graph at position {idx} has graph_id {g.graph_id}")
        n = g.num_vertices
        seen = set()
        for u, v, _ in g.edges:
            if not (0 <= u < n and 0 <= v < n):
                problems.append(f"edge ({u},{v}) references missing vertex in graph {g.graph_id}")
                continue
            if u == v:
                problems.append(f"self-loop in graph {g.graph_id}")
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                problems.append(f"duplicate edge {key} in graph {g.graph_id}")
            seen.add(key)
    return problems


def _read_ints(path: str, width: int | None = None) -> list[list[int]]:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = [p for p in line.replace(",", " ").split()]
            try:
                vals = [int(p) for p in parts]
            except ValueError:
                raise DatasetFormatError(
                    f"{os.path.basename(path)}:{lineno}: non-integer token in {line!r}") from None
            if width is not None and len(vals) < width:
                raise DatasetFormatError(
                    f"{os.path.basename(path)}:{lineno}: expected {width} values, got {len(vals)}")
            rows.append(vals[:width] if width else vals)
    return rows


def _read_labels(path: str) -> list[int]:
    # label files may carry extra columns; only the first is the discrete label
    return [r[0] for r in _read_ints(path, 1)]


def _intern(values: Sequence[int]) -> tuple[list[int], tuple[int, ...]]:
    table = tuple(sorted(set(values)))
    index = {v: i for i, v in enumerate(table)}
    return [index[v] for v in values], table


def load_tu_dataset(directory: str, name: str, degree_labels: bool = False) -> GraphDataset:
    """Load ``<name>_*.txt`` files from ``directory``.

    Missing node/edge label files yield a uniform label 0, or the vertex
    degree for nodes when ``degree_labels`` is set.
    """
    def path(suffix):
        return os.path.join(directory, f"{name}_{suffix}.txt")

    for suffix in ("A", "graph_indicator", "graph_labels"):
        if not os.path.exists(path(suffix)):
            raise FileNotFoundError(f"missing mandatory file {path(suffix)}")

    indicator = _read_labels(path("graph_indicator"))
    raw_graph_labels = _read_labels(path("graph_labels"))
    adjacency = _read_ints(path("A"), 2)
    n_nodes = len(indicator)
    n_graphs = len(raw_graph_labels)

    if os.path.exists(path("node_labels")):
        raw_node_labels = _read_labels(path("node_labels"))
        if len(raw_node_labels) != n_nodes:
            raise DatasetFormatError(
                f"{name}_node_labels.txt has {len(raw_node_labels)} lines, expected {n_nodes}")
    else:
        raw_node_labels = None
    if os.path.exists(path("edge_labels")):
        raw_edge_labels = _read_labels(path("edge_labels"))
        if len(raw_edge_labels) != len(adjacency):
            raise DatasetFormatError(
                f"{name}_edge_labels.txt has {len(raw_edge_labels)} lines, expected {len(adjacency)}")
    else:
        raw_edge_labels = [0] * len(adjacency)

    # global 1-based node id -> (graph index, local vertex id)
    local = [0] * n_nodes
    counts = [0] * n_graphs
    for k, gid in enumerate(indicator):
        if not 1 <= gid <= n_graphs:
            raise DatasetFormatError(
                f"{name}_graph_indicator.txt:{k + 1}: graph id {gid} outside 1..{n_graphs}")
        local[k] = counts[gid - 1]
        counts[gid - 1] += 1

    edge_lists: list[dict[tuple[int, int], int]] = [{} for _ in range(n_graphs)]
    for lineno, ((a, b), lab) in enumerate(zip(adjacency, raw_edge_labels), 1):
        if not (1 <= a <= n_nodes and 1 <= b <= n_nodes):
            raise DatasetFormatError(f"{name}_A.txt:{lineno}: node id outside 1..{n_nodes}")
        ga, gb = indicator[a - 1], indicator[b - 1]
        if ga != gb:
            raise DatasetFormatError(
                f"{name}_A.txt:{lineno}: edge ({a}, {b}) crosses graphs {ga} and {gb}")
        u, v = local[a - 1], local[b - 1]
        if u == v:
            raise DatasetFormatError(f"{name}_A.txt:{lineno}: self-loop on node {a}")
        edge_lists[ga - 1].setdefault((min(u, v), max(u, v)), lab)

    edge_ids, edge_table = _intern([lab for el in edge_lists for lab in el.values()])
    if raw_node_labels is None:
        if degree_labels:
            degree = [0] * n_nodes
            offsets = [0] * n_graphs
            for g in range(1, n_graphs):
                offsets[g] = offsets[g - 1] + counts[g - 1]
            for g, el in enumerate(edge_lists):
                for u, v in el:
                    degree[offsets[g] + u] += 1
                    degree[offsets[g] + v] += 1
            raw_node_labels = [degree[offsets[gid - 1] + local[k]]
                               for k, gid in enumerate(indicator)]
        else:
            raw_node_labels = [0] * n_nodes
    node_ids, node_table = _intern(raw_node_labels)
    class_ids, class_table = _intern(raw_graph_labels)

    vlabels: list[list[int]] = [[0] * c for c in counts]
    for k, gid in enumerate(indicator):
        vlabels[gid - 1][local[k]] = node_ids[k]

    graphs = []
    it = iter(edge_ids)
    for g in range(n_graphs):
        edges = tuple(Edge(u, v, next(it)) for (u, v) in edge_lists[g])
        graphs.append(LabeledGraph(g, tuple(vlabels[g]), edges))

    return GraphDataset(
        graphs=tuple(graphs),
        labels=tuple(class_ids),
        class_count=len(class_table),
        name=name,
        class_values=class_table,
        vertex_label_values=node_table,
        edge_label_values=edge_table,
    )


def write_tu_dataset(dataset: GraphDataset, directory: str, name: str | None = None) -> None:
    """Write ``dataset`` in TU format, each edge listed in both directions."""
    name = name or dataset.name
    os.makedirs(directory, exist_ok=True)

    def raw(table, i):
        return table[i] if i < len(table) else i

    a_lines, e_lines, ind_lines, n_lines = [], [], [], []
    offset = 0
    for g in dataset.graphs:
        for lab in g.vertex_labels:
            ind_lines.append(str(g.graph_id + 1))
            n_lines.append(str(raw(dataset.vertex_label_values, lab)))
        for u, v, lab in g.edges:
            elab = str(raw(dataset.edge_label_values, lab))
            a_lines.append(f"{offset + u + 1}, {offset + v + 1}")
            a_lines.append(f"{offset + v + 1}, {offset + u + 1}")
            e_lines += [elab, elab]
        offset += g.num_vertices
    files = {
        "A": a_lines,
        "edge_labels": e_lines,
        "graph_indicator": ind_lines,
        "node_labels": n_lines,
        "graph_labels": [str(raw(dataset.class_values, y)) for y in dataset.labels],
    }
    for suffix, lines in files.items():
        with open(os.path.join(directory, f"{name}_{suffix}.txt"), "w") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))
