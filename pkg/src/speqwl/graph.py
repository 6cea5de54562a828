"""Immutable labeled graphs and the elementary algorithms built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised when a graph violates a structural invariant."""


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Undirected simple graph with integer node and edge labels.

    Node ids are ``0..node_count-1``. ``edge_labels`` is keyed by the
    ordered pair ``(u, v)`` with ``u < v``.
    """

    node_count: int
    adjacency: tuple[tuple[int, ...], ...]
    node_labels: tuple[int, ...]
    edge_labels: Mapping[tuple[int, int], int] = field(repr=False)

    def __post_init__(self):
        n = self.node_count
        if n < 0:
            raise GraphError("node_count must be non-negative")
        if len(self.adjacency) != n or len(self.node_labels) != n:
            raise GraphError("adjacency and node_labels need one entry per node")
        n_arcs = 0
        for u, nbrs in enumerate(self.adjacency):
            prev = -1
            for v in nbrs:
                if not 0 <= v < n:
                    raise GraphError(f"neighbor {v} of node {u} out of range")
                if v == u:
                    raise GraphError(f"self-loop at node {u}")
                if v <= prev:
                    raise GraphError(f"neighbors of node {u} not strictly ascending")
                prev = v
            n_arcs += len(nbrs)
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u not in self._nbr_sets[v]:
                    raise GraphError(f"edge ({u}, {v}) is not symmetric")
        if len(self.edge_labels) != n_arcs // 2:
            raise GraphError("edge_labels must cover exactly the edges")
        for (u, v), lab in self.edge_labels.items():
            if u >= v or v not in self._nbr_sets[u]:
                raise GraphError(f"edge label for non-edge ({u}, {v})")
            if lab < 0:
                raise GraphError("edge labels must be non-negative")
        if any(lab < 0 for lab in self.node_labels):
            raise GraphError("node labels must be non-negative")

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Iterable[tuple[int, int]],
        node_labels: Sequence[int] | None = None,
        edge_labels: Mapping[tuple[int, int], int] | Sequence[int] | None = None,
    ) -> "LabeledGraph":
        """Build a graph from an undirected edge list.

        Duplicate edges (in either orientation) collapse into one. ``edge_labels``
        is either a mapping keyed by edge or a sequence aligned with ``edges``.
        """
        edges = [tuple(map(int, e)) for e in edges]
        nbrs: list[set[int]] = [set() for _ in range(node_count)]
        labels: dict[tuple[int, int], int] = {}
        for i, (u, v) in enumerate(edges):
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphError(f"edge ({u}, {v}) out of range")
            nbrs[u].add(v)
            nbrs[v].add(u)
            key = _edge_key(u, v)
            if edge_labels is None:
                lab = 0
            elif isinstance(edge_labels, Mapping):
                lab = edge_labels.get((u, v), edge_labels.get((v, u), 0))
            else:
                lab = edge_labels[i]
            if labels.setdefault(key, int(lab)) != int(lab):
                raise GraphError(f"conflicting labels for edge {key}")
        if node_labels is None:
            node_labels = [0] * node_count
        return cls(
            node_count,
            tuple(tuple(sorted(s)) for s in nbrs),
            tuple(int(x) for x in node_labels),
            labels,
        )

    @cached_property
    def _nbr_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(nbrs) for nbrs in self.adjacency)

    @property
    def edge_count(self) -> int:
        return len(self.edge_labels)

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` pairs with ``u < v``, in lexicographic order."""
        return sorted(self.edge_labels)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def edge_label(self, u: int, v: int) -> int:
        return self.edge_labels[_edge_key(u, v)]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list[int]:
        return [len(nbrs) for nbrs in self.adjacency]

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency as CSR ``(indptr, indices)`` int64 arrays."""
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adjacency])
        indices = np.fromiter(
            (v for nbrs in self.adjacency for v in nbrs), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.adjacency == other.adjacency
            and self.node_labels == other.node_labels
            and dict(self.edge_labels) == dict(other.edge_labels)
        )

    __hash__ = None

    def __repr__(self):
        return f"LabeledGraph(nodes={self.node_count}, edges={self.edge_count})"


@dataclass
class GraphCollection:
    """Ordered graphs plus optional per-graph targets."""

    graphs: list[LabeledGraph]
    graph_targets: list | None = None

    def __post_init__(self):
        if self.graph_targets is not None and len(self.graph_targets) != len(self.graphs):
            raise GraphError("graph_targets needs exactly one entry per graph")

    def __len__(self):
        return len(self.graphs)

    def __getitem__(self, i):
        return self.graphs[i]

    def __iter__(self):
        return iter(self.graphs)


def empty_graph(n: int = 0) -> LabeledGraph:
    return LabeledGraph.from_edges(n, [])


def disjoint_union(g: LabeledGraph, h: LabeledGraph) -> LabeledGraph:
    """Disjoint union with the nodes of ``h`` shifted by ``g.node_count``."""
    off = g.node_count
    adjacency = g.adjacency + tuple(tuple(v + off for v in nbrs) for nbrs in h.adjacency)
    labels = dict(g.edge_labels)
    labels.update({(u + off, v + off): lab for (u, v), lab in h.edge_labels.items()})
    return LabeledGraph(off + h.node_count, adjacency, g.node_labels + h.node_labels, labels)


def connected_components(g: LabeledGraph) -> tuple[list[int], int]:
    """Per-node component ids (contiguous from 0, in order of smallest node) and the count."""
    comp = [-1] * g.node_count
    count = 0
    for root in range(g.node_count):
        if comp[root] != -1:
            continue
        comp[root] = count
        stack = [root]
        while stack:
            u = stack.pop()
            for v in g.adjacency[u]:
                if comp[v] == -1:
                    comp[v] = count
                    stack.append(v)
        count += 1
    return comp, count


def apply_permutation(g: LabeledGraph, perm: Sequence[int]) -> LabeledGraph:
    """Relabel node ``u`` as ``perm[u]``, carrying node and edge labels along."""
    n = g.node_count
    perm = [int(p) for p in perm]
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise ValueError("perm must be a bijection on 0..node_count-1")
    node_labels = [0] * n
    for u in range(n):
        node_labels[perm[u]] = g.node_labels[u]
    edges = [(perm[u], perm[v]) for u, v in g.edge_labels]
    return LabeledGraph.from_edges(n, edges, node_labels, list(g.edge_labels.values()))


def induced_subgraph(g: LabeledGraph, nodes: Iterable[int]) -> LabeledGraph:
    """Subgraph induced by ``nodes``, renumbered in ascending node order."""
    keep = sorted(set(nodes))
    index = {v: i for i, v in enumerate(keep)}
    edges, labels = [], []
    for (u, v), lab in g.edge_labels.items():
        if u in index and v in index:
            edges.append((index[u], index[v]))
            labels.append(lab)
    return LabeledGraph.from_edges(len(keep), edges, [g.node_labels[v] for v in keep], labels)
