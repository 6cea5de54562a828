"""Sparse tuple enumeration, atomic types and the (k,s)-tuple graph.

Positions are 1-based in the public helpers (``local_neighbors``) and
0-based in the stored arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement, permutations, product
from typing import Iterable, Sequence

import numpy as np

from .graph import LabeledGraph

NodeTuple = tuple[int, ...]
# (label_1..label_k, pair code for (1,2), (1,3), .., (k-1,k)); a pair code is
# 0 for equal nodes, 1 for distinct non-adjacent nodes and 2 + edge label otherwise.
AtomicType = tuple[int, ...]


def check_ks(k: int, s: int) -> None:
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 1 <= s <= k:
        raise ValueError(f"s must lie in [k] = [1, {k}], got s={s}")


def component_count(g: LabeledGraph, t: Sequence[int]) -> int:
    """Number of connected components of the subgraph induced by the nodes of ``t``."""
    nodes = set(t)
    seen: set[int] = set()
    count = 0
    for root in nodes:
        if root in seen:
            continue
        count += 1
        seen.add(root)
        stack = [root]
        while stack:
            u = stack.pop()
            for v in g.adjacency[u]:
                if v in nodes and v not in seen:
                    seen.add(v)
                    stack.append(v)
    return count


def atomic_type(g: LabeledGraph, t: Sequence[int]) -> AtomicType:
    k = len(t)
    code = [g.node_labels[v] for v in t]
    for i in range(k):
        for j in range(i + 1, k):
            u, v = t[i], t[j]
            if u == v:
                code.append(0)
            elif g.has_edge(u, v):
                code.append(2 + g.edge_label(u, v))
            else:
                code.append(1)
    return tuple(code)


def _arc_table(g: LabeledGraph) -> tuple[np.ndarray, np.ndarray]:
    n = g.node_count
    indptr, indices = g.csr
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    keys = src * n + indices
    labels = np.fromiter(
        (g.edge_label(int(u), int(v)) for u, v in zip(src, indices)), dtype=np.int64, count=len(keys)
    )
    return keys, labels


def atomic_type_matrix(g: LabeledGraph, tuples: np.ndarray) -> np.ndarray:
    """Row-wise :func:`atomic_type` for an ``(m, k)`` array of tuples."""
    m, k = tuples.shape
    n = g.node_count
    out = np.empty((m, k + k * (k - 1) // 2), dtype=np.int64)
    labels = np.asarray(g.node_labels, dtype=np.int64)
    if m == 0:
        return out
    out[:, :k] = labels[tuples]
    arc_keys, arc_labels = _arc_table(g)
    col = k
    for i in range(k):
        for j in range(i + 1, k):
            u, v = tuples[:, i], tuples[:, j]
            code = np.ones(m, dtype=np.int64)
            if len(arc_keys):
                q = u * n + v
                pos = np.minimum(np.searchsorted(arc_keys, q), len(arc_keys) - 1)
                hit = arc_keys[pos] == q
                code[hit] = 2 + arc_labels[pos[hit]]
            code[u == v] = 0
            out[:, col] = code
            col += 1
    return out


def enumerate_ks_multisets(g: LabeledGraph, k: int, s: int) -> set[NodeTuple]:
    """All k-element node multisets (as sorted tuples) inducing at most ``s`` components.

    Seeds with every s-multiset and grows each multiset by a neighbor of, or a
    repeat of, one of its members until size k, deduplicating level by level.
    """
    check_ks(k, s)
    level = set(combinations_with_replacement(range(g.node_count), s))
    for _ in range(s, k):
        grown = set()
        for ms in level:
            for t in set(ms):
                for u in (t, *g.adjacency[t]):
                    grown.add(tuple(sorted(ms + (u,))))
        level = grown
    return level


def _tuple_array(g: LabeledGraph, k: int, s: int) -> np.ndarray:
    n = g.node_count
    if s == k:
        if n == 0:
            return np.zeros((0, k), dtype=np.int64)
        grid = np.indices((n,) * k, dtype=np.int64).reshape(k, -1).T
        return np.ascontiguousarray(grid)
    multisets = np.array(sorted(enumerate_ks_multisets(g, k, s)), dtype=np.int64).reshape(-1, k)
    perms = [multisets[:, list(p)] for p in permutations(range(k))]
    every = np.concatenate(perms) if perms else multisets
    if not len(every):
        return every
    # Rows come out sorted lexicographically; repeated members make duplicate permutations.
    every = every[np.lexsort(every.T[::-1])]
    keep = np.ones(len(every), dtype=bool)
    keep[1:] = np.any(every[1:] != every[:-1], axis=1)
    return np.ascontiguousarray(every[keep])


def enumerate_ks_tuples(g: LabeledGraph, k: int, s: int) -> list[NodeTuple]:
    """``V(G)^k_s`` in lexicographic order."""
    check_ks(k, s)
    return [tuple(int(x) for x in row) for row in _tuple_array(g, k, s)]


def count_ks_tuples(g: LabeledGraph, k: int, s: int) -> int:
    """``|V(G)^k_s|``; with ``s = k`` every k-tuple qualifies, so no enumeration is needed."""
    check_ks(k, s)
    if s == k:
        return g.node_count**k
    return len(_tuple_array(g, k, s))


def _check_key_range(n: int, k: int) -> None:
    if n > 1 and k * np.log2(n) >= 62:
        raise OverflowError(f"{n}^{k} tuple keys do not fit in 64 bits")


def _tuple_keys(tuples: np.ndarray, n: int) -> np.ndarray:
    m, k = tuples.shape
    _check_key_range(n, k)
    keys = np.zeros(m, dtype=np.int64)
    for j in range(k):
        keys = keys * n + tuples[:, j]
    return keys


def _gather_ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    return np.repeat(starts, counts) + (np.arange(total, dtype=np.int64) - offsets)


@dataclass(frozen=True, eq=False)
class TupleGraph:
    """Directed, position-labeled graph over ``V(G)^k_s``.

    ``local_indptr[j]`` / ``local_indices[j]`` hold, in CSR form, the local
    (j+1)-neighbors of every tuple that are themselves (k,s)-tuples.
    """

    graph: LabeledGraph
    k: int
    s: int
    tuples: np.ndarray
    keys: np.ndarray
    local_indptr: tuple[np.ndarray, ...]
    local_indices: tuple[np.ndarray, ...]
    atomic_matrix: np.ndarray

    def __len__(self):
        return len(self.tuples)

    @property
    def tuple_list(self) -> list[NodeTuple]:
        return [tuple(int(x) for x in row) for row in self.tuples]

    @cached_property
    def tuple_index(self) -> dict[NodeTuple, int]:
        return {t: i for i, t in enumerate(self.tuple_list)}

    def atomic_type(self, i: int) -> AtomicType:
        return tuple(int(x) for x in self.atomic_matrix[i])

    @cached_property
    def place_values(self) -> np.ndarray:
        n = self.graph.node_count
        return np.array([n ** (self.k - 1 - j) for j in range(self.k)], dtype=np.int64)

    def blanked_keys(self, j: int) -> np.ndarray:
        """Tuple keys with 0-based position ``j`` zeroed; equal iff the tuples are j-neighbors."""
        return self.keys - self.tuples[:, j] * self.place_values[j]

    def edge_count(self) -> int:
        return int(sum(len(ix) for ix in self.local_indices))


def build_tuple_graph(g: LabeledGraph, k: int, s: int) -> TupleGraph:
    check_ks(k, s)
    n = g.node_count
    _check_key_range(n, k)
    tuples = _tuple_array(g, k, s)
    m = len(tuples)
    keys = _tuple_keys(tuples, n)
    indptr_g, indices_g = g.csr
    degree = np.diff(indptr_g)
    place = [n ** (k - 1 - j) for j in range(k)]
    l_indptr, l_indices = [], []
    for j in range(k):
        indptr = np.zeros(m + 1, dtype=np.int64)
        if m == 0:
            l_indptr.append(indptr)
            l_indices.append(np.zeros(0, dtype=np.int64))
            continue
        vj = tuples[:, j]
        counts = degree[vj]
        src = np.repeat(np.arange(m, dtype=np.int64), counts)
        w = indices_g[_gather_ranges(indptr_g[vj], counts)]
        new_keys = keys[src] + (w - vj[src]) * place[j]
        pos = np.minimum(np.searchsorted(keys, new_keys), m - 1)
        found = keys[pos] == new_keys
        indptr[1:] = np.cumsum(np.bincount(src[found], minlength=m))
        l_indptr.append(indptr)
        l_indices.append(pos[found].astype(np.int64))
    return TupleGraph(
        graph=g,
        k=k,
        s=s,
        tuples=tuples,
        keys=keys,
        local_indptr=tuple(l_indptr),
        local_indices=tuple(l_indices),
        atomic_matrix=atomic_type_matrix(g, tuples),
    )


def local_neighbors(tg: TupleGraph, tuple_index: int, j: int) -> list[int]:
    """Indices of the local j-neighbors (1-based ``j``) of tuple ``tuple_index``."""
    if not 1 <= j <= tg.k:
        raise ValueError(f"position j must lie in [1, {tg.k}], got {j}")
    if not 0 <= tuple_index < len(tg):
        raise IndexError(f"tuple index {tuple_index} out of range")
    lo, hi = tg.local_indptr[j - 1][tuple_index : tuple_index + 2]
    return [int(x) for x in tg.local_indices[j - 1][lo:hi]]


def tuple_graph_edges(tg: TupleGraph) -> Iterable[tuple[int, int, int]]:
    """Yield ``(source, destination, j)`` with 1-based ``j``, sorted by source then j."""
    for i in range(len(tg)):
        for j in range(tg.k):
            lo, hi = tg.local_indptr[j][i : i + 2]
            for dst in tg.local_indices[j][lo:hi]:
                yield i, int(dst), j + 1


def dump_tuple_graph(tg: TupleGraph) -> str:
    """Edge-list text: a header, one line per tuple, then one ``src dst j`` line per edge."""
    lines = [f"# k={tg.k} s={tg.s} tuples={len(tg)} edges={tg.edge_count()}"]
    lines += ["t " + " ".join(str(int(x)) for x in row) for row in tg.tuples]
    lines += [f"{a} {b} {j}" for a, b, j in tuple_graph_edges(tg)]
    return "\n".join(lines) + "\n"


def all_tuples(n: int, k: int) -> Iterable[NodeTuple]:
    return product(range(n), repeat=k)
