"""Graph families that separate the refinement algorithms, plus unrolled trees
and an AHU-style rooted tree isomorphism oracle."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from math import comb

from .graph import LabeledGraph, disjoint_union
from .refinement import LabeledDigraph, tuple_graph_to_digraph
from .tuples import TupleGraph

MAX_FAMILY_NODES = 2_000_000


def cycle(n: int) -> LabeledGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    return LabeledGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> LabeledGraph:
    return LabeledGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves: int) -> LabeledGraph:
    return LabeledGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def cycle_pair(k: int) -> tuple[LabeledGraph, LabeledGraph]:
    """``C_{2(k+2)}`` and two disjoint copies of ``C_{k+2}``."""
    if k < 2:
        raise ValueError("cycle_pair needs k >= 2")
    return cycle(2 * (k + 2)), disjoint_union(cycle(k + 2), cycle(k + 2))


def ab_pair(k: int) -> tuple[LabeledGraph, LabeledGraph]:
    """Connected pair on ``2(k+2)`` nodes and ``2(k+2)+1`` edges.

    The first graph is two ``(k+2)``-cycles joined by a bridge, the second a
    ``2(k+2)``-cycle with a chord splitting it into two ``(k+3)``-cycles.
    """
    if k < 2:
        raise ValueError("ab_pair needs k >= 2")
    m = k + 2
    a_edges = [(i, (i + 1) % m) for i in range(m)]
    a_edges += [(m + i, m + (i + 1) % m) for i in range(m)]
    a_edges.append((m - 1, m))
    b_edges = [(i, (i + 1) % (2 * m)) for i in range(2 * m)]
    b_edges.append((0, m))
    return LabeledGraph.from_edges(2 * m, a_edges), LabeledGraph.from_edges(2 * m, b_edges)


@dataclass(frozen=True)
class CFIParts:
    """Node roles of a CFI graph: vertex-cloud members ``(v, S)`` and edge-cloud members ``(e, bit)``."""

    vertex_cloud: dict[int, tuple[int, frozenset]]
    edge_cloud: dict[int, tuple[tuple[int, int], int]]


def _cfi_graph(k: int, twisted: bool) -> tuple[LabeledGraph, CFIParts]:
    base_edges = list(combinations(range(k + 1), 2))
    incident = {v: [e for e in base_edges if v in e] for v in range(k + 1)}
    ids: dict = {}
    vertex_cloud = {}
    for v in range(k + 1):
        parity = 1 if (twisted and v == 0) else 0
        for mask in range(2 ** len(incident[v])):
            subset = frozenset(e for b, e in enumerate(incident[v]) if mask >> b & 1)
            if len(subset) % 2 == parity:
                vertex_cloud[len(ids)] = (v, subset)
                ids[("v", v, subset)] = len(ids)
    edge_cloud = {}
    for e in base_edges:
        for bit in (0, 1):
            edge_cloud[len(ids)] = (e, bit)
            ids[("e", e, bit)] = len(ids)
    edges = [(ids[("e", e, 0)], ids[("e", e, 1)]) for e in base_edges]
    for node, (v, subset) in vertex_cloud.items():
        for e in incident[v]:
            edges.append((node, ids[("e", e, 1 if e in subset else 0)]))
    return LabeledGraph.from_edges(len(ids), edges), CFIParts(vertex_cloud, edge_cloud)


def cfi_node_count(k: int) -> int:
    return (k + 1) * 2 ** (k - 1) + comb(k + 1, 2) * 2


def cfi_pair(k: int, with_parts: bool = False):
    """CFI-style pair over ``K_{k+1}``: even subsets everywhere vs. odd subsets at base vertex 0."""
    if k < 2:
        raise ValueError("cfi_pair needs k >= 2")
    if cfi_node_count(k) > MAX_FAMILY_NODES:
        from .dense import MemoryBudgetError

        raise MemoryBudgetError(cfi_node_count(k) * 64, MAX_FAMILY_NODES * 64)
    g, gp = _cfi_graph(k, twisted=False)
    h, hp = _cfi_graph(k, twisted=True)
    if with_parts:
        return (g, gp), (h, hp)
    return g, h


def padded_label_roles(k: int) -> dict[int, tuple]:
    """Integer node label -> structural role, shared by both padded graphs.

    Roles are ``("red", v)``, ``("blue", e)`` and ``("aux", pair)`` where
    ``pair`` is the sorted pair of endpoint roles of the subdivided edge.
    """
    base_edges = list(combinations(range(k + 1), 2))
    roles = [("red", v) for v in range(k + 1)] + [("blue", e) for e in base_edges]
    aux = set()
    for e in base_edges:
        aux.add((("blue", e), ("blue", e)))
        for v in e:
            aux.add(tuple(sorted([("red", v), ("blue", e)])))
    roles += [("aux", pair) for pair in sorted(aux)]
    return dict(enumerate(roles))


def _pad(g: LabeledGraph, parts: CFIParts, k: int, delta: int) -> LabeledGraph:
    role_id = {role: i for i, role in padded_label_roles(k).items()}
    role = {}
    for node, (v, _) in parts.vertex_cloud.items():
        role[node] = ("red", v)
    for node, (e, _) in parts.edge_cloud.items():
        role[node] = ("blue", e)
    labels = [role_id[role[v]] for v in range(g.node_count)]
    edges = []
    n = g.node_count
    for u, v in g.edges():
        aux = role_id[("aux", tuple(sorted([role[u], role[v]])))]
        chain = [u]
        for _ in range(delta - 1):
            chain.append(n)
            labels.append(aux)
            n += 1
        chain.append(v)
        edges.extend(zip(chain, chain[1:]))
    return LabeledGraph.from_edges(n, edges, labels)


def padded_colored_pair(k: int, delta: int) -> tuple[LabeledGraph, LabeledGraph]:
    """Colored CFI pair with every edge replaced by a path of ``delta`` edges.

    Cloud nodes carry their cloud's color, path nodes the unordered pair of
    endpoint colors; labels come from :func:`padded_label_roles`.
    """
    if delta <= 3 * k:
        raise ValueError(f"delta must exceed 3k = {3 * k} so that tuples touch at most two vertex clouds")
    (g, gp), (h, hp) = cfi_pair(k, with_parts=True)
    return _pad(g, gp, k, delta), _pad(h, hp, k, delta)


# -- non-isomorphism witnesses -------------------------------------------------------


def _bfs_dist(g: LabeledGraph, src: int, limit: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if dist[u] == limit:
            continue
        for v in g.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _has_clique(nodes: list[int], related, size: int) -> bool:
    def extend(chosen: list[int], start: int) -> bool:
        if len(chosen) == size:
            return True
        for i in range(start, len(nodes)):
            x = nodes[i]
            if all(related(x, y) for y in chosen) and extend(chosen + [x], i + 1):
                return True
        return False

    return extend([], 0)


def has_distance_two_clique(
    g: LabeledGraph, size: int, candidates: list[int], groups: dict[int, object] | None = None
) -> bool:
    """Whether ``size`` candidates are pairwise at distance exactly 2.

    With ``groups`` the chosen nodes must also come from pairwise different groups.
    """
    dist = {v: _bfs_dist(g, v, 2) for v in candidates}

    def related(x, y):
        return dist[x].get(y) == 2 and (groups is None or groups[x] != groups[y])

    return _has_clique(sorted(candidates), related, size)


def cfi_witness(k: int) -> tuple[bool, bool]:
    """Distance-two cliques of size ``k + 1`` with one node per vertex cloud, for both CFI graphs."""
    out = []
    for g, parts in cfi_pair(k, with_parts=True):
        groups = {v: base for v, (base, _) in parts.vertex_cloud.items()}
        out.append(has_distance_two_clique(g, k + 1, sorted(groups), groups))
    return out[0], out[1]


def has_colored_distance_clique(g: LabeledGraph, k: int, size: int, distinct_clouds: bool = True) -> bool:
    """Clique search in a padded graph: red nodes joined through exactly one blue node
    and otherwise auxiliary path nodes.

    With ``distinct_clouds`` (the default) the members must come from pairwise
    different vertex clouds; without it, nodes of one cloud already form
    cliques in both graphs once clouds have more than two members.
    """
    roles = padded_label_roles(k)
    kind = [roles[lab][0] for lab in g.node_labels]

    def path_ends(start: int) -> list[int]:
        ends = []
        for first in g.adjacency[start]:
            prev, cur = start, first
            while kind[cur] == "aux":
                prev, cur = cur, next(x for x in g.adjacency[cur] if x != prev)
            ends.append(cur)
        return ends

    reds = [v for v in range(g.node_count) if kind[v] == "red"]
    reach = {}
    for x in reds:
        reach[x] = {
            y for e in path_ends(x) if kind[e] == "blue" for y in path_ends(e) if kind[y] == "red" and y != x
        }
    label = g.node_labels

    def related(x, y):
        return y in reach[x] and (not distinct_clouds or label[x] != label[y])

    return _has_clique(reds, related, size)


# -- unrolled trees ------------------------------------------------------------------


@dataclass
class UnrolledTree:
    """Rooted tree; node 0 is the root and parents precede children.

    ``sources[i]`` is the unrolled node, ``edge_labels[i]`` the label of the
    edge from ``parents[i]`` (``None`` at the root).
    """

    sources: list[int]
    depths: list[int]
    parents: list[int | None]
    edge_labels: list
    node_labels: list

    def __len__(self):
        return len(self.sources)

    def validate(self) -> None:
        n = len(self.sources)
        if not n or not (len(self.depths) == len(self.parents) == len(self.edge_labels) == len(self.node_labels) == n):
            raise ValueError("tree arrays must be non-empty and of equal length")
        if self.parents[0] is not None or self.depths[0] != 0:
            raise ValueError("node 0 must be the unique depth-0 root")
        for i in range(1, n):
            p = self.parents[i]
            if p is None or not 0 <= p < i:
                raise ValueError(f"node {i} has no valid parent preceding it")
            if self.depths[i] != self.depths[p] + 1:
                raise ValueError(f"node {i} is not one level below its parent")

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.sources]
        for i, p in enumerate(self.parents):
            if p is not None:
                out[p].append(i)
        return out


def _as_digraph(source) -> LabeledDigraph:
    if isinstance(source, LabeledDigraph):
        return source
    if isinstance(source, TupleGraph):
        return tuple_graph_to_digraph(source)
    if isinstance(source, LabeledGraph):
        return LabeledDigraph(
            tuple(source.node_labels),
            tuple(tuple((v, source.edge_label(u, v)) for v in source.adjacency[u]) for u in range(source.node_count)),
        )
    raise TypeError(f"cannot unroll {type(source).__name__}")


def unroll(source, root: int, depth: int) -> UnrolledTree:
    """Unroll ``source`` (tuple graph, labeled graph or digraph) around ``root`` to ``depth`` levels."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    dg = _as_digraph(source)
    if not 0 <= root < len(dg):
        raise IndexError(f"root {root} out of range")
    tree = UnrolledTree([root], [0], [None], [None], [dg.node_labels[root]])
    frontier = [0]
    for d in range(1, depth + 1):
        nxt = []
        for parent in frontier:
            for dst, lab in dg.out_edges[tree.sources[parent]]:
                nxt.append(len(tree.sources))
                tree.sources.append(dst)
                tree.depths.append(d)
                tree.parents.append(parent)
                tree.edge_labels.append(lab)
                tree.node_labels.append(dg.node_labels[dst])
        frontier = nxt
    return tree


def _rooted_codes(adj: list[list[tuple[int, object]]], labels: list, root: int, table: dict) -> int:
    order, parent = [root], {root: None}
    for u in order:
        for v, _ in adj[u]:
            if v not in parent:
                parent[v] = u
                order.append(v)
    code: dict[int, int] = {}
    for u in reversed(order):
        kids = sorted((repr(lab), code[v]) for v, lab in adj[u] if parent.get(v) == u and v != parent[u])
        code[u] = table.setdefault((repr(labels[u]), tuple(kids)), len(table))
    return code[root]


def _undirected(t: UnrolledTree) -> list[list[tuple[int, object]]]:
    adj: list[list[tuple[int, object]]] = [[] for _ in t.sources]
    for i, p in enumerate(t.parents):
        if p is not None:
            adj[p].append((i, t.edge_labels[i]))
            adj[i].append((p, t.edge_labels[i]))
    return adj


def _centers(adj: list[list]) -> list[int]:
    n = len(adj)
    degree = [len(a) for a in adj]
    leaves = [v for v in range(n) if degree[v] <= 1]
    remaining = n
    while remaining > 2:
        remaining -= len(leaves)
        nxt = []
        for u in leaves:
            for v, _ in adj[u]:
                degree[v] -= 1
                if degree[v] == 1:
                    nxt.append(v)
        leaves = nxt
    return leaves


def rooted_certificate(t: UnrolledTree) -> tuple:
    """Canonical nested-tuple form; equal iff the rooted labeled trees are isomorphic."""
    t.validate()
    kids = t.children()
    cert: list = [None] * len(t)
    for u in reversed(range(len(t))):
        cert[u] = (repr(t.node_labels[u]), tuple(sorted((repr(t.edge_labels[v]), cert[v]) for v in kids[u])))
    return cert[0]


def trees_isomorphic(t1: UnrolledTree, t2: UnrolledTree, root_mapped: bool = True) -> bool:
    """Labeled tree isomorphism via canonical AHU codes.

    With ``root_mapped`` the isomorphism must send root to root; otherwise the
    trees are compared as unrooted labeled trees through their centers.
    """
    t1.validate()
    t2.validate()
    if len(t1) != len(t2):
        return False
    table: dict = {}
    a1, a2 = _undirected(t1), _undirected(t2)
    if root_mapped:
        return _rooted_codes(a1, t1.node_labels, 0, table) == _rooted_codes(a2, t2.node_labels, 0, table)
    codes1 = {_rooted_codes(a1, t1.node_labels, c, table) for c in _centers(a1)}
    codes2 = {_rooted_codes(a2, t2.node_labels, c, table) for c in _centers(a2)}
    return bool(codes1 & codes2)
