"""Slow, dictionary-based reference implementations used as test oracles.

Nothing here shares code with the package beyond the graph container: tuple
sets come from filtering all of V^k, neighborhoods are rebuilt per tuple and
colors are canonical ranks of nested signatures.
"""

from __future__ import annotations

import random
from itertools import product

import networkx as nx

from speqwl.graph import LabeledGraph


def components(g: LabeledGraph, t) -> int:
    sub = nx.Graph()
    sub.add_nodes_from(set(t))
    sub.add_edges_from((u, v) for u in set(t) for v in set(t) if u < v and v in g.adjacency[u])
    return nx.number_connected_components(sub)


def ks_tuples(g: LabeledGraph, k: int, s: int) -> list[tuple]:
    return [t for t in product(range(g.node_count), repeat=k) if components(g, t) <= s]


def atomic(g: LabeledGraph, t) -> tuple:
    pairs = []
    for i in range(len(t)):
        for j in range(i + 1, len(t)):
            if t[i] == t[j]:
                pairs.append("eq")
            elif t[j] in g.adjacency[t[i]]:
                pairs.append(("adj", g.edge_label(t[i], t[j])))
            else:
                pairs.append("non")
    return (tuple(g.node_labels[v] for v in t), tuple(pairs))


def _replace(t, j, w):
    return t[:j] + (w,) + t[j + 1 :]


def _rank(signatures: list[dict]) -> list[dict]:
    """Canonical relabeling shared across graphs: rank of the signature in sorted order."""
    ranks = {sig: i for i, sig in enumerate(sorted({sig for d in signatures for sig in d.values()}, key=repr))}
    return [{t: ranks[sig] for t, sig in d.items()} for d in signatures]


def refine(graphs, k, s, rounds, variant="local", plus_rounds=None):
    """Per-round colorings (dicts tuple -> int) of ``graphs`` refined jointly.

    ``variant``: "local" ((k,s)-LWL / delta-k-LWL with s=k), "plus" (adds
    global j-neighbor counts in the rounds listed in ``plus_rounds``, default
    all), "kwl" (oblivious k-WL), "fwl" (folklore k-WL) or "1wl".
    """
    if variant in ("kwl", "fwl"):
        s = k
    if variant == "1wl":
        k = s = 1
    doms = [ks_tuples(g, k, s) for g in graphs]
    sets = [set(d) for d in doms]
    cols = _rank([{t: atomic(g, t) for t in d} for g, d in zip(graphs, doms)])
    if variant == "1wl":
        cols = _rank([{t: g.node_labels[t[0]] for t in d} for g, d in zip(graphs, doms)])
    history = [cols]
    for r in range(1, rounds + 1):
        sigs = []
        for g, d, dset, c in zip(graphs, doms, sets, cols):
            n = g.node_count
            out = {}
            for t in d:
                if variant == "1wl":
                    out[t] = (c[t], tuple(sorted(c[(w,)] for w in g.adjacency[t[0]])))
                elif variant == "kwl":
                    out[t] = (c[t], tuple(tuple(sorted(c[_replace(t, j, w)] for w in range(n))) for j in range(k)))
                elif variant == "fwl":
                    out[t] = (
                        c[t],
                        tuple(sorted(tuple(c[_replace(t, j, w)] for j in range(k)) for w in range(n))),
                    )
                else:
                    use_plus = variant == "plus" and (plus_rounds is None or r in plus_rounds)
                    per_j = []
                    for j in range(k):
                        vals = []
                        for w in g.adjacency[t[j]]:
                            u = _replace(t, j, w)
                            if u not in dset:
                                continue
                            if use_plus:
                                same = sum(
                                    1
                                    for x in range(n)
                                    if _replace(t, j, x) in dset and c[_replace(t, j, x)] == c[u]
                                )
                                vals.append((c[u], same))
                            else:
                                vals.append((c[u],))
                        per_j.append(tuple(sorted(vals)))
                    out[t] = (c[t], tuple(per_j))
            sigs.append(out)
        cols = _rank(sigs)
        history.append(cols)
    return history


def partition(coloring: dict) -> frozenset:
    classes: dict = {}
    for t, col in coloring.items():
        classes.setdefault(col, set()).add(t)
    return frozenset(frozenset(c) for c in classes.values())


def partition_of(tuples, colors) -> frozenset:
    return partition(dict(zip(tuples, colors)))


def random_graph(rng: random.Random, n: int, p: float, node_labels: int = 1, edge_labels: int = 1) -> LabeledGraph:
    edges = {}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges[(u, v)] = rng.randrange(edge_labels)
    labels = [rng.randrange(node_labels) for _ in range(n)]
    return LabeledGraph.from_edges(n, list(edges), labels, edges)


def from_networkx(h: nx.Graph) -> LabeledGraph:
    mapping = {v: i for i, v in enumerate(sorted(h.nodes))}
    return LabeledGraph.from_edges(len(mapping), [(mapping[u], mapping[v]) for u, v in h.edges])


def to_networkx(g: LabeledGraph) -> nx.Graph:
    h = nx.Graph()
    for v in range(g.node_count):
        h.add_node(v, label=g.node_labels[v])
    for u, v in g.edges():
        h.add_edge(u, v, label=g.edge_label(u, v))
    return h


def isomorphic(g: LabeledGraph, h: LabeledGraph) -> bool:
    match = nx.algorithms.isomorphism.categorical_node_match("label", None)
    ematch = nx.algorithms.isomorphism.categorical_edge_match("label", None)
    return nx.is_isomorphic(to_networkx(g), to_networkx(h), node_match=match, edge_match=ematch)


def connected_graphs(max_nodes: int) -> list[LabeledGraph]:
    """All connected graphs with 1..max_nodes nodes up to isomorphism (max_nodes <= 7)."""
    return [
        from_networkx(h)
        for h in nx.graph_atlas_g()
        if 0 < h.number_of_nodes() <= max_nodes and nx.is_connected(h)
    ]
