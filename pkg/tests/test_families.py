import random
from collections import Counter
from math import comb

import networkx as nx
import pytest

import _reference as ref
from speqwl.families import (
    UnrolledTree,
    ab_pair,
    cfi_node_count,
    cfi_pair,
    cfi_witness,
    cycle,
    cycle_pair,
    has_colored_distance_clique,
    has_distance_two_clique,
    padded_colored_pair,
    padded_label_roles,
    path,
    rooted_certificate,
    star,
    trees_isomorphic,
    unroll,
)
from speqwl.graph import LabeledGraph, connected_components
from speqwl.refinement import tuple_graph_to_digraph
from speqwl.tuples import build_tuple_graph


def test_basic_shapes():
    assert cycle(5).degrees() == [2] * 5
    assert path(4).edges() == [(0, 1), (1, 2), (2, 3)]
    assert star(3).degrees() == [3, 1, 1, 1]
    with pytest.raises(ValueError):
        cycle(2)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_cycle_pair(k):
    big, small = cycle_pair(k)
    m = k + 2
    assert big.node_count == small.node_count == 2 * m
    assert connected_components(big)[1] == 1
    assert connected_components(small)[1] == 2
    assert nx.is_isomorphic(ref.to_networkx(big), nx.cycle_graph(2 * m))
    assert nx.is_isomorphic(ref.to_networkx(small), nx.disjoint_union(nx.cycle_graph(m), nx.cycle_graph(m)))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_ab_pair(k):
    a, b = ab_pair(k)
    m = k + 2
    for g in (a, b):
        assert g.node_count == 2 * m
        assert g.edge_count == 2 * m + 1
        assert connected_components(g)[1] == 1
    assert sorted(a.degrees()) == sorted(b.degrees())
    assert not ref.isomorphic(a, b)
    ha = ref.to_networkx(a)
    assert sorted(len(c) for c in nx.cycle_basis(ha)) == [m, m]
    assert len(list(nx.bridges(ha))) == 1
    assert sorted(len(c) for c in nx.minimum_cycle_basis(ref.to_networkx(b))) == [m + 1, m + 1]


@pytest.mark.parametrize("k", [2, 3, 4])
def test_cfi_sizes(k):
    g, h = cfi_pair(k)
    assert g.node_count == h.node_count == cfi_node_count(k)
    assert cfi_node_count(k) == (k + 1) * 2 ** (k - 1) + 2 * comb(k + 1, 2)
    assert g.edge_count == h.edge_count
    assert sorted(g.degrees()) == sorted(h.degrees())


def test_cfi_k2_node_count_and_non_isomorphism():
    g, h = cfi_pair(2)
    assert g.node_count == 12
    assert not ref.isomorphic(g, h)


@pytest.mark.parametrize("k", [2, 3])
def test_cfi_distance_two_clique_witness(k):
    assert cfi_witness(k) == (True, False)


def test_distance_two_clique_search():
    c6 = cycle(6)
    assert has_distance_two_clique(c6, 3, list(range(6)))
    assert not has_distance_two_clique(c6, 4, list(range(6)))
    assert not has_distance_two_clique(c6, 2, [0, 2], groups={0: "a", 2: "a"})


@pytest.mark.parametrize("k,delta", [(2, 7), (3, 10)])
def test_padded_pair_structure(k, delta):
    x, y = padded_colored_pair(k, delta)
    g, _ = cfi_pair(k)
    assert x.node_count == y.node_count == g.node_count + g.edge_count * (delta - 1)
    assert x.edge_count == y.edge_count == g.edge_count * delta
    assert Counter(x.node_labels) == Counter(y.node_labels)
    assert set(x.node_labels) <= set(padded_label_roles(k))


@pytest.mark.parametrize("k,delta", [(2, 7), (3, 10)])
def test_padded_colored_clique_witness(k, delta):
    x, y = padded_colored_pair(k, delta)
    assert has_colored_distance_clique(x, k, k + 1)
    assert not has_colored_distance_clique(y, k, k + 1)


def test_padded_delta_must_exceed_3k():
    with pytest.raises(ValueError, match="3k"):
        padded_colored_pair(2, 6)


def test_label_roles_are_ordered():
    roles = padded_label_roles(2)
    kinds = [r[0] for _, r in sorted(roles.items())]
    assert kinds == ["red"] * 3 + ["blue"] * 3 + ["aux"] * (len(kinds) - 6)


def test_unroll_path_from_graph():
    g = LabeledGraph.from_edges(3, [(0, 1), (1, 2)], [7, 8, 9], [1, 2])
    t = unroll(g, 1, 2)
    t.validate()
    assert t.sources == [1, 0, 2, 1, 1]
    assert t.depths == [0, 1, 1, 2, 2]
    assert t.edge_labels == [None, 1, 2, 1, 2]
    assert t.node_labels == [8, 7, 9, 8, 8]
    assert t.children() == [[1, 2], [3], [4], [], []]
    assert len(unroll(g, 0, 0)) == 1


def test_unroll_tuple_graph_uses_positions_as_edge_labels():
    tg = build_tuple_graph(path(3), 2, 1)
    t = unroll(tg, tg.tuple_index[(0, 1)], 1)
    assert sorted(t.edge_labels[1:]) == [1, 2]
    assert len(t) == 1 + len(tuple_graph_to_digraph(tg).out_edges[tg.tuple_index[(0, 1)]])


def test_unroll_argument_checks():
    with pytest.raises(ValueError):
        unroll(path(2), 0, -1)
    with pytest.raises(IndexError):
        unroll(path(2), 5, 1)
    with pytest.raises(TypeError):
        unroll("graph", 0, 1)


def test_validate_rejects_bad_trees():
    with pytest.raises(ValueError):
        UnrolledTree([0, 1], [0, 2], [None, 0], [None, 0], [0, 0]).validate()
    with pytest.raises(ValueError):
        UnrolledTree([0, 1], [0, 1], [None, 1], [None, 0], [0, 0]).validate()
    with pytest.raises(ValueError):
        UnrolledTree([], [], [], [], []).validate()


def _random_tree(rng, n, labels=2):
    parents = [None] + [rng.randrange(i) for i in range(1, n)]
    depths = [0]
    for i in range(1, n):
        depths.append(depths[parents[i]] + 1)
    return UnrolledTree(
        list(range(n)),
        depths,
        parents,
        [None] + [rng.randrange(labels) for _ in range(1, n)],
        [rng.randrange(labels) for _ in range(n)],
    )


def _tree_nx(t, mark_root):
    h = nx.Graph()
    for i in range(len(t)):
        h.add_node(i, label=(t.node_labels[i], mark_root and i == 0))
    for i, p in enumerate(t.parents):
        if p is not None:
            h.add_edge(p, i, label=t.edge_labels[i])
    return h


@pytest.mark.parametrize("root_mapped", [True, False])
def test_tree_isomorphism_matches_networkx(root_mapped):
    rng = random.Random(8)
    nm = nx.algorithms.isomorphism.categorical_node_match("label", None)
    em = nx.algorithms.isomorphism.categorical_edge_match("label", None)
    agree = Counter()
    for _ in range(300):
        n = rng.randint(1, 7)
        t1 = _random_tree(rng, n)
        t2 = _random_tree(rng, n) if rng.random() < 0.5 else _shuffle(t1, rng)
        expected = nx.is_isomorphic(_tree_nx(t1, root_mapped), _tree_nx(t2, root_mapped), node_match=nm, edge_match=em)
        assert trees_isomorphic(t1, t2, root_mapped) == expected
        agree[expected] += 1
    assert agree[True] > 50 and agree[False] > 50


def _shuffle(t, rng):
    """Same tree with children visited in a random order (root stays first)."""
    kids = t.children()
    order, queue = [], [0]
    while queue:
        u = queue.pop(0)
        order.append(u)
        ks = kids[u][:]
        rng.shuffle(ks)
        queue.extend(ks)
    pos = {u: i for i, u in enumerate(order)}
    return UnrolledTree(
        [t.sources[u] for u in order],
        [t.depths[u] for u in order],
        [None if t.parents[u] is None else pos[t.parents[u]] for u in order],
        [t.edge_labels[u] for u in order],
        [t.node_labels[u] for u in order],
    )


def test_trees_of_different_size_are_not_isomorphic():
    rng = random.Random(1)
    assert not trees_isomorphic(_random_tree(rng, 3), _random_tree(rng, 4))


def test_rooted_certificate_agrees_with_pairwise_check():
    rng = random.Random(12)
    for _ in range(200):
        n = rng.randint(1, 6)
        t1 = _random_tree(rng, n)
        t2 = _shuffle(t1, rng) if rng.random() < 0.5 else _random_tree(rng, n)
        assert (rooted_certificate(t1) == rooted_certificate(t2)) == trees_isomorphic(t1, t2)
