import random
from itertools import product

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _reference as ref
from speqwl.families import cycle, cycle_pair, path
from speqwl.graph import LabeledGraph
from speqwl.tuples import (
    atomic_type,
    atomic_type_matrix,
    build_tuple_graph,
    check_ks,
    component_count,
    count_ks_tuples,
    dump_tuple_graph,
    enumerate_ks_multisets,
    enumerate_ks_tuples,
    local_neighbors,
    tuple_graph_edges,
)


@st.composite
def small_graphs(draw, max_nodes=6):
    n = draw(st.integers(1, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = [e for e in pairs if draw(st.booleans())]
    node_labels = draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    edge_labels = draw(st.lists(st.integers(0, 1), min_size=len(edges), max_size=len(edges)))
    return LabeledGraph.from_edges(n, edges, node_labels, edge_labels)


ks_pairs = [(k, s) for k in (1, 2, 3) for s in range(1, k + 1)]


@settings(max_examples=40, deadline=None)
@given(small_graphs(), st.sampled_from(ks_pairs))
def test_enumeration_matches_filtering_all_tuples(g, ks):
    k, s = ks
    assert enumerate_ks_tuples(g, k, s) == ref.ks_tuples(g, k, s)


@settings(max_examples=40, deadline=None)
@given(small_graphs(), st.sampled_from(ks_pairs))
def test_multisets_are_sorted_tuples_of_enumeration(g, ks):
    k, s = ks
    expected = {tuple(sorted(t)) for t in ref.ks_tuples(g, k, s)}
    assert enumerate_ks_multisets(g, k, s) == expected


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.integers(1, 4), st.data())
def test_component_count_matches_networkx(g, k, data):
    t = data.draw(st.lists(st.integers(0, g.node_count - 1), min_size=k, max_size=k))
    assert component_count(g, t) == ref.components(g, t)


@settings(max_examples=30, deadline=None)
@given(small_graphs(), st.integers(1, 3))
def test_atomic_types_are_injective_on_reference_types(g, k):
    tuples = list(product(range(g.node_count), repeat=k))
    mat = atomic_type_matrix(g, np.array(tuples, dtype=np.int64).reshape(-1, k))
    for t, row in zip(tuples, mat):
        assert tuple(row) == atomic_type(g, t)
    ours = {tuple(r) for r in mat}
    theirs = {ref.atomic(g, t) for t in tuples}
    pairs = {(tuple(r), ref.atomic(g, t)) for t, r in zip(tuples, mat)}
    assert len(ours) == len(theirs) == len(pairs)


def test_atomic_type_layout():
    g = LabeledGraph.from_edges(3, [(0, 1)], [4, 5, 6], [3])
    # labels, then codes for pairs (1,2), (1,3), (2,3)
    assert atomic_type(g, (0, 1, 0)) == (4, 5, 4, 5, 0, 5)
    assert atomic_type(g, (2, 0, 2)) == (6, 4, 6, 1, 0, 1)


def test_check_ks_messages():
    check_ks(3, 3)
    with pytest.raises(ValueError, match=r"s must lie in \[k\]"):
        check_ks(2, 3)
    with pytest.raises(ValueError, match=r"s must lie in \[k\]"):
        check_ks(2, 0)
    with pytest.raises(ValueError):
        check_ks(0, 1)


@pytest.mark.parametrize("n", [5, 9, 16])
def test_cycle_counts(n):
    g = cycle(n)
    # k=2, s=1: diagonal plus both orientations of each edge
    assert len(build_tuple_graph(g, 2, 1)) == n + 2 * n
    # k=3, s=1: n + 3*2n (two distinct adjacent) + 6n (paths of length 2)
    assert len(build_tuple_graph(g, 3, 1)) == 13 * n
    assert len(build_tuple_graph(g, 3, 3)) == n**3


@settings(max_examples=30, deadline=None)
@given(small_graphs(), st.sampled_from(ks_pairs))
def test_local_neighbors_match_definition(g, ks):
    k, s = ks
    tg = build_tuple_graph(g, k, s)
    tuples = tg.tuple_list
    index = tg.tuple_index
    for i, t in enumerate(tuples):
        for j in range(1, k + 1):
            expected = sorted(
                index[u]
                for w in g.adjacency[t[j - 1]]
                if (u := t[: j - 1] + (w,) + t[j:]) in index
            )
            assert sorted(local_neighbors(tg, i, j)) == expected


def test_local_neighbors_argument_checks():
    tg = build_tuple_graph(path(3), 2, 1)
    with pytest.raises(ValueError):
        local_neighbors(tg, 0, 0)
    with pytest.raises(ValueError):
        local_neighbors(tg, 0, 3)
    with pytest.raises(IndexError):
        local_neighbors(tg, len(tg), 1)


def test_tuples_sorted_and_keys_monotone():
    tg = build_tuple_graph(cycle(7), 3, 2)
    assert tg.tuple_list == sorted(tg.tuple_list)
    assert np.all(np.diff(tg.keys) > 0)


def test_blanked_keys_group_j_neighbors():
    g = cycle(6)
    tg = build_tuple_graph(g, 3, 3)
    for j in range(3):
        keys = tg.blanked_keys(j)
        for a in range(0, len(tg), 37):
            same = {b for b in range(len(tg)) if keys[b] == keys[a]}
            ta = tg.tuple_list[a]
            expected = {tg.tuple_index[ta[:j] + (w,) + ta[j + 1 :]] for w in range(6)}
            assert same == expected


def test_tuple_graph_of_two_squares_has_four_components():
    c8, two_c4 = cycle_pair(2)
    for g, expected in ((c8, 1), (two_c4, 4)):
        tg = build_tuple_graph(g, 2, 2)
        h = nx.Graph()
        h.add_nodes_from(range(len(tg)))
        h.add_edges_from((a, b) for a, b, _ in tuple_graph_edges(tg))
        assert nx.number_connected_components(h) == expected


def test_empty_and_edgeless_graphs():
    empty = LabeledGraph.from_edges(0, [])
    tg = build_tuple_graph(empty, 2, 1)
    assert len(tg) == 0 and tg.edge_count() == 0
    iso = LabeledGraph.from_edges(3, [])
    tg = build_tuple_graph(iso, 2, 1)
    assert tg.tuple_list == [(0, 0), (1, 1), (2, 2)]
    assert tg.edge_count() == 0


def test_dump_format():
    tg = build_tuple_graph(path(2), 2, 1)
    text = dump_tuple_graph(tg)
    lines = text.splitlines()
    assert lines[0] == "# k=2 s=1 tuples=4 edges=8"
    assert lines[1:5] == ["t 0 0", "t 0 1", "t 1 0", "t 1 1"]
    assert "0 2 1" in lines and "0 1 2" in lines
    assert len(lines) == 1 + 4 + 8


def test_key_overflow_guard():
    g = LabeledGraph.from_edges(2**16, [])
    with pytest.raises(OverflowError):
        build_tuple_graph(g, 4, 1)


def test_random_mid_size_graph_edges_symmetric_per_position():
    g = ref.random_graph(random.Random(1), 12, 0.25)
    tg = build_tuple_graph(g, 3, 2)
    edges = set(tuple_graph_edges(tg))
    assert all((b, a, j) in edges for a, b, j in edges)


@settings(max_examples=30, deadline=None)
@given(small_graphs(), st.sampled_from(ks_pairs))
def test_count_matches_enumeration(g, ks):
    k, s = ks
    assert count_ks_tuples(g, k, s) == len(ref.ks_tuples(g, k, s))
