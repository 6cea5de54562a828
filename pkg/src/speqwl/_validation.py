"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

import os

from .graph import GraphCollection, LabeledGraph


def check_graphs(X) -> list[LabeledGraph]:
    """Accept a :class:`GraphCollection` or an iterable of :class:`LabeledGraph`."""
    if isinstance(X, GraphCollection):
        graphs = list(X.graphs)
    elif isinstance(X, LabeledGraph):
        raise TypeError("expected a collection of graphs, got a single LabeledGraph")
    else:
        try:
            graphs = list(X)
        except TypeError:
            raise TypeError(f"expected an iterable of LabeledGraph, got {type(X).__name__}") from None
    for i, g in enumerate(graphs):
        if not isinstance(g, LabeledGraph):
            raise TypeError(f"item {i} is {type(g).__name__}, not LabeledGraph")
    if not graphs:
        raise ValueError("need at least one graph")
    return graphs


def check_n_jobs(n_jobs: int | None) -> int:
    """``None`` or a non-positive value means all available cores."""
    if n_jobs is None or n_jobs <= 0:
        try:
            return max(1, len(os.sched_getaffinity(0)))
        except AttributeError:
            return max(1, os.cpu_count() or 1)
    return int(n_jobs)
