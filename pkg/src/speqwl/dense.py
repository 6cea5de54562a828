"""Dense k-WL over all n^k tuples, oblivious and folklore aggregation.

Colorings are flat arrays in C order over the ``(n,) * k`` tuple grid, which
coincides with the lexicographic tuple order used everywhere else.
"""

from __future__ import annotations

import os

import numpy as np

from .graph import LabeledGraph
from .refinement import ColorDictionary, Coloring, _signature_colors, compact_rows
from .tuples import atomic_type_matrix

MEM_BUDGET_ENV = "SPEQWL_MEM_BUDGET_BYTES"
DEFAULT_MEM_BUDGET = 2 * 1024**3


class MemoryBudgetError(MemoryError):
    def __init__(self, required: int, budget: int):
        super().__init__(
            f"dense refinement needs about {required} bytes, budget is {budget} bytes "
            f"(set {MEM_BUDGET_ENV} to raise it)"
        )
        self.required = required
        self.budget = budget


def memory_budget() -> int:
    return int(os.environ.get(MEM_BUDGET_ENV, DEFAULT_MEM_BUDGET))


def estimate_dense_bytes(n: int, k: int, mode: str = "oblivious") -> int:
    if mode == "folklore":
        return 8 * n ** (k + 1) * (k + 3)
    return 8 * n**k * (2 * k + 4)


def check_budget(n: int, k: int, mode: str = "oblivious") -> None:
    required = estimate_dense_bytes(n, k, mode)
    budget = memory_budget()
    if required > budget:
        raise MemoryBudgetError(required, budget)


def dense_tuples(n: int, k: int) -> np.ndarray:
    check_budget(n, k)
    if n == 0:
        return np.zeros((0, k), dtype=np.int64)
    return np.ascontiguousarray(np.indices((n,) * k, dtype=np.int64).reshape(k, -1).T)


def dense_initial_coloring(g: LabeledGraph, k: int, dictionary: ColorDictionary | None = None) -> Coloring:
    """Atomic-type coloring of all of V(G)^k; ids agree with the sparse engine's."""
    dictionary = ColorDictionary() if dictionary is None else dictionary
    atoms = atomic_type_matrix(g, dense_tuples(g.node_count, k))
    colors = compact_rows(atoms, lambda row: ("atomic", k, *row.tolist()), dictionary.colors)
    return Coloring(colors, 0, dictionary)


def refine_step_k_wl(g: LabeledGraph, c: Coloring, mode: str = "oblivious", k: int | None = None) -> Coloring:
    n = g.node_count
    if k is None:
        if n < 2:
            raise ValueError("k cannot be inferred for graphs with fewer than two nodes")
        k = 1
        while n**k < len(c.colors):
            k += 1
    if n**k != len(c.colors):
        raise ValueError("dense k-WL needs a coloring of all n^k tuples")
    if mode not in ("oblivious", "folklore"):
        raise ValueError(f"unknown k-WL mode {mode!r}")
    check_budget(n, k, mode)
    if n == 0:
        return Coloring(c.colors.copy(), c.round + 1, c.dictionary)
    grid = c.colors.reshape((n,) * k)
    table = c.dictionary.multisets
    if mode == "oblivious":
        parts = []
        for j in range(k):
            rows = np.sort(np.moveaxis(grid, j, -1).reshape(-1, n), axis=1)
            ids = compact_rows(rows, lambda row: ("all", tuple(row.tolist())), table)
            ids = np.expand_dims(ids.reshape((n,) * (k - 1)), axis=j)
            parts.append(np.broadcast_to(ids, (n,) * k).reshape(-1))
        new = _signature_colors(c.colors, parts, c.dictionary, "kwl")
    else:
        # vec[v, w, j] = C(phi_j(v, w)); the j-th slice ignores v_j.
        stacked = np.stack(
            [np.broadcast_to(np.expand_dims(np.moveaxis(grid, j, -1), axis=j), (n,) * (k + 1)) for j in range(k)],
            axis=-1,
        ).reshape(-1, k)
        vec_ids = compact_rows(stacked, lambda row: ("fvec", tuple(row.tolist())), table)
        rows = np.sort(vec_ids.reshape(n**k, n), axis=1)
        mids = compact_rows(rows, lambda row: ("folk", tuple(row.tolist())), table)
        new = _signature_colors(c.colors, [mids], c.dictionary, "fwl")
    return Coloring(new, c.round + 1, c.dictionary)
