"""Color refinement over tuples: every local variant, the dense k-WL baselines,
1-WL, edge-labeled 1-WL on a tuple graph, stability and distinguishing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence, Union

import numpy as np

from .graph import LabeledGraph, disjoint_union
from .tuples import TupleGraph, build_tuple_graph, check_ks

ALGORITHMS = (
    "one_wl",
    "k_wl_oblivious",
    "k_wl_folklore",
    "delta_k_lwl",
    "delta_k_lwl_plus",
    "ks_lwl",
    "ks_lwl_plus",
    "edge_labeled_one_wl",
)

# Command-line ids -> internal names.
ALGORITHM_ALIASES = {
    "1-wl": "one_wl",
    "k-wl": "k_wl_oblivious",
    "k-fwl": "k_wl_folklore",
    "delta-k-lwl": "delta_k_lwl",
    "delta-k-lwl-plus": "delta_k_lwl_plus",
    "ks-lwl": "ks_lwl",
    "ks-lwl-plus": "ks_lwl_plus",
    "edge-labeled-1-wl": "edge_labeled_one_wl",
}

PLUS_ALGORITHMS = ("delta_k_lwl_plus", "ks_lwl_plus")
UNTIL_STABLE = "until_stable"


class ColorDictionary:
    """Injective map from refinement signatures to compact ids.

    Ids are handed out in first-encounter order and never reused, so colors
    from different rounds never collide. Multisets of neighbor colors are
    interned in a second table and referenced by id inside color signatures.
    """

    def __init__(self):
        self.colors: dict[Hashable, int] = {}
        self.multisets: dict[Hashable, int] = {}

    def __len__(self):
        return len(self.colors)

    def color_id(self, key: Hashable) -> int:
        return self.colors.setdefault(key, len(self.colors))

    def copy(self) -> "ColorDictionary":
        other = ColorDictionary()
        other.colors = dict(self.colors)
        other.multisets = dict(self.multisets)
        return other


@dataclass
class Coloring:
    colors: np.ndarray
    round: int
    dictionary: ColorDictionary = field(repr=False)

    def __len__(self):
        return len(self.colors)

    @property
    def n_classes(self) -> int:
        return len(np.unique(self.colors))

    def histogram(self, mask: np.ndarray | None = None) -> dict[int, int]:
        vals = self.colors if mask is None else self.colors[mask]
        ids, counts = np.unique(vals, return_counts=True)
        return dict(zip(ids.tolist(), counts.tolist()))

    def classes(self) -> list[list[int]]:
        """Color classes as sorted index lists, ordered by smallest member."""
        out: dict[int, list[int]] = {}
        for i, col in enumerate(self.colors.tolist()):
            out.setdefault(col, []).append(i)
        return list(out.values())


@dataclass(frozen=True)
class RefinementConfig:
    algorithm: str = "ks_lwl"
    k: int = 2
    s: int | None = None
    iterations: Union[int, str] = 5
    plus_counts_last_iteration_only: bool = True

    def __post_init__(self):
        algo = ALGORITHM_ALIASES.get(self.algorithm, self.algorithm)
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "algorithm", algo)
        if algo == "one_wl":
            object.__setattr__(self, "k", 1)
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if algo.startswith("k_wl") and self.k < 2:
            raise ValueError("k-WL variants need k >= 2")
        if algo in ("ks_lwl", "ks_lwl_plus", "edge_labeled_one_wl"):
            s = 1 if self.s is None else self.s
            check_ks(self.k, s)
            object.__setattr__(self, "s", s)
        else:
            object.__setattr__(self, "s", self.k)
        it = self.iterations
        if it != UNTIL_STABLE and not (isinstance(it, (int, np.integer)) and it >= 0):
            raise ValueError("iterations must be a non-negative integer or 'until_stable'")

    @property
    def is_plus(self) -> bool:
        return self.algorithm in PLUS_ALGORITHMS

    def uses_plus(self, round_index: int) -> bool:
        """Whether round ``round_index`` (1-based) aggregates with neighbor counts."""
        if not self.is_plus:
            return False
        if self.plus_counts_last_iteration_only and self.iterations != UNTIL_STABLE:
            return round_index == self.iterations
        return True

    def plus_pending_after(self, round_index: int) -> bool:
        """Whether a later round still switches to count aggregation."""
        return (
            self.is_plus
            and self.plus_counts_last_iteration_only
            and self.iterations != UNTIL_STABLE
            and round_index < self.iterations
        )


def _unique_rows(rows: np.ndarray):
    """Like ``np.unique(rows, axis=0, return_index=True, return_inverse=True)``.

    Sorts column-wise with ``lexsort``, which is much faster than the
    structured-dtype sort ``np.unique`` uses for 2-D input.
    """
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    m = len(rows)
    order = np.lexsort(rows.T[::-1]) if rows.shape[1] > 1 else np.argsort(rows[:, 0], kind="stable")
    srt = rows[order]
    start = np.ones(m, dtype=bool)
    if m > 1:
        start[1:] = np.any(srt[1:] != srt[:-1], axis=1)
    group = np.cumsum(start) - 1
    inv = np.empty(m, dtype=np.int64)
    inv[order] = group
    # lexsort is stable, so the first row of each run is the group's first occurrence.
    first = order[start]
    return srt[start], first, inv


def compact_rows(rows: np.ndarray, key: Callable[[np.ndarray], Hashable], table: dict) -> np.ndarray:
    """Map each row to ``table[key(row)]``, inserting unseen keys in first-row order."""
    if len(rows) == 0:
        return np.zeros(0, dtype=np.int64)
    uniq, first, inv = _unique_rows(rows)
    ids = np.empty(len(uniq), dtype=np.int64)
    for u in np.argsort(first, kind="stable"):
        ids[u] = table.setdefault(key(uniq[u]), len(table))
    return ids[inv]


def _multiset_ids(indptr: np.ndarray, values: np.ndarray, table: dict, tag: str) -> np.ndarray:
    m = len(indptr) - 1
    counts = np.diff(indptr)
    width = int(counts.max()) if m else 0
    seg = np.repeat(np.arange(m, dtype=np.int64), counts)
    order = np.lexsort((values, seg))
    pos = np.arange(len(values), dtype=np.int64) - np.repeat(indptr[:-1], counts)
    mat = np.full((m, width + 1), -1, dtype=np.int64)
    mat[:, 0] = counts
    mat[seg, 1 + pos] = values[order]
    return compact_rows(mat, lambda row: (tag, tuple(row[1 : 1 + row[0]].tolist())), table)


def _signature_colors(old: np.ndarray, parts: Sequence[np.ndarray], dictionary: ColorDictionary, tag: str):
    rows = np.column_stack([old, *parts]) if parts else old.reshape(-1, 1)
    return compact_rows(rows, lambda row: (tag, *row.tolist()), dictionary.colors)


# -- tuple-based local algorithms ------------------------------------------------


def initial_coloring(tg: TupleGraph, dictionary: ColorDictionary | None = None) -> Coloring:
    """Color every tuple by its atomic type."""
    dictionary = ColorDictionary() if dictionary is None else dictionary
    k = tg.k
    colors = compact_rows(tg.atomic_matrix, lambda row: ("atomic", k, *row.tolist()), dictionary.colors)
    return Coloring(colors, 0, dictionary)


def _plus_counts(group_keys: np.ndarray, colors: np.ndarray) -> np.ndarray:
    # Number of j-neighbors (local or global, the tuple itself included) sharing each tuple's color.
    pairs = np.column_stack([group_keys, colors])
    _, _, inv = _unique_rows(pairs)
    return np.bincount(inv)[inv]


def _local_core(
    k: int,
    indptrs: Sequence[np.ndarray],
    indices: Sequence[np.ndarray],
    group_keys: Callable[[int], np.ndarray],
    c: Coloring,
    plus: bool,
) -> Coloring:
    colors = c.colors
    table = c.dictionary.multisets
    parts = []
    for j in range(k):
        idx = indices[j]
        vals = colors[idx]
        if plus:
            vals = (vals << 32) | _plus_counts(group_keys(j), colors)[idx]
        parts.append(_multiset_ids(indptrs[j], vals, table, "plus" if plus else "local"))
    new = _signature_colors(colors, parts, c.dictionary, "lwl+" if plus else "lwl")
    return Coloring(new, c.round + 1, c.dictionary)


def _local_step(tg: TupleGraph, c: Coloring, plus: bool) -> Coloring:
    return _local_core(tg.k, tg.local_indptr, tg.local_indices, tg.blanked_keys, c, plus)


class TupleGraphBatch:
    """Several tuple graphs refined as one block-diagonal graph.

    Color ids are assigned in first-occurrence order over the concatenated
    tuples, which equals refining the graphs one after another per round.
    """

    def __init__(self, graphs: Sequence[TupleGraph]):
        if not graphs:
            raise ValueError("empty batch")
        self.k = graphs[0].k
        if any(tg.k != self.k for tg in graphs):
            raise ValueError("all tuple graphs in a batch need the same k")
        sizes = np.array([len(tg) for tg in graphs], dtype=np.int64)
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.owner = np.repeat(np.arange(len(graphs), dtype=np.int64), sizes)
        self.graphs = list(graphs)
        self.indptrs, self.indices = [], []
        for j in range(self.k):
            ptr = [np.zeros(1, dtype=np.int64)]
            idx = []
            base = 0
            for off, tg in zip(self.offsets, graphs):
                ptr.append(tg.local_indptr[j][1:] + base)
                idx.append(tg.local_indices[j] + off)
                base += len(tg.local_indices[j])
            self.indptrs.append(np.concatenate(ptr))
            self.indices.append(np.concatenate(idx))
        self.atomic_matrix = np.concatenate([tg.atomic_matrix for tg in graphs])

    def __len__(self):
        return int(self.offsets[-1])

    def group_keys(self, j: int) -> np.ndarray:
        blanked = np.concatenate([tg.blanked_keys(j) for tg in self.graphs])
        return np.column_stack([self.owner, blanked])

    def initial(self, dictionary: ColorDictionary) -> Coloring:
        k = self.k
        colors = compact_rows(self.atomic_matrix, lambda row: ("atomic", k, *row.tolist()), dictionary.colors)
        return Coloring(colors, 0, dictionary)

    def step(self, c: Coloring, plus: bool) -> Coloring:
        return _local_core(self.k, self.indptrs, self.indices, self.group_keys, c, plus)

    def split(self, c: Coloring) -> list[Coloring]:
        return [
            Coloring(c.colors[a:b], c.round, c.dictionary) for a, b in zip(self.offsets[:-1], self.offsets[1:])
        ]


def refine_step_ks_lwl(tg: TupleGraph, c: Coloring) -> Coloring:
    return _local_step(tg, c, plus=False)


def refine_step_ks_lwl_plus(tg: TupleGraph, c: Coloring) -> Coloring:
    return _local_step(tg, c, plus=True)


def _require_full(tg: TupleGraph):
    if tg.s != tg.k:
        raise ValueError("delta-k-LWL needs the tuple graph over all k-tuples (s = k)")


def refine_step_delta_k_lwl(tg_full: TupleGraph, c: Coloring) -> Coloring:
    _require_full(tg_full)
    return _local_step(tg_full, c, plus=False)


def refine_step_delta_k_lwl_plus(tg_full: TupleGraph, c: Coloring) -> Coloring:
    _require_full(tg_full)
    return _local_step(tg_full, c, plus=True)


# -- node-level algorithms ---------------------------------------------------------


def one_wl_initial(g: LabeledGraph, dictionary: ColorDictionary | None = None) -> Coloring:
    dictionary = ColorDictionary() if dictionary is None else dictionary
    colors = [dictionary.color_id(("node", lab)) for lab in g.node_labels]
    return Coloring(np.array(colors, dtype=np.int64), 0, dictionary)


def refine_step_one_wl(g: LabeledGraph, c: Coloring) -> Coloring:
    """Color refinement: own color plus the multiset of neighbor colors."""
    old = c.colors.tolist()
    new = []
    for v in range(g.node_count):
        nbrs = tuple(sorted(old[w] for w in g.adjacency[v]))
        new.append(c.dictionary.color_id(("1wl", old[v], nbrs)))
    return Coloring(np.array(new, dtype=np.int64), c.round + 1, c.dictionary)


@dataclass(frozen=True)
class LabeledDigraph:
    """Directed graph with hashable node labels and integer edge labels.

    ``out_edges[v]`` lists ``(target, label)`` pairs.
    """

    node_labels: tuple
    out_edges: tuple[tuple[tuple[int, int], ...], ...]

    def __len__(self):
        return len(self.node_labels)


def tuple_graph_to_digraph(tg: TupleGraph) -> LabeledDigraph:
    """Nodes labeled by atomic type, edges by 1-based position."""
    out = []
    for i in range(len(tg)):
        edges = []
        for j in range(tg.k):
            lo, hi = tg.local_indptr[j][i : i + 2]
            edges.extend((int(d), j + 1) for d in tg.local_indices[j][lo:hi])
        out.append(tuple(edges))
    labels = tuple(("atomic", tg.k, *tg.atomic_type(i)) for i in range(len(tg)))
    return LabeledDigraph(labels, tuple(out))


def edge_labeled_initial(dg: LabeledDigraph, dictionary: ColorDictionary | None = None) -> Coloring:
    dictionary = ColorDictionary() if dictionary is None else dictionary
    colors = [dictionary.color_id(("dnode", lab)) for lab in dg.node_labels]
    return Coloring(np.array(colors, dtype=np.int64), 0, dictionary)


def refine_step_edge_labeled_one_wl(dg: LabeledDigraph, c: Coloring) -> Coloring:
    """1-WL over out-neighbors, aggregating (neighbor color, edge label) pairs."""
    old = c.colors.tolist()
    new = []
    for v, edges in enumerate(dg.out_edges):
        nbrs = tuple(sorted((old[w], lab) for w, lab in edges))
        new.append(c.dictionary.color_id(("el1wl", old[v], nbrs)))
    return Coloring(np.array(new, dtype=np.int64), c.round + 1, c.dictionary)


# -- partitions ---------------------------------------------------------------------


def same_partition(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff the two colorings induce the same partition of their index set."""
    if len(a) != len(b):
        return False
    if len(a) == 0:
        return True
    n_a = len(np.unique(a))
    n_b = len(np.unique(b))
    n_ab = len(_unique_rows(np.column_stack([a, b]))[0])
    return n_a == n_b == n_ab


def refines(new: np.ndarray, old: np.ndarray) -> bool:
    """True iff equal ``new`` colors imply equal ``old`` colors."""
    if len(new) == 0:
        return True
    return len(np.unique(new)) == len(_unique_rows(np.column_stack([new, old]))[0])


# -- uniform driver ------------------------------------------------------------------


class Refiner:
    """Binds one algorithm to one input so callers can iterate rounds uniformly.

    ``tuples`` holds the colored domain as an ``(m, k)`` node array (k = 1 for
    node-level algorithms) so callers can split it by graph.
    """

    def __init__(self, config: RefinementConfig, inputs):
        self.config = config
        algo = config.algorithm
        self.tuple_graph = None
        self.digraph = None
        self.graph = None
        if algo == "one_wl":
            self.graph = _as_graph(inputs)
            self.tuples = np.arange(self.graph.node_count, dtype=np.int64).reshape(-1, 1)
        elif algo.startswith("k_wl"):
            from .dense import dense_tuples

            self.graph = _as_graph(inputs)
            self.tuples = dense_tuples(self.graph.node_count, config.k)
        elif algo == "edge_labeled_one_wl":
            if isinstance(inputs, LabeledDigraph):
                self.digraph = inputs
                self.tuples = np.arange(len(inputs), dtype=np.int64).reshape(-1, 1)
            else:
                tg = inputs if isinstance(inputs, TupleGraph) else build_tuple_graph(inputs, config.k, config.s)
                self.tuple_graph = tg
                self.digraph = tuple_graph_to_digraph(tg)
                self.tuples = tg.tuples
        else:
            if isinstance(inputs, TupleGraph):
                if (inputs.k, inputs.s) != (config.k, config.s):
                    raise ValueError("tuple graph does not match the configured (k, s)")
                tg = inputs
            else:
                tg = build_tuple_graph(inputs, config.k, config.s)
            self.tuple_graph = tg
            self.tuples = tg.tuples

    def __len__(self):
        return len(self.tuples)

    def initial(self, dictionary: ColorDictionary | None = None) -> Coloring:
        algo = self.config.algorithm
        if algo == "one_wl":
            return one_wl_initial(self.graph, dictionary)
        if algo.startswith("k_wl"):
            from .dense import dense_initial_coloring

            return dense_initial_coloring(self.graph, self.config.k, dictionary)
        if algo == "edge_labeled_one_wl":
            return edge_labeled_initial(self.digraph, dictionary)
        return initial_coloring(self.tuple_graph, dictionary)

    def step(self, c: Coloring) -> Coloring:
        algo = self.config.algorithm
        if algo == "one_wl":
            return refine_step_one_wl(self.graph, c)
        if algo.startswith("k_wl"):
            from .dense import refine_step_k_wl

            mode = "oblivious" if algo == "k_wl_oblivious" else "folklore"
            return refine_step_k_wl(self.graph, c, mode, self.config.k)
        if algo == "edge_labeled_one_wl":
            return refine_step_edge_labeled_one_wl(self.digraph, c)
        return _local_step(self.tuple_graph, c, plus=self.config.uses_plus(c.round + 1))

    def max_rounds(self) -> int:
        it = self.config.iterations
        return max(len(self), 1) if it == UNTIL_STABLE else int(it)


def _as_graph(inputs) -> LabeledGraph:
    if isinstance(inputs, LabeledGraph):
        return inputs
    if isinstance(inputs, TupleGraph):
        return inputs.graph
    raise TypeError(f"expected a LabeledGraph, got {type(inputs).__name__}")


def run_to_stable(inputs, config: RefinementConfig, dictionary: ColorDictionary | None = None) -> list[Coloring]:
    """Round history starting with the initial coloring.

    With an integer ``iterations`` exactly that many rounds are run. With
    ``"until_stable"`` rounds run until one leaves the partition unchanged;
    that confirming round is the last entry.
    """
    refiner = inputs if isinstance(inputs, Refiner) else Refiner(config, inputs)
    history = [refiner.initial(dictionary)]
    until_stable = config.iterations == UNTIL_STABLE
    for _ in range(refiner.max_rounds()):
        nxt = refiner.step(history[-1])
        history.append(nxt)
        if until_stable and same_partition(nxt.colors, history[-2].colors):
            break
    return history


@dataclass(frozen=True)
class DistinguishResult:
    distinguished: bool
    round: int | None
    rounds_run: int = 0

    def __bool__(self):
        return self.distinguished


def _histograms_differ(colors: np.ndarray, in_g: np.ndarray, in_h: np.ndarray) -> bool:
    hg = np.unique(colors[in_g], return_counts=True)
    hh = np.unique(colors[in_h], return_counts=True)
    return not (np.array_equal(hg[0], hh[0]) and np.array_equal(hg[1], hh[1]))


def _split_runs(config: RefinementConfig) -> bool:
    # Local non-count aggregation never leaves the graph a tuple lives in, so
    # running the two graphs side by side on one dictionary equals the union run.
    return config.algorithm in ("ks_lwl", "delta_k_lwl", "one_wl")


def distinguish(g: LabeledGraph, h: LabeledGraph, config: RefinementConfig) -> DistinguishResult:
    """Run ``config`` on the disjoint union and compare per-graph color histograms.

    Only tuples lying entirely in one graph are counted; mixed tuples of the
    union still take part in refinement.
    """
    if _split_runs(config):
        refiners = [Refiner(config, g), Refiner(config, h)]
        dictionary = ColorDictionary()
        cs = [r.initial(dictionary) for r in refiners]
        max_rounds = refiners[0].max_rounds()
        if config.iterations == UNTIL_STABLE:
            max_rounds += refiners[1].max_rounds()

        def advance(cur):
            return [r.step(c) for r, c in zip(refiners, cur)]

        def differ(cur):
            both = np.concatenate([cur[0].colors, cur[1].colors])
            in_g = np.arange(len(both)) < len(cur[0].colors)
            return _histograms_differ(both, in_g, ~in_g)

        def stable(new, old):
            return all(same_partition(a.colors, b.colors) for a, b in zip(new, old))

    else:
        refiner = Refiner(config, disjoint_union(g, h))
        boundary = g.node_count
        in_g = np.all(refiner.tuples < boundary, axis=1)
        in_h = np.all(refiner.tuples >= boundary, axis=1)
        cs = refiner.initial()
        max_rounds = refiner.max_rounds()

        def advance(cur):
            return refiner.step(cur)

        def differ(cur):
            return _histograms_differ(cur.colors, in_g, in_h)

        def stable(new, old):
            return same_partition(new.colors, old.colors)

    if differ(cs):
        return DistinguishResult(True, 0, 0)
    for r in range(1, max_rounds + 1):
        nxt = advance(cs)
        if differ(nxt):
            return DistinguishResult(True, r, r)
        if stable(nxt, cs) and not config.plus_pending_after(r):
            return DistinguishResult(False, None, r)
        cs = nxt
    return DistinguishResult(False, None, max_rounds)


def histogram_text(history: Sequence[Coloring]) -> str:
    """One ``round color count`` line per color class per round."""
    lines = []
    for c in history:
        for col, cnt in sorted(c.histogram().items()):
            lines.append(f"{c.round} {col} {cnt}")
    return "\n".join(lines) + ("\n" if lines else "")
