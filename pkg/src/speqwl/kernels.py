"""Explicit feature maps, Gram matrices and sklearn-compatible kernel estimators."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graphs, check_n_jobs
from .graph import LabeledGraph
from .refinement import (
    UNTIL_STABLE,
    _unique_rows,
    ColorDictionary,
    Coloring,
    RefinementConfig,
    Refiner,
    TupleGraphBatch,
    run_to_stable,
    same_partition,
)


@dataclass(frozen=True)
class SparseFeatureVector:
    """Color counts over all rounds; ``ids`` strictly increasing, ``counts`` positive."""

    ids: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_colors(cls, colors: np.ndarray) -> "SparseFeatureVector":
        ids, counts = np.unique(colors, return_counts=True)
        return cls(ids.astype(np.int64), counts.astype(np.int64))

    def __len__(self):
        return len(self.ids)

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.ids.tolist(), self.counts.tolist()))

    def dot(self, other: "SparseFeatureVector") -> float:
        _, ia, ib = np.intersect1d(self.ids, other.ids, assume_unique=True, return_indices=True)
        return float(np.dot(self.counts[ia].astype(np.float64), other.counts[ib].astype(np.float64)))

    def to_text(self) -> str:
        return " ".join(f"{i}:{c}" for i, c in zip(self.ids.tolist(), self.counts.tolist()))

    @classmethod
    def from_text(cls, text: str) -> "SparseFeatureVector":
        pairs = [tok.split(":") for tok in text.split()]
        return cls(
            np.array([int(a) for a, _ in pairs], dtype=np.int64),
            np.array([int(b) for _, b in pairs], dtype=np.int64),
        )

    def __eq__(self, other):
        if not isinstance(other, SparseFeatureVector):
            return NotImplemented
        return np.array_equal(self.ids, other.ids) and np.array_equal(self.counts, other.counts)

    __hash__ = None


@dataclass(frozen=True)
class GramMatrix:
    values: np.ndarray
    normalized: bool

    @property
    def shape(self):
        return self.values.shape

    def is_symmetric(self) -> bool:
        return np.array_equal(self.values, self.values.T)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.values).min())


def build_refiners(graphs: Sequence[LabeledGraph], config: RefinementConfig, n_jobs: int = 1) -> list[Refiner]:
    """Per-graph preprocessing (tuple enumeration and tuple graphs), optionally in parallel."""
    n_jobs = check_n_jobs(n_jobs)
    if n_jobs == 1 or len(graphs) < 2:
        return [Refiner(config, g) for g in graphs]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(Refiner)(config, g) for g in graphs)


def refine_collection(
    graphs: Sequence[LabeledGraph],
    config: RefinementConfig,
    dictionary: ColorDictionary | None = None,
    n_jobs: int = 1,
    refiners: Sequence[Refiner] | None = None,
) -> list[list[Coloring]]:
    """Round histories for every graph, refined round-synchronously against one dictionary.

    Round ``i`` of every graph is compacted before round ``i + 1`` of any
    graph, so color ids form contiguous blocks per round across the collection.
    With ``"until_stable"`` rounds continue until no graph's partition changes.
    """
    dictionary = ColorDictionary() if dictionary is None else dictionary
    if refiners is None:
        refiners = build_refiners(graphs, config, n_jobs)
    if config.algorithm in _BATCHED and refiners:
        return _refine_batched(refiners, config, dictionary)
    histories = [[r.initial(dictionary)] for r in refiners]
    if config.iterations == UNTIL_STABLE:
        cap = sum(r.max_rounds() for r in refiners)
    else:
        cap = int(config.iterations)
    for _ in range(cap):
        changed = False
        for r, hist in zip(refiners, histories):
            nxt = r.step(hist[-1])
            changed |= not same_partition(nxt.colors, hist[-1].colors)
            hist.append(nxt)
        if config.iterations == UNTIL_STABLE and not changed:
            break
    return histories


_BATCHED = ("ks_lwl", "ks_lwl_plus", "delta_k_lwl", "delta_k_lwl_plus")


def _class_count(owner: np.ndarray, colors: np.ndarray) -> int:
    return len(_unique_rows(np.column_stack([owner, colors]))[0])


def _refine_batched(refiners: Sequence[Refiner], config: RefinementConfig, dictionary: ColorDictionary):
    batch = TupleGraphBatch([r.tuple_graph for r in refiners])
    history = [batch.initial(dictionary)]
    if config.iterations == UNTIL_STABLE:
        cap = max(len(batch), 1)
    else:
        cap = int(config.iterations)
    for _ in range(cap):
        prev = history[-1]
        nxt = batch.step(prev, config.uses_plus(prev.round + 1))
        history.append(nxt)
        # Every round refines the previous one, so equal per-graph class counts mean no graph changed.
        if config.iterations == UNTIL_STABLE and _class_count(batch.owner, nxt.colors) == _class_count(
            batch.owner, prev.colors
        ):
            break
    per_round = [batch.split(c) for c in history]
    return [[rnd[i] for rnd in per_round] for i in range(len(refiners))]


def _features_from_history(history: Sequence[Coloring]) -> SparseFeatureVector:
    if not history:
        return SparseFeatureVector(np.zeros(0, np.int64), np.zeros(0, np.int64))
    return SparseFeatureVector.from_colors(np.concatenate([c.colors for c in history]))


def feature_maps(
    graphs, config: RefinementConfig, dictionary: ColorDictionary | None = None, n_jobs: int = 1
) -> list[SparseFeatureVector]:
    histories = refine_collection(check_graphs(graphs), config, dictionary, n_jobs)
    return [_features_from_history(h) for h in histories]


def feature_map(g: LabeledGraph, config: RefinementConfig, dictionary: ColorDictionary | None = None) -> SparseFeatureVector:
    """Concatenated per-round color histograms of one graph."""
    return feature_maps([g], config, dictionary)[0]


def node_feature_map(g: LabeledGraph, config: RefinementConfig, v: int) -> list[dict[int, int]]:
    """For each position i, the final-round color histogram of tuples with ``t_i = v``."""
    if not 0 <= v < g.node_count:
        raise IndexError(f"node {v} out of range")
    refiner = Refiner(config, g)
    final = run_to_stable(refiner, config)[-1]
    out = []
    for i in range(refiner.tuples.shape[1]):
        out.append(final.histogram(refiner.tuples[:, i] == v))
    return out


def feature_matrix(features: Sequence[SparseFeatureVector], n_features: int | None = None) -> sparse.csr_matrix:
    """Stack feature vectors as rows of a CSR matrix; ids at or beyond ``n_features`` are dropped."""
    if n_features is None:
        n_features = 1 + max([int(f.ids[-1]) for f in features if len(f)] + [-1])
    indptr = [0]
    indices, data = [], []
    for f in features:
        keep = f.ids < n_features
        indices.append(f.ids[keep])
        data.append(f.counts[keep])
        indptr.append(indptr[-1] + int(keep.sum()))
    indices = np.concatenate(indices) if indices else np.zeros(0, np.int64)
    data = np.concatenate(data) if data else np.zeros(0, np.int64)
    return sparse.csr_matrix(
        (data.astype(np.float64), indices, np.array(indptr)), shape=(len(features), n_features)
    )


def cosine_normalize(values: np.ndarray, left_self: np.ndarray, right_self: np.ndarray) -> np.ndarray:
    """``k(x,y) / sqrt(k(x,x) k(y,y))`` with 0/0 taken as 0."""
    denom = np.sqrt(np.outer(left_self, right_self))
    out = np.zeros_like(values, dtype=np.float64)
    np.divide(values, denom, out=out, where=denom > 0)
    return out


def gram_from_features(features: Sequence[SparseFeatureVector], normalize: bool = True) -> GramMatrix:
    x = feature_matrix(features)
    values = (x @ x.T).toarray()
    if normalize:
        diag = np.diag(values).copy()
        values = cosine_normalize(values, diag, diag)
        np.fill_diagonal(values, np.where(diag > 0, 1.0, 0.0))
    values = (values + values.T) / 2
    return GramMatrix(values, normalize)


def gram_matrix(collection, config: RefinementConfig, normalize: bool = True, n_jobs: int = 1) -> GramMatrix:
    return gram_from_features(feature_maps(collection, config, n_jobs=n_jobs), normalize)


def _fmt(v: float) -> str:
    return "%.17g" % v


def write_gram(m: GramMatrix, path: str | os.PathLike, format: str = "csv", labels: Sequence | None = None) -> None:
    """Write a Gram matrix as plain CSV or as LIBSVM precomputed-kernel rows."""
    values = np.asarray(m.values if isinstance(m, GramMatrix) else m, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("Gram matrix has non-finite entries")
    if format == "csv":
        lines = [",".join(_fmt(v) for v in row) for row in values]
    elif format in ("libsvm", "libsvm_precomputed"):
        labels = [0] * len(values) if labels is None else list(labels)
        if len(labels) != len(values):
            raise ValueError("need one label per row")
        lines = [
            " ".join([str(lab), f"0:{i + 1}"] + [f"{j + 1}:{_fmt(v)}" for j, v in enumerate(row)])
            for i, (lab, row) in enumerate(zip(labels, values))
        ]
    else:
        raise ValueError(f"unknown Gram format {format!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


def read_gram(path: str | os.PathLike, format: str = "csv") -> tuple[np.ndarray, list[str] | None]:
    """Inverse of :func:`write_gram`; returns the matrix and, for LIBSVM, the row labels."""
    with open(path) as fh:
        rows = [line.split() if format != "csv" else line.strip().split(",") for line in fh if line.strip()]
    if format == "csv":
        return np.array([[float(v) for v in row] for row in rows], dtype=np.float64), None
    labels = [row[0] for row in rows]
    values = [[float(tok.split(":")[1]) for tok in row[2:]] for row in rows]
    return np.array(values, dtype=np.float64).reshape(len(rows), -1), labels


class KSLWLKernel(BaseEstimator, TransformerMixin):
    """Graph kernel over refinement color histograms.

    ``fit`` refines the training graphs and keeps their features;
    ``transform`` returns the kernel between new graphs and the training
    graphs, so the output plugs into ``SVC(kernel="precomputed")``.
    """

    def __init__(
        self,
        algorithm="ks_lwl",
        k=2,
        s=1,
        iterations=5,
        plus_counts_last_iteration_only=True,
        normalize=True,
        n_jobs=1,
    ):
        self.algorithm = algorithm
        self.k = k
        self.s = s
        self.iterations = iterations
        self.plus_counts_last_iteration_only = plus_counts_last_iteration_only
        self.normalize = normalize
        self.n_jobs = n_jobs

    def _config(self) -> RefinementConfig:
        return RefinementConfig(
            self.algorithm, self.k, self.s, self.iterations, self.plus_counts_last_iteration_only
        )

    def fit(self, X, y=None):
        graphs = check_graphs(X)
        self.config_ = self._config()
        self.dictionary_ = ColorDictionary()
        self.features_ = feature_maps(graphs, self.config_, self.dictionary_, self.n_jobs)
        self.n_features_ = len(self.dictionary_)
        x = feature_matrix(self.features_, self.n_features_)
        self.train_matrix_ = x
        self.train_self_ = np.asarray(x.multiply(x).sum(axis=1)).ravel()
        return self

    def _kernel(self, features):
        x = feature_matrix(features, self.n_features_)
        values = (x @ self.train_matrix_.T).toarray()
        if self.normalize:
            own = np.array([f.dot(f) for f in features])
            values = cosine_normalize(values, own, self.train_self_)
        return values

    def transform(self, X):
        check_is_fitted(self, "features_")
        features = feature_maps(check_graphs(X), self.config_, self.dictionary_.copy(), self.n_jobs)
        return self._kernel(features)

    def fit_transform(self, X, y=None):
        self.fit(X, y)
        return gram_from_features(self.features_, self.normalize).values


class KSLWLFeatures(BaseEstimator, TransformerMixin):
    """Sparse color-count features; columns are the colors seen during ``fit``."""

    def __init__(self, algorithm="ks_lwl", k=2, s=1, iterations=5, plus_counts_last_iteration_only=True, n_jobs=1):
        self.algorithm = algorithm
        self.k = k
        self.s = s
        self.iterations = iterations
        self.plus_counts_last_iteration_only = plus_counts_last_iteration_only
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        graphs = check_graphs(X)
        self.config_ = RefinementConfig(
            self.algorithm, self.k, self.s, self.iterations, self.plus_counts_last_iteration_only
        )
        self.dictionary_ = ColorDictionary()
        self.features_ = feature_maps(graphs, self.config_, self.dictionary_, self.n_jobs)
        self.n_features_ = len(self.dictionary_)
        return self

    def transform(self, X):
        check_is_fitted(self, "dictionary_")
        features = feature_maps(check_graphs(X), self.config_, self.dictionary_.copy(), self.n_jobs)
        return feature_matrix(features, self.n_features_)
