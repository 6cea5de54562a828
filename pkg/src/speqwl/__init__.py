"""Sparse Weisfeiler-Leman refinement over (k,s)-tuples, baselines and graph kernels."""

from .graph import (
    GraphCollection,
    GraphError,
    LabeledGraph,
    apply_permutation,
    connected_components,
    disjoint_union,
    empty_graph,
    induced_subgraph,
)
from .io import TUDatasetConsistencyError, TUDatasetFormatError, load_tudataset, write_tudataset
from .kernels import (
    GramMatrix,
    KSLWLFeatures,
    KSLWLKernel,
    SparseFeatureVector,
    feature_map,
    feature_maps,
    gram_matrix,
    node_feature_map,
    read_gram,
    write_gram,
)
from .refinement import (
    ALGORITHMS,
    UNTIL_STABLE,
    ColorDictionary,
    Coloring,
    DistinguishResult,
    RefinementConfig,
    Refiner,
    distinguish,
    initial_coloring,
    refine_step_delta_k_lwl,
    refine_step_delta_k_lwl_plus,
    refine_step_edge_labeled_one_wl,
    refine_step_ks_lwl,
    refine_step_ks_lwl_plus,
    refine_step_one_wl,
    run_to_stable,
)
from .tuples import (
    TupleGraph,
    atomic_type,
    build_tuple_graph,
    component_count,
    enumerate_ks_multisets,
    enumerate_ks_tuples,
    local_neighbors,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
