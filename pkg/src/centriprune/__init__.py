"""Centrifugal token pruning engine.

Selects a diverse-but-spatially-concentrated subset of visual tokens from a
hidden-state/key matrix pair, then folds the discarded tokens back into
their nearest retained neighbors. Model-agnostic: operates on plain feature
matrices plus a grid layout.
"""

__version__ = "0.1.0"

from ._kernels import available_backends, get_backend
from .core import (
    ConfigError,
    FeatureSet,
    PruneResult,
    PrunerConfig,
    ResourceLimitError,
    SelectionTrace,
    ShapeMismatchError,
    TokenGrid,
    TraceEntry,
    coords_of,
    d_max,
    index_of,
    spatial_distance,
    validate_config,
)
from .oracle import objective_literal, objective_novelty, reference_prune
from .pipeline import StageTimer, prune
from .recovery import ClusterAssignment, assign_clusters, swa_update
from .selection import (
    BssState,
    bss_modulated_row,
    greedy_select,
    init_pivots,
    initial_state,
    non_duplication_scores,
    update_min_dist,
)
from .similarity import (
    DistanceMatrix,
    ReducedFeatures,
    SimilarityMatrix,
    channel_variances,
    cosine_matrix,
    distance_matrix,
    screen_channels,
)
from .tensorio import TensorFormatError, read_tensor, write_tensor

__all__ = [
    "__version__",
    "BssState",
    "ClusterAssignment",
    "ConfigError",
    "DistanceMatrix",
    "FeatureSet",
    "PruneResult",
    "PrunerConfig",
    "ReducedFeatures",
    "ResourceLimitError",
    "SelectionTrace",
    "ShapeMismatchError",
    "SimilarityMatrix",
    "StageTimer",
    "TensorFormatError",
    "TokenGrid",
    "TraceEntry",
    "assign_clusters",
    "available_backends",
    "bss_modulated_row",
    "channel_variances",
    "coords_of",
    "cosine_matrix",
    "d_max",
    "distance_matrix",
    "get_backend",
    "greedy_select",
    "index_of",
    "init_pivots",
    "initial_state",
    "non_duplication_scores",
    "objective_literal",
    "objective_novelty",
    "prune",
    "read_tensor",
    "reference_prune",
    "screen_channels",
    "spatial_distance",
    "swa_update",
    "update_min_dist",
    "validate_config",
    "write_tensor",
]
