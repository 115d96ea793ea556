"""Spatial-spectral anchor-graph clustering for hyperspectral images."""

from .anchorgraph import (
    AnchorGraph,
    AnchorSet,
    assign_row,
    build_graph,
    combined_distances,
    materialize_S,
    sample_anchors,
)
from .data import (
    ClusteringResult,
    GroundTruth,
    HsiCube,
    SceneSpec,
    build_coordinates,
    normalize_cube,
    synth_scene,
)
from .errors import (
    DataError,
    FormatError,
    NumericalError,
    ParameterError,
    RankDeficiencyError,
    SscagError,
)
from .filtering import FilteredStack, FilterParams, multiscale_wmf, wmf, window_neighbors
from .metrics import align_labels, aligned_confusion, average_accuracy, evaluate, kappa, overall_accuracy
from .neighbors import (
    NeighborSummary,
    build_neighbor_summary,
    knn_all_pixels,
    knn_per_scale,
    pool_scales,
    ssdm_distance,
)
from .pipeline import SSCAG, PipelineParams, run_sscag
from .spectral import SpectralEmbedding, embed, kmeans

__version__ = "0.1.0"

__all__ = [
    "AnchorGraph",
    "AnchorSet",
    "ClusteringResult",
    "DataError",
    "FilterParams",
    "FilteredStack",
    "FormatError",
    "GroundTruth",
    "HsiCube",
    "NeighborSummary",
    "NumericalError",
    "ParameterError",
    "PipelineParams",
    "RankDeficiencyError",
    "SSCAG",
    "SceneSpec",
    "SpectralEmbedding",
    "SscagError",
    "align_labels",
    "aligned_confusion",
    "assign_row",
    "average_accuracy",
    "build_coordinates",
    "build_graph",
    "build_neighbor_summary",
    "combined_distances",
    "embed",
    "evaluate",
    "kappa",
    "kmeans",
    "knn_all_pixels",
    "knn_per_scale",
    "materialize_S",
    "multiscale_wmf",
    "normalize_cube",
    "overall_accuracy",
    "pool_scales",
    "run_sscag",
    "sample_anchors",
    "ssdm_distance",
    "synth_scene",
    "wmf",
    "window_neighbors",
]
