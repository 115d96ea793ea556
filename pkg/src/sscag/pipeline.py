"""End-to-end spatial-spectral anchor-graph clustering.

Stages, in order: per-band normalization, multiscale weighted mean
filtering, per-scale spatial-spectral neighbor search with cross-scale
pooling, anchor sampling, sparse anchor-graph assembly, spectral embedding,
and k-means discretization. All randomness derives from one seed; the
anchor and k-means stages use the seed plus fixed offsets so stages stay
decoupled.
"""

import time
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .anchorgraph import build_graph, sample_anchors
from .data import ClusteringResult, HsiCube, normalize_cube
from .errors import DataError
from .filtering import DEFAULT_GAMMA0, DEFAULT_SCALES, multiscale_wmf
from .neighbors import build_neighbor_summary
from .spectral import embed, kmeans
from .validation import check_positive_int, check_scales

ANCHOR_SEED_OFFSET = 1
KMEANS_SEED_OFFSET = 2


@dataclass(frozen=True)
class PipelineParams:
    """Full parameter record for one clustering run."""

    n_clusters: int
    n_anchors: int
    n_neighbors: int = 5
    alpha: float = 0.6
    gamma0: float = DEFAULT_GAMMA0
    scales: tuple = DEFAULT_SCALES
    seed: int = 0
    restarts: int = 10
    candidate_window: int = 0
    normalize_embedding: bool = False

    def __post_init__(self):
        check_positive_int(self.n_clusters, "n_clusters")
        check_positive_int(self.n_anchors, "n_anchors")
        check_positive_int(self.n_neighbors, "n_neighbors")
        check_scales(self.scales)
        object.__setattr__(self, "scales", tuple(int(s) for s in self.scales))

    def as_dict(self):
        return asdict(self)


def run_sscag(cube, params, gt=None):
    """Run the whole clustering pipeline on a cube.

    Ground truth, when given, is only validated for shape; evaluation is a
    separate step so clustering always sees every pixel. Returns a
    ClusteringResult with 1-based labels, the spectral embedding, the full
    parameter record, and per-stage wall-clock timings.
    """
    if gt is not None and gt.labels.shape[0] != cube.n_pixels:
        raise DataError(
            f"ground truth covers {gt.labels.shape[0]} pixels, cube has {cube.n_pixels}"
        )
    timings = {}
    clock = time.perf_counter

    start = clock()
    normalized = normalize_cube(cube)
    timings["normalize"] = clock() - start

    start = clock()
    stack = multiscale_wmf(normalized, params.scales, params.gamma0)
    timings["filter"] = clock() - start

    start = clock()
    summary = build_neighbor_summary(
        normalized, stack, params.n_neighbors, radius=params.candidate_window
    )
    timings["neighbors"] = clock() - start

    start = clock()
    anchors = sample_anchors(
        normalized, params.n_anchors, params.seed + ANCHOR_SEED_OFFSET
    )
    timings["anchors"] = clock() - start

    start = clock()
    graph = build_graph(
        normalized, summary, anchors, params.n_neighbors, params.alpha
    )
    timings["graph"] = clock() - start

    start = clock()
    embedding = embed(graph, params.n_clusters)
    timings["embed"] = clock() - start

    start = clock()
    coords = embedding.coords
    if params.normalize_embedding:
        norms = np.linalg.norm(coords, axis=1, keepdims=True)
        coords = coords / np.where(norms > 0, norms, 1.0)
    labels, _ = kmeans(
        coords,
        params.n_clusters,
        params.seed + KMEANS_SEED_OFFSET,
        restarts=params.restarts,
    )
    timings["kmeans"] = clock() - start
    timings["total"] = float(sum(timings.values()))

    return ClusteringResult(
        labels=labels + 1,
        embedding=embedding.coords,
        params=params.as_dict(),
        timings=timings,
    )


class SSCAG(BaseEstimator, ClusterMixin):
    """Spatial-spectral anchor-graph clustering for hyperspectral images.

    Filters the image at several window scales, pools spatial-spectral
    neighbors across scales, softly assigns every pixel to its nearest
    anchors in closed form, and clusters the pixels in the spectral
    embedding of the resulting graph.

    Parameters
    ----------
    n_clusters : int
        Number of clusters to produce.
    n_anchors : int
        Number of randomly sampled anchor pixels.
    n_neighbors : int, default 5
        Sparsity of both the pooled neighbor sets and the anchor assignment.
    alpha : float, default 0.6
        Weight of the neighborhood-mean term in the anchor costs; 0 falls
        back to a purely spectral anchor graph.
    gamma0 : float, default 0.2
        Filter strength of the weighted mean filter.
    scales : sequence of odd ints, default (3, 7, 11, 15)
        Window sizes for the multiscale filter.
    candidate_window : int, default 0
        Chebyshev radius limiting neighbor candidates; 0 searches
        exhaustively.
    restarts : int, default 10
        k-means restarts; the lowest-inertia run wins.
    random_state : int, default 0
        Seed from which all stage randomness derives.
    normalize_embedding : bool, default False
        Length-normalize embedding rows before k-means (off to cluster the
        embedding directly; available for experimentation).

    Attributes
    ----------
    labels_ : (n_pixels,) int array
        1-based cluster labels in row-major pixel order.
    embedding_ : (n_pixels, n_clusters) array
        Orthonormal spectral embedding used for discretization.
    result_ : ClusteringResult
        Labels plus the parameter record and per-stage timings.

    Examples
    --------
    >>> model = SSCAG(n_clusters=4, n_anchors=64)
    >>> labels = model.fit_predict(image)   # image: (H, W, d) array
    """

    def __init__(
        self,
        n_clusters=2,
        n_anchors=100,
        n_neighbors=5,
        alpha=0.6,
        gamma0=DEFAULT_GAMMA0,
        scales=DEFAULT_SCALES,
        candidate_window=0,
        restarts=10,
        random_state=0,
        normalize_embedding=False,
    ):
        self.n_clusters = n_clusters
        self.n_anchors = n_anchors
        self.n_neighbors = n_neighbors
        self.alpha = alpha
        self.gamma0 = gamma0
        self.scales = scales
        self.candidate_window = candidate_window
        self.restarts = restarts
        self.random_state = random_state
        self.normalize_embedding = normalize_embedding

    def _params(self):
        return PipelineParams(
            n_clusters=self.n_clusters,
            n_anchors=self.n_anchors,
            n_neighbors=self.n_neighbors,
            alpha=self.alpha,
            gamma0=self.gamma0,
            scales=tuple(self.scales),
            seed=self.random_state,
            restarts=self.restarts,
            candidate_window=self.candidate_window,
            normalize_embedding=self.normalize_embedding,
        )

    def fit(self, X, y=None):
        """Cluster an (H, W, d) image array or an HsiCube.

        Returns self; labels land in ``labels_``.
        """
        cube = X if isinstance(X, HsiCube) else HsiCube.from_image(X)
        self.result_ = run_sscag(cube, self._params())
        self.labels_ = self.result_.labels
        self.embedding_ = self.result_.embedding
        return self

    def fit_predict(self, X, y=None):
        """Cluster the image and return the 1-based labels."""
        return self.fit(X).labels_
