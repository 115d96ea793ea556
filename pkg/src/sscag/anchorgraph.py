"""Anchor sampling and closed-form sparse anchor-graph construction.

Each pixel is softly assigned to its k nearest anchors by minimizing a
regularized linear objective over the probability simplex. The minimizer
has a closed form: sort the pixel-to-anchor costs ascending, keep the k
smallest, and weight them by how far they fall below the (k+1)-th cost.
The regularization strength that makes the solution exactly k-sparse is
determined per row by the costs themselves, so no similarity bandwidth or
other kernel hyperparameter is ever tuned.

Column-normalizing the assignment matrix against its anchor degrees yields
an implicit pixel-to-pixel similarity matrix that is symmetric, positive
semidefinite, and doubly stochastic; it is only materialized densely for
desk-scale verification.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError, ParameterError
from .validation import check_finite, check_positive_int

# Largest n for which the dense similarity matrix may be materialized.
MATERIALIZE_LIMIT = 2000


@dataclass(frozen=True)
class AnchorSet:
    """m anchor spectra sampled without replacement from the pixels."""

    anchors: np.ndarray
    source_ids: np.ndarray
    seed: int

    def __post_init__(self):
        if len(np.unique(self.source_ids)) != len(self.source_ids):
            raise ParameterError("anchor source ids must be distinct")

    @property
    def m(self):
        return int(self.anchors.shape[0])


@dataclass(frozen=True)
class AnchorGraph:
    """Row-stochastic k-sparse pixel-to-anchor assignment matrix.

    Attributes
    ----------
    weights : (n, m) array
        At most k nonzeros per row; every row sums to 1.
    degrees : (m,) array
        Column sums of `weights`.
    active : (m,) bool array
        False for anchors no pixel selected (zero degree); those columns
        are dropped before any degree inversion.
    """

    weights: np.ndarray
    degrees: np.ndarray
    active: np.ndarray
    alpha: float
    k: int

    @property
    def n_pixels(self):
        return int(self.weights.shape[0])

    @property
    def n_anchors(self):
        return int(self.weights.shape[1])

    @property
    def n_active(self):
        return int(np.count_nonzero(self.active))


def sample_anchors(cube, m, seed):
    """Draw m distinct pixel rows uniformly without replacement."""
    m = check_positive_int(m, "m")
    n = cube.n_pixels
    if m > n:
        raise ParameterError(f"cannot sample {m} anchors from {n} pixels")
    rng = np.random.default_rng(seed)
    ids = rng.choice(n, size=m, replace=False)
    return AnchorSet(anchors=cube.values[ids].copy(), source_ids=ids, seed=seed)


def combined_distances(x, x_mean, anchors, alpha):
    """Squared anchor costs blending a pixel's own and neighborhood spectra.

    cost_j = ||x - u_j||^2 + alpha * ||x_mean - u_j||^2. With alpha = 0 this
    reduces to the plain spectral anchor cost.
    """
    if alpha < 0:
        raise ParameterError(f"alpha must be nonnegative, got {alpha}")
    d_own = anchors - x[None, :]
    d_mean = anchors - x_mean[None, :]
    return np.einsum("md,md->m", d_own, d_own) + alpha * np.einsum(
        "md,md->m", d_mean, d_mean
    )


def assign_row(costs, k):
    """Closed-form k-sparse simplex assignment for one cost vector.

    Sorts costs ascending (ties toward the smaller anchor index) and puts
    weight (costs[k] - costs[j]) / (k * costs[k] - sum(costs[:k])) on each
    of the k cheapest anchors. When the k+1 cheapest costs are all equal
    the ratio degenerates to 0/0; the limit is the uniform 1/k assignment,
    which is what is returned.
    """
    costs = np.asarray(costs, dtype=np.float64)
    m = costs.shape[0]
    k = check_positive_int(k, "k")
    if k >= m:
        raise ParameterError(f"k must be smaller than the anchor count ({k} >= {m})")
    check_finite(costs, "anchor costs")
    if np.any(costs < 0):
        raise DataError("anchor costs must be nonnegative")
    order = np.argsort(costs, kind="stable")
    top = order[:k]
    cutoff = costs[order[k]]
    denom = k * cutoff - costs[top].sum()
    row = np.zeros(m)
    if denom <= 0.0:
        row[top] = 1.0 / k
    else:
        row[top] = (cutoff - costs[top]) / denom
    return row


def _assign_all(costs, k):
    """Row-wise closed-form assignment, vectorized over all pixels."""
    n, m = costs.shape
    if k >= m:
        raise ParameterError(f"k must be smaller than the anchor count ({k} >= {m})")
    order = np.argsort(costs, axis=1, kind="stable")
    top = order[:, :k]
    ranked = np.take_along_axis(costs, order[:, : k + 1], axis=1)
    cutoff = ranked[:, k]
    denom = k * cutoff - ranked[:, :k].sum(axis=1)
    weights = np.zeros((n, m))
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = (cutoff[:, None] - ranked[:, :k]) / denom[:, None]
    degenerate = denom <= 0.0
    vals[degenerate] = 1.0 / k
    np.put_along_axis(weights, top, vals, axis=1)
    return weights


def build_graph(cube, summary, anchors, k, alpha):
    """Assemble the full pixel-to-anchor graph.

    Row i solves the simplex assignment over the combined costs of pixel i
    and its neighborhood mean against every anchor. Anchors that end up
    with zero degree are flagged inactive.
    """
    if alpha < 0:
        raise ParameterError(f"alpha must be nonnegative, got {alpha}")
    x = cube.values
    if summary.mean.shape != x.shape:
        raise DataError("neighbor means do not match the cube")
    costs = cdist(x, anchors.anchors, "sqeuclidean")
    if alpha > 0:
        costs = costs + alpha * cdist(summary.mean, anchors.anchors, "sqeuclidean")
    weights = _assign_all(costs, k)
    degrees = weights.sum(axis=0)
    return AnchorGraph(
        weights=weights,
        degrees=degrees,
        active=degrees > 0.0,
        alpha=float(alpha),
        k=int(k),
    )


def materialize_S(graph):
    """Densely materialize the implicit pixel similarity matrix (test-scale).

    Inactive anchor columns are dropped before inverting the degrees, which
    provably leaves the product unchanged. Guarded to small n: the whole
    point of the anchor construction is to never need this at real scale.
    """
    n = graph.n_pixels
    if n > MATERIALIZE_LIMIT:
        raise ParameterError(
            f"dense similarity materialization is limited to n <= {MATERIALIZE_LIMIT}"
        )
    z = graph.weights[:, graph.active]
    deg = graph.degrees[graph.active]
    half = z / np.sqrt(deg)[None, :]
    return half @ half.T
