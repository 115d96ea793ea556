"""Spectral embedding of the anchor graph and k-means discretization.

The pixel similarity matrix factors as the outer product of the degree-
normalized assignment matrix with itself, so its leading eigenvectors are
the leading left singular vectors of that (n x m) factor. Those are taken
from the eigendecomposition of the small (m x m) Gram matrix: the dominant
cost is one pass over the assignment matrix per component, and nothing of
size n x n is ever formed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import NumericalError, ParameterError, RankDeficiencyError
from .validation import check_positive_int

_RANK_TOL = 1e-12
KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class SpectralEmbedding:
    """Orthonormal embedding coordinates and their singular values.

    Attributes
    ----------
    coords : (n, c) array
        Columns are orthonormal; rows are per-pixel clustering coordinates.
    singular_values : (c,) array
        Descending; all within [0, 1] because the underlying similarity
        matrix is doubly stochastic.
    """

    coords: np.ndarray
    singular_values: np.ndarray


def embed(graph, n_components):
    """Top left singular subspace of the degree-normalized assignment matrix.

    Works on the m x m Gram matrix of the active anchor columns; each
    retained eigenpair is lifted back to pixel space and scaled to unit
    norm. Eigenvalues at or below the rank tolerance cannot be lifted and
    raise, naming the first deficient component. Column signs are fixed so
    the largest-magnitude entry of each column is positive.
    """
    c = check_positive_int(n_components, "n_components")
    active = graph.active
    m_active = int(np.count_nonzero(active))
    if c > m_active:
        raise ParameterError(
            f"n_components={c} exceeds the {m_active} active anchors"
        )
    z = graph.weights[:, active]
    a = z / np.sqrt(graph.degrees[active])[None, :]
    gram = a.T @ a
    eigvals, eigvecs = np.linalg.eigh(gram)
    order = np.argsort(eigvals, kind="stable")[::-1][:c]
    top_vals = eigvals[order]
    deficient = np.flatnonzero(top_vals <= _RANK_TOL)
    if deficient.size:
        raise RankDeficiencyError(int(deficient[0]))
    coords = a @ (eigvecs[:, order] / np.sqrt(top_vals)[None, :])
    flip = coords[np.abs(coords).argmax(axis=0), np.arange(c)] < 0
    coords[:, flip] *= -1.0
    return SpectralEmbedding(
        coords=coords, singular_values=np.sqrt(top_vals)
    )


def _kmeans_pp_init(points, c, rng):
    """k-means++ seeding: spread initial centers by squared distance."""
    n = points.shape[0]
    centers = np.empty((c, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    closest = cdist(points, centers[:1], "sqeuclidean").ravel()
    for j in range(1, c):
        total = closest.sum()
        if total > 0:
            probs = closest / total
            pick = int(rng.choice(n, p=probs))
        else:
            pick = int(rng.integers(n))
        centers[j] = points[pick]
        np.minimum(
            closest,
            cdist(points, centers[j : j + 1], "sqeuclidean").ravel(),
            out=closest,
        )
    return centers


def _lloyd(points, centers, max_iter):
    """Lloyd iterations until assignments stabilize; deterministic ties."""
    c = centers.shape[0]
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    for _ in range(max_iter):
        dist = cdist(points, centers, "sqeuclidean")
        new_labels = dist.argmin(axis=1)
        # revive empty clusters from the worst-served points, lowest id first
        empty = np.flatnonzero(np.bincount(new_labels, minlength=c) == 0)
        if empty.size:
            residual = dist[np.arange(points.shape[0]), new_labels]
            order = np.argsort(residual, kind="stable")[::-1]
            for rank, cluster in enumerate(empty):
                new_labels[order[rank]] = cluster
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(c):
            member = labels == j
            if member.any():
                centers[j] = points[member].mean(axis=0)
    dist = cdist(points, centers, "sqeuclidean")
    inertia = float(dist[np.arange(points.shape[0]), labels].sum())
    return labels, inertia


def kmeans(points, c, seed, restarts=10, max_iter=KMEANS_MAX_ITER):
    """Best-of-restarts k-means with k-means++ seeding.

    Deterministic for fixed (points, c, seed, restarts): each restart uses
    an independent generator derived from (seed, restart index), and exact
    inertia ties keep the earliest restart.
    """
    points = np.asarray(points, dtype=np.float64)
    c = check_positive_int(c, "c")
    if c < 2:
        raise ParameterError("c must be at least 2")
    restarts = check_positive_int(restarts, "restarts")
    if np.unique(points, axis=0).shape[0] < c:
        raise NumericalError(
            f"k-means needs at least {c} distinct rows to form {c} clusters"
        )
    best_labels, best_inertia = None, np.inf
    for r in range(restarts):
        rng = np.random.default_rng((seed, r))
        centers = _kmeans_pp_init(points, c, rng)
        labels, inertia = _lloyd(points, centers, max_iter)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels, best_inertia
