"""Spatial-spectral neighbor discovery.

The distance from pixel i to pixel j compares i's local patch (the raw
window pixels around i, center included) against j's filtered spectrum,
weighting each patch pixel by a spatial kernel centered on j's coordinates.
Because the patch belongs to i while the filtered value belongs to j, the
distance is NOT symmetric.

Per filter scale, each pixel's k nearest candidates are found; the per-scale
lists are then pooled across scales (deduplicating by keeping the minimum
distance) and cut back to the overall k nearest. Ties always break toward
the smaller pixel index so results are fully deterministic.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial.distance import cdist

from .data import build_coordinates
from .errors import ParameterError
from .validation import check_odd_window, check_positive_int

# Memory ceiling (elements) for one (pixels, patch, candidates) block, and
# the preferred block size in center pixels. A fixed block size keeps the
# halo overhead per candidate constant across image sizes, so stage timings
# scale cleanly.
_BLOCK_BUDGET = 24_000_000
_BLOCK_TARGET = 128


@dataclass(frozen=True)
class NeighborSummary:
    """Pooled spatial-spectral neighbors for every pixel.

    Attributes
    ----------
    ids : (n, k) int array
        Neighbor pixel indices, ordered by ascending distance.
    distances : (n, k) array
        The pooled distances, sorted ascending per pixel.
    mean : (n, d) array
        Arithmetic mean of the k neighbors' raw (normalized) spectra.
    """

    ids: np.ndarray
    distances: np.ndarray
    mean: np.ndarray


def _patch_indices(index, window, height, width):
    """Row-major window indices around a pixel, center included, clipped."""
    t = (window - 1) // 2
    r, c = divmod(int(index), width)
    rows = range(max(r - t, 0), min(r + t, height - 1) + 1)
    cols = range(max(c - t, 0), min(c + t, width - 1) + 1)
    return [rr * width + cc for rr in rows for cc in cols]


def points_rows(height, width):
    """Integer (row, col) arrays for every row-major pixel."""
    return np.divmod(np.arange(height * width), width)


def ssdm_distance(i, j, raw, filtered, coords, window):
    """Spatial-spectral distance from pixel i's patch to pixel j.

    Patch pixels come from the raw normalized cube; the target spectrum is
    pixel j of the filtered cube. Spatial weights use a Gaussian kernel whose
    bandwidth is the mean patch-to-j coordinate distance, so the kernel
    adapts to how far the patch sits from j. Returns 0 for the degenerate
    single-pixel self case where that bandwidth collapses.
    """
    window = check_odd_window(window)
    patch = _patch_indices(i, window, raw.height, raw.width)
    spatial = np.linalg.norm(coords[:, patch] - coords[:, [j]], axis=0)
    sigma = spatial.mean()
    if sigma == 0.0:
        return 0.0
    weights = np.exp(-((spatial / sigma) ** 2))
    weights /= weights.sum()
    diff = raw.values[patch] - filtered.values[j][None, :]
    spectral = np.sqrt((diff * diff).sum(axis=1))
    return float(weights @ spectral)


def _k_smallest(distances, k):
    """Indices of the k smallest entries, ties broken by smaller index."""
    finite = np.flatnonzero(np.isfinite(distances))
    if finite.size < k:
        raise ParameterError(
            f"need at least {k} candidates, only {finite.size} available"
        )
    kth = np.partition(distances[finite], k - 1)[k - 1]
    cand = finite[distances[finite] <= kth]
    order = np.lexsort((cand, distances[cand]))[:k]
    chosen = cand[order]
    return chosen, distances[chosen]


def knn_per_scale(i, raw, filtered, k, window, radius=0, coords=None):
    """k nearest spatial-spectral neighbors of one pixel at one scale.

    Candidates are every other pixel (exact mode, radius=0) or the pixels
    within Chebyshev distance `radius` of i (pruned mode). Returns
    (ids, distances) with distances ascending, index ties toward smaller id.
    """
    check_positive_int(k, "k")
    h, w = raw.height, raw.width
    if coords is None:
        coords = build_coordinates(h, w)
    r, c = divmod(int(i), w)
    dist = np.full(h * w, np.inf)
    if radius <= 0:
        r0, r1, c0, c1 = 0, h, 0, w
    else:
        r0, r1 = max(r - radius, 0), min(r + radius, h - 1) + 1
        c0, c1 = max(c - radius, 0), min(c + radius, w - 1) + 1
    for rr in range(r0, r1):
        for cc in range(c0, c1):
            j = rr * w + cc
            if j == i:
                continue
            dist[j] = ssdm_distance(i, j, raw, filtered, coords, window)
    return _k_smallest(dist, k)


def _offset_distance_slider(height, width):
    """Sliding view over the normalized-coordinate offset-distance table.

    All patch-to-candidate spatial distances are grid translates, so they
    are read from one (2H-1, 2W-1) table of |offset| distances instead of
    being recomputed: the crop for pixel (r, c) starts at (H-1-r, W-1-c).
    """
    dr = np.arange(-(height - 1), height) / max(height - 1, 1)
    dc = np.arange(-(width - 1), width) / max(width - 1, 1)
    table = np.sqrt(dr[:, None] ** 2 + dc[None, :] ** 2)
    return sliding_window_view(table, (height, width))


def _block_patches(start, stop, window, height, width):
    """Padded patch-index matrix and validity mask for a run of pixels.

    Padding repeats the center index (always inside the block's halo);
    padded entries are masked out of every reduction.
    """
    size = min(window, height) * min(window, width)
    idx = np.repeat(
        np.arange(start, stop, dtype=np.int64)[:, None], size, axis=1
    )
    mask = np.zeros((stop - start, size), dtype=bool)
    for bi, i in enumerate(range(start, stop)):
        patch = _patch_indices(i, window, height, width)
        idx[bi, : len(patch)] = patch
        mask[bi, : len(patch)] = True
    return idx, mask


def knn_all_pixels(raw, filtered, k, window, radius=0):
    """Vectorized k-nearest search for every pixel at one scale.

    Matches knn_per_scale pixel for pixel, but runs blocked: spectral
    distances are computed once per halo row band (neighboring patches
    share most pixels) and spatial distances come from the offset table.
    Returns (ids, distances) arrays of shape (n, k).
    """
    check_positive_int(k, "k")
    window = check_odd_window(window)
    h, w = raw.height, raw.width
    n = h * w
    ids = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k))
    all_r, all_c = points_rows(h, w)

    if window == 1:
        # patch = center pixel: the kernel weight cancels exactly
        block = max(1, _BLOCK_BUDGET // n)
        for start in range(0, n, block):
            stop = min(start + block, n)
            d = cdist(raw.values[start:stop], filtered.values)
            d[np.arange(stop - start), np.arange(start, stop)] = np.inf
            _prune(d, all_r, all_c, start, stop, radius)
            for bi in range(stop - start):
                ids[start + bi], dists[start + bi] = _k_smallest(d[bi], k)
        return ids, dists

    t = (window - 1) // 2
    slider = _offset_distance_slider(h, w)
    patch_size = min(window, h) * min(window, w)
    block = min(_BLOCK_TARGET, max(1, _BLOCK_BUDGET // (patch_size * n)))
    for start in range(0, n, block):
        stop = min(start + block, n)
        b = stop - start
        patch_idx, patch_mask = _block_patches(start, stop, window, h, w)
        # halo: the row band containing every patch pixel of this block
        row_lo = max(all_r[start] - t, 0)
        row_hi = min(all_r[stop - 1] + t, h - 1)
        halo = slice(row_lo * w, (row_hi + 1) * w)
        local = patch_idx - row_lo * w
        spec_halo = cdist(raw.values[halo], filtered.values)
        spat_halo = slider[
            h - 1 - all_r[halo], w - 1 - all_c[halo]
        ].reshape(-1, n)

        spectral = spec_halo[local]
        spatial = spat_halo[local]
        pad = ~patch_mask
        spatial[pad] = 0.0
        sigma = spatial.sum(axis=1)
        sigma /= patch_mask.sum(axis=1)[:, None]
        # turn `spatial` into the kernel weights in place
        with np.errstate(divide="ignore", invalid="ignore"):
            np.divide(spatial, sigma[:, None, :], out=spatial)
            np.multiply(spatial, spatial, out=spatial)
            np.negative(spatial, out=spatial)
            np.exp(spatial, out=spatial)
        spatial[pad] = 0.0
        num = np.einsum("bpn,bpn->bn", spatial, spectral)
        with np.errstate(invalid="ignore"):
            block_dist = num / spatial.sum(axis=1)
        block_dist[~np.isfinite(block_dist)] = 0.0  # collapsed-bandwidth self case
        block_dist[np.arange(b), np.arange(start, stop)] = np.inf
        _prune(block_dist, all_r, all_c, start, stop, radius)
        for bi in range(b):
            ids[start + bi], dists[start + bi] = _k_smallest(block_dist[bi], k)
    return ids, dists


def _prune(block_dist, all_r, all_c, start, stop, radius):
    """Mask candidates outside the Chebyshev candidate window, in place."""
    if radius <= 0:
        return
    rows = slice(start, stop)
    out = (np.abs(all_r[None, :] - all_r[rows, None]) > radius) | (
        np.abs(all_c[None, :] - all_c[rows, None]) > radius
    )
    block_dist[out] = np.inf


def pool_scales(per_scale, k):
    """Merge one (ids, distances) pair per scale into the overall k nearest.

    Duplicated pixel ids keep their minimum distance across scales; the k
    smallest survive, ties broken by smaller pixel index.
    """
    check_positive_int(k, "k")
    best = {}
    for ids, dist in per_scale:
        for j, d in zip(ids, dist):
            j = int(j)
            if j not in best or d < best[j]:
                best[j] = float(d)
    if len(best) < k:
        raise ParameterError(
            f"pooled neighbor set has {len(best)} candidates, need {k}"
        )
    merged = sorted(best.items(), key=lambda item: (item[1], item[0]))[:k]
    ids = np.array([j for j, _ in merged], dtype=np.int64)
    dist = np.array([d for _, d in merged])
    return ids, dist


def build_neighbor_summary(raw, stack, k, radius=0):
    """Run the per-scale searches, pool them, and average neighbor spectra."""
    per_scale = [
        knn_all_pixels(raw, cube, k, scale, radius=radius)
        for scale, cube in zip(stack.scales, stack.cubes)
    ]
    n = raw.n_pixels
    ids = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k))
    for i in range(n):
        ids[i], dists[i] = pool_scales(
            [(s_ids[i], s_dist[i]) for s_ids, s_dist in per_scale], k
        )
    mean = raw.values[ids].mean(axis=1)
    return NeighborSummary(ids=ids, distances=dists, mean=mean)
