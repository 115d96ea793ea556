"""Weighted mean filtering over square spatial windows, single- and multiscale.

Each pixel is replaced by a spectral-similarity-weighted mean of itself and
its window neighbors: neighbor weights fall off as exp(-gamma0 * squared
spectral distance), so dissimilar pixels (likely other classes) barely
contribute. Windows are clipped at image borders rather than padded, which
avoids phantom values biasing the mean. Multiscale runs filter the original
cube once per window size; scales are parallel views, never cascaded.
"""

from dataclasses import dataclass

import numpy as np

from .data import HsiCube
from .errors import ParameterError
from .validation import check_odd_window, check_scales

DEFAULT_GAMMA0 = 0.2
DEFAULT_SCALES = (3, 7, 11, 15)


@dataclass(frozen=True)
class FilterParams:
    """Window size (odd, >= 3) and filter strength gamma0 (> 0)."""

    window: int
    gamma0: float = DEFAULT_GAMMA0

    def __post_init__(self):
        w = check_odd_window(self.window)
        if w < 3:
            raise ParameterError(f"filter window must be >= 3, got {w}")
        if self.gamma0 <= 0:
            raise ParameterError(f"gamma0 must be positive, got {self.gamma0}")

    @property
    def half(self):
        return (self.window - 1) // 2


@dataclass(frozen=True)
class FilteredStack:
    """One filtered cube per window scale, all sharing the source geometry."""

    scales: tuple
    cubes: tuple

    def __post_init__(self):
        if len(self.scales) != len(self.cubes):
            raise ParameterError("one cube per scale required")
        shapes = {(c.height, c.width, c.n_bands) for c in self.cubes}
        if len(shapes) > 1:
            raise ParameterError("all cubes in a stack must share (H, W, d)")


def window_neighbors(index, window, height, width):
    """Indices of the window neighbors of a pixel, row-major, center excluded.

    The window is clipped at image borders, so border pixels have fewer than
    window**2 - 1 neighbors.
    """
    window = check_odd_window(window)
    t = (window - 1) // 2
    r, c = divmod(int(index), width)
    rows = range(max(r - t, 0), min(r + t, height - 1) + 1)
    cols = range(max(c - t, 0), min(c + t, width - 1) + 1)
    return [rr * width + cc for rr in rows for cc in cols if (rr, cc) != (r, c)]


def wmf(cube, params):
    """Apply one weighted-mean-filter pass.

    Every output value is a convex combination of the window's input values,
    so band-wise bounds are preserved. A pixel with no neighbors (1x1 image)
    maps to itself.
    """
    h, w, d = cube.height, cube.width, cube.n_bands
    x = cube.to_image()
    num = x.copy()
    den = np.ones((h, w))
    t = params.half
    for dr in range(-t, t + 1):
        for dc in range(-t, t + 1):
            if dr == 0 and dc == 0:
                continue
            # centers whose neighbor (r+dr, c+dc) stays in bounds
            r0, r1 = max(-dr, 0), h + min(-dr, 0)
            if r0 >= r1:
                continue
            c0, c1 = max(-dc, 0), w + min(-dc, 0)
            if c0 >= c1:
                continue
            center = x[r0:r1, c0:c1]
            neighbor = x[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
            diff = center - neighbor
            weight = np.exp(-params.gamma0 * np.einsum("ijk,ijk->ij", diff, diff))
            num[r0:r1, c0:c1] += weight[..., None] * neighbor
            den[r0:r1, c0:c1] += weight
    return HsiCube(h, w, (num / den[..., None]).reshape(h * w, d))


def multiscale_wmf(cube, scales=DEFAULT_SCALES, gamma0=DEFAULT_GAMMA0):
    """Filter the original cube independently at every window scale."""
    scales = tuple(check_scales(scales))
    cubes = tuple(wmf(cube, FilterParams(s, gamma0)) for s in scales)
    return FilteredStack(scales, cubes)
