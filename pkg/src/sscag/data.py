"""Core data types for hyperspectral scenes plus a synthetic-scene generator.

A scene is an H x W grid of pixels, each a d-band spectral vector. Pixels are
stored row-major as an (n, d) matrix with n = H * W, so pixel (r, c) lives at
flat index r * W + c. All indices are 0-based internally; rendered reports and
saved label files use 1-based cluster ids.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .validation import check_finite, check_labels_vector, check_positive_int


@dataclass(frozen=True)
class HsiCube:
    """A hyperspectral cube: (n, d) float64 matrix of row-major pixels.

    Attributes
    ----------
    height, width : int
        Spatial grid shape in pixels.
    values : ndarray of shape (height * width, bands)
        Finite reflectance values, one row per pixel.
    """

    height: int
    width: int
    values: np.ndarray

    def __post_init__(self):
        check_positive_int(self.height, "height")
        check_positive_int(self.width, "width")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError("cube values must be a 2-D (pixels, bands) matrix")
        if values.shape[0] != self.height * self.width:
            raise DataError(
                f"cube has {values.shape[0]} pixel rows, "
                f"expected {self.height}x{self.width}={self.height * self.width}"
            )
        if values.shape[1] < 1:
            raise DataError("cube needs at least one spectral band")
        check_finite(values, "cube values")
        values = np.array(values, dtype=np.float64)  # own, frozen copy
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_pixels(self):
        return self.height * self.width

    @property
    def n_bands(self):
        return int(self.values.shape[1])

    @classmethod
    def from_image(cls, image):
        """Build a cube from an (H, W, d) array."""
        image = np.asarray(image, dtype=np.float64)
        if image.ndim != 3:
            raise DataError("expected an (H, W, d) array")
        h, w, d = image.shape
        return cls(h, w, image.reshape(h * w, d))

    def to_image(self):
        return self.values.reshape(self.height, self.width, self.n_bands)


@dataclass(frozen=True)
class GroundTruth:
    """Per-pixel class labels; 0 marks unlabeled background pixels."""

    labels: np.ndarray
    height: int = 0
    width: int = 0

    def __post_init__(self):
        labels = check_labels_vector(self.labels, name="ground-truth labels")
        if labels.size == 0:
            raise DataError("ground truth must cover at least one pixel")
        if labels.min() < 0:
            raise DataError("ground-truth labels must be >= 0")
        top = int(labels.max())
        present = np.unique(labels)
        missing = [k for k in range(1, top + 1) if k not in present]
        if missing:
            raise DataError(f"ground truth is missing class ids {missing}")
        labels = np.array(labels)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def n_classes(self):
        """Number of labeled classes (background id 0 excluded)."""
        return int(self.labels.max())

    @property
    def mask(self):
        """Boolean foreground mask: True where a pixel carries a class label."""
        return self.labels > 0


@dataclass(frozen=True)
class ClusteringResult:
    """Output of a clustering run: 1-based labels plus run metadata."""

    labels: np.ndarray
    embedding: np.ndarray
    params: dict
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = check_labels_vector(self.labels, name="cluster labels")
        if labels.min() < 1:
            raise DataError("cluster labels are 1-based; got a label < 1")
        labels = np.array(labels)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)


def normalize_cube(cube):
    """Min-max scale every band of a cube into [0, 1].

    Each band is scaled independently so relative band shapes survive.
    A constant band maps to all zeros instead of raising, which keeps the
    pipeline total on degenerate synthetic inputs. Idempotent.
    """
    values = cube.values
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = (values - lo) / safe
    out[:, span == 0] = 0.0
    return HsiCube(cube.height, cube.width, out)


def build_coordinates(height, width):
    """Return the (2, n) matrix of pixel coordinates normalized into [0, 1].

    Column i holds (row_i, col_i) of the i-th row-major pixel, with rows
    divided by max(height - 1, 1) and columns by max(width - 1, 1) so a
    single-row or single-column grid maps onto the degenerate axis at 0.
    """
    height = check_positive_int(height, "height")
    width = check_positive_int(width, "width")
    rows, cols = np.divmod(np.arange(height * width), width)
    coords = np.empty((2, height * width), dtype=np.float64)
    coords[0] = rows / max(height - 1, 1)
    coords[1] = cols / max(width - 1, 1)
    return coords


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for a synthetic block scene used in desk-scale testing.

    The grid is partitioned into n_classes contiguous rectangular regions.
    Class spectra sit at 0.5 +/- separation/2 on a few coding bands, so the
    minimum pairwise distance between class spectra is exactly `separation`.
    """

    height: int
    width: int
    n_bands: int
    n_classes: int
    separation: float = 0.5
    noise: float = 0.05
    background_fraction: float = 0.0

    def __post_init__(self):
        check_positive_int(self.height, "height")
        check_positive_int(self.width, "width")
        check_positive_int(self.n_bands, "n_bands")
        check_positive_int(self.n_classes, "n_classes")
        if self.separation < 0 or self.noise < 0:
            raise DataError("separation and noise must be nonnegative")
        if not 0 <= self.background_fraction < 1:
            raise DataError("background_fraction must be in [0, 1)")


def _class_spectra(n_classes, n_bands, separation):
    """Deterministic class spectra with min pairwise L2 gap = separation."""
    n_bits = max(int(np.ceil(np.log2(n_classes))), 0) if n_classes > 1 else 0
    if n_bits > n_bands:
        raise DataError(
            f"cannot encode {n_classes} classes on {n_bands} bands"
        )
    spectra = np.full((n_classes, n_bands), 0.5)
    for k in range(n_classes):
        for b in range(n_bits):
            bit = (k >> b) & 1
            spectra[k, b] = 0.5 + (separation / 2.0) * (1 if bit else -1)
    return spectra


def _block_layout(height, width, n_classes):
    """Assign each pixel to one of n_classes contiguous rectangular regions."""
    g_cols = int(np.ceil(np.sqrt(n_classes)))
    g_rows = int(np.ceil(n_classes / g_cols))
    if g_rows > height or g_cols > width:
        # fall back to strips along the longer axis, then row-major runs
        if n_classes <= max(height, width):
            if height >= width:
                g_rows, g_cols = n_classes, 1
            else:
                g_rows, g_cols = 1, n_classes
        else:
            flat = (np.arange(height * width) * n_classes) // (height * width)
            return flat.astype(np.int64)
    row_band = (np.arange(height) * g_rows) // height
    col_band = (np.arange(width) * g_cols) // width
    region = row_band[:, None] * g_cols + col_band[None, :]
    return np.minimum(region, n_classes - 1).ravel().astype(np.int64)


def synth_scene(spec, seed):
    """Generate a synthetic scene and its ground truth.

    Deterministic for a fixed (spec, seed): every region's pixels equal the
    class spectrum plus i.i.d. Gaussian noise of scale ``spec.noise``.
    An optional fraction of pixels is relabeled 0 (background); each class
    always keeps at least one labeled pixel.

    Returns
    -------
    (HsiCube, GroundTruth)
    """
    n = spec.height * spec.width
    if spec.n_classes > n:
        raise DataError(
            f"cannot place {spec.n_classes} classes on {n} pixels"
        )
    rng = np.random.default_rng(seed)
    spectra = _class_spectra(spec.n_classes, spec.n_bands, spec.separation)
    region = _block_layout(spec.height, spec.width, spec.n_classes)
    values = spectra[region] + spec.noise * rng.standard_normal((n, spec.n_bands))
    labels = region + 1
    if spec.background_fraction > 0:
        n_bg = int(np.floor(spec.background_fraction * n))
        bg = rng.choice(n, size=n_bg, replace=False)
        labels = labels.copy()
        labels[bg] = 0
        for k in range(1, spec.n_classes + 1):
            if not np.any(labels == k):
                labels[np.flatnonzero(region == k - 1)[0]] = k
    cube = HsiCube(spec.height, spec.width, values)
    gt = GroundTruth(labels, spec.height, spec.width)
    return cube, gt
