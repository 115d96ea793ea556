"""Small argument-checking helpers used across the package."""

import numpy as np

from .errors import DataError, ParameterError


def check_finite(values, name="values"):
    """Raise DataError if the array contains NaN or Inf."""
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise DataError(f"{name} contains non-finite entries")
    return values


def check_positive_int(value, name):
    if int(value) != value or value < 1:
        raise ParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_odd_window(w, name="window"):
    """Windows are odd so they center on a pixel; 1 is allowed for patches."""
    w = int(w)
    if w < 1 or w % 2 == 0:
        raise ParameterError(f"{name} must be a positive odd integer, got {w}")
    return w


def check_scales(scales):
    """Filter scales must be odd and at least 3."""
    scales = [int(s) for s in scales]
    if not scales:
        raise ParameterError("scales must be a nonempty list of odd integers >= 3")
    for s in scales:
        if s < 3 or s % 2 == 0:
            raise ParameterError(f"every scale must be an odd integer >= 3, got {s}")
    return scales


def check_labels_vector(labels, n=None, name="labels"):
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DataError(f"{name} must be a 1-D integer vector")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == labels.astype(np.int64)):
            raise DataError(f"{name} must contain integers")
        labels = labels.astype(np.int64)
    if n is not None and labels.shape[0] != n:
        raise DataError(f"{name} has length {labels.shape[0]}, expected {n}")
    return labels.astype(np.int64, copy=False)
