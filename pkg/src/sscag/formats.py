"""On-disk formats: HSIC binary cubes, CSV/PGM ground truth, CSV labels, PPM maps.

The HSIC cube format is purpose-built so round trips are bit-exact:

    bytes 0..3    magic "HSIC"
    bytes 4..7    version, unsigned 32-bit little-endian, currently 1
    bytes 8..19   H, W, d as unsigned 32-bit little-endian
    bytes 20..    H*W*d IEEE-754 binary32 little-endian values, pixel-major
                  (pixel 0 bands 0..d-1, then pixel 1, ...)

Ground truth comes either as a CSV of H rows x W integer columns or as a
binary PGM ("P5", maxval <= 65535). Label output is CSV plus a plain-text
run-metadata sidecar; cluster maps are binary PPM ("P6") with a fixed
16-entry palette so visual diffs across runs are meaningful.
"""

import os
import struct

import numpy as np

from .data import GroundTruth, HsiCube
from .errors import DataError, FormatError
from .validation import check_labels_vector

_MAGIC = b"HSIC"
_VERSION = 1
_HEADER = struct.Struct("<4sIIII")

# Fixed render palette: background is always (0, 0, 0); labels cycle through
# these 16 colors as palette[(label - 1) % 16].
PALETTE = (
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255),
    (170, 110, 40), (255, 250, 200), (128, 0, 0), (170, 255, 195),
)


def save_cube(cube, path):
    """Write a cube in HSIC format; load_cube(save_cube(x)) is bit-exact."""
    payload = cube.values.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, cube.height, cube.width, cube.n_bands))
        fh.write(payload)


def load_cube(path):
    """Read an HSIC cube, validating magic, version, and payload size."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError(f"{path}: truncated header", offset=len(head))
        magic, version, h, w, d = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}", offset=0)
        if version != _VERSION:
            raise FormatError(f"{path}: unsupported version {version}", offset=4)
        expected = h * w * d * 4
        payload = fh.read(expected + 1)
    if len(payload) < expected:
        raise FormatError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}",
            offset=_HEADER.size + len(payload),
        )
    if len(payload) > expected:
        raise FormatError(
            f"{path}: trailing bytes after payload", offset=_HEADER.size + expected
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(h * w, d)
    return HsiCube(h, w, values.astype(np.float64))


def load_raw_cube(path, height, width, n_bands, dtype="<f4"):
    """Convert a headerless raw cube (BIP interleave) into an HsiCube.

    For real datasets shipped as bare binary: the caller supplies the grid
    shape and band count; samples are band-interleaved-by-pixel.
    """
    expected = height * width * n_bands * np.dtype(dtype).itemsize
    size = os.path.getsize(path)
    if size != expected:
        raise FormatError(
            f"{path}: file has {size} bytes, expected {expected} "
            f"for {height}x{width}x{n_bands} {np.dtype(dtype).name}"
        )
    values = np.fromfile(path, dtype=dtype).reshape(height * width, n_bands)
    return HsiCube(height, width, values.astype(np.float64))


def _parse_pgm_tokens(data, path, count):
    """Pull `count` whitespace/comment-delimited header tokens after the magic."""
    tokens = []
    pos = 2  # past "P5"
    while len(tokens) < count:
        if pos >= len(data):
            raise FormatError(f"{path}: truncated PGM header", offset=pos)
        ch = data[pos:pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    return tokens, pos + 1  # single whitespace byte after maxval


def _load_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5)", offset=0)
    tokens, start = _parse_pgm_tokens(data, path, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"{path}: non-numeric PGM header") from None
    if maxval < 1 or maxval > 65535:
        raise FormatError(f"{path}: PGM maxval {maxval} out of range")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = height * width * dtype.itemsize
    payload = data[start:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: PGM payload has {len(payload)} bytes, expected {expected}",
            offset=start + min(len(payload), expected),
        )
    labels = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    return labels, height, width


def _load_gt_csv(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([int(tok) for tok in line.split(",")])
            except ValueError:
                raise FormatError(
                    f"{path}: non-integer entry on line {line_no}"
                ) from None
    if not rows:
        raise FormatError(f"{path}: empty ground-truth CSV")
    width = len(rows[0])
    for line_no, row in enumerate(rows, start=1):
        if len(row) != width:
            raise FormatError(
                f"{path}: row {line_no} has {len(row)} columns, expected {width}"
            )
    return np.asarray(rows, dtype=np.int64).ravel(), len(rows), width


def load_ground_truth(path, cube=None):
    """Load ground truth from CSV (H rows x W int columns) or binary PGM.

    The flattening is row-major, matching HsiCube pixel order. When a
    companion cube is given, mismatched dimensions raise a shape error.
    """
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P5":
        labels, height, width = _load_pgm(path)
    else:
        labels, height, width = _load_gt_csv(path)
    if cube is not None and (height, width) != (cube.height, cube.width):
        raise DataError(
            f"{path}: ground truth is {height}x{width} but cube is "
            f"{cube.height}x{cube.width}"
        )
    return GroundTruth(labels, height, width)


def save_ground_truth(gt, path):
    """Write ground truth as a binary PGM (P5), 1 byte/sample when it fits."""
    top = int(gt.labels.max())
    if top > 65535:
        raise DataError("PGM ground truth supports labels up to 65535")
    maxval = max(top, 1)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    header = f"P5\n{gt.width} {gt.height}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(gt.labels.astype(dtype).tobytes())


def save_labels(result, path, metrics=None):
    """Write labels as CSV plus a `<path>.meta.txt` run-metadata sidecar.

    The CSV has one `pixel_index,label` line per pixel after a header line.
    The sidecar records parameters, seed, per-stage timings, and (when
    ground truth was available) `metric,value` lines.
    """
    labels = result.labels
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pixel_index,label\n")
        for i, lab in enumerate(labels):
            fh.write(f"{i},{lab}\n")
    sidecar = f"{path}.meta.txt"
    with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# parameters\n")
        for key in sorted(result.params):
            fh.write(f"{key},{result.params[key]}\n")
        fh.write("# timings (seconds)\n")
        for key, value in result.timings.items():
            fh.write(f"{key},{value:.6f}\n")
        if metrics:
            fh.write("# metrics\n")
            for key, value in metrics.items():
                fh.write(f"{key},{value}\n")


def load_labels(path):
    """Read a labels CSV written by save_labels back into a vector."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("pixel_index"):
                continue
            try:
                idx, lab = (int(tok) for tok in line.split(","))
            except ValueError:
                raise FormatError(
                    f"{path}: malformed label line {line_no}"
                ) from None
            pairs.append((idx, lab))
    if not pairs:
        raise FormatError(f"{path}: no label rows")
    pairs.sort()
    indices = np.array([p[0] for p in pairs])
    if not np.array_equal(indices, np.arange(len(pairs))):
        raise FormatError(f"{path}: pixel indices are not 0..n-1")
    return np.array([p[1] for p in pairs], dtype=np.int64)


def render_map(labels, height, width, path, gt_mask=None):
    """Render a cluster map as binary PPM (P6).

    Pixels where gt_mask is 0/False are drawn black; labels 1..c take
    colors from the fixed palette, cycling when c > 16. Deterministic:
    the same labels and mask always produce a bit-identical file.
    """
    labels = check_labels_vector(labels, n=height * width, name="labels")
    rgb = np.zeros((height * width, 3), dtype=np.uint8)
    fg = np.ones(height * width, dtype=bool) if gt_mask is None else (
        np.asarray(gt_mask).ravel().astype(bool)
    )
    if fg.shape[0] != height * width:
        raise DataError("gt_mask length does not match the image")
    palette = np.asarray(PALETTE, dtype=np.uint8)
    keep = fg & (labels > 0)
    rgb[keep] = palette[(labels[keep] - 1) % len(palette)]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rgb.tobytes())
