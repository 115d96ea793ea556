"""Stage-level scaling benchmark over a ladder of synthetic scene sizes.

Times every pipeline stage at each size and fits a log-log slope per stage,
making the cost decomposition directly observable: the exact pairwise
neighbor search should scale about quadratically in the pixel count, while
graph construction and the embedding stay roughly linear at a fixed anchor
count. Fast stages are repeated and the minimum is kept so the fit is not
dominated by timer noise.
"""

import time
from dataclasses import dataclass

import numpy as np

from .anchorgraph import build_graph, sample_anchors
from .data import SceneSpec, normalize_cube, synth_scene
from .filtering import multiscale_wmf
from .neighbors import build_neighbor_summary
from .pipeline import ANCHOR_SEED_OFFSET, KMEANS_SEED_OFFSET
from .spectral import embed, kmeans

DEFAULT_SIZES = (4096, 8192, 16384)
STAGES = ("filter", "neighbors", "graph", "embed", "kmeans")


@dataclass(frozen=True)
class BenchResult:
    sizes: tuple
    times: dict          # stage -> tuple of seconds, one per size
    slopes: dict         # stage -> fitted log-log slope vs n

    def table(self):
        """Plain-text table: one row per stage, one column per size."""
        header = "stage".ljust(12) + "".join(f"n={n}".rjust(14) for n in self.sizes)
        lines = [header, "-" * len(header)]
        for stage in STAGES:
            cells = "".join(f"{t:14.4f}" for t in self.times[stage])
            lines.append(stage.ljust(12) + cells)
        lines.append("")
        for stage in STAGES:
            lines.append(f"slope,{stage},{self.slopes[stage]:.3f}")
        return "\n".join(lines)


def _grid_shape(n):
    # fixed width keeps block/halo geometry identical across the ladder
    if n % 64 == 0:
        return n // 64, 64
    h = int(np.sqrt(n))
    while n % h:
        h -= 1
    return h, n // h


def _best_of(fn, repeats):
    best, result = np.inf, None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def run_benchmark(
    sizes=DEFAULT_SIZES,
    n_bands=8,
    n_anchors=64,
    n_neighbors=5,
    n_clusters=4,
    scales=(3,),
    alpha=0.6,
    gamma0=0.2,
    seed=0,
    repeats=4,
):
    """Time every stage at every size; returns a BenchResult."""
    times = {stage: [] for stage in STAGES}
    for n in sizes:
        h, w = _grid_shape(n)
        cube, _ = synth_scene(
            SceneSpec(h, w, n_bands, n_clusters, separation=0.5, noise=0.05), seed
        )
        normalized = normalize_cube(cube)

        t, stack = _best_of(
            lambda: multiscale_wmf(normalized, scales, gamma0), repeats
        )
        times["filter"].append(t)

        start = time.perf_counter()
        summary = build_neighbor_summary(normalized, stack, n_neighbors)
        times["neighbors"].append(time.perf_counter() - start)

        def graph_stage():
            anchors = sample_anchors(normalized, n_anchors, seed + ANCHOR_SEED_OFFSET)
            return build_graph(normalized, summary, anchors, n_neighbors, alpha)

        t, graph = _best_of(graph_stage, repeats)
        times["graph"].append(t)

        t, embedding = _best_of(lambda: embed(graph, n_clusters), repeats)
        times["embed"].append(t)

        start = time.perf_counter()
        kmeans(embedding.coords, n_clusters, seed + KMEANS_SEED_OFFSET, restarts=3)
        times["kmeans"].append(time.perf_counter() - start)

    log_n = np.log(np.asarray(sizes, dtype=np.float64))
    slopes = {}
    for stage in STAGES:
        stage_t = np.maximum(np.asarray(times[stage]), 1e-9)
        slopes[stage] = float(np.polyfit(log_n, np.log(stage_t), 1)[0])
    return BenchResult(
        sizes=tuple(sizes),
        times={stage: tuple(ts) for stage, ts in times.items()},
        slopes=slopes,
    )
