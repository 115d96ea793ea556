"""Command-line interface: cluster, synth, eval, and bench subcommands.

Every command is deterministic given its flags and seed; rerunning writes
byte-identical label and map files (the metadata sidecar contains timings
and is excluded from that guarantee). Exit codes: 0 success, 2 usage error,
3 data/format error, 4 numerical error. Failures print a single
machine-parsable line to stderr: ``sscag: error: <kind>: <message>``.
"""

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .bench import DEFAULT_SIZES, run_benchmark
from .data import SceneSpec, synth_scene
from .errors import SscagError
from .filtering import DEFAULT_GAMMA0, DEFAULT_SCALES
from .formats import (
    load_cube,
    load_ground_truth,
    load_labels,
    render_map,
    save_cube,
    save_ground_truth,
    save_labels,
)
from .metrics import evaluate
from .pipeline import PipelineParams, run_sscag


def _scales(text):
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad scales list: {text!r}") from None


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sscag",
        description="Spatial-spectral anchor-graph clustering for hyperspectral cubes.",
    )
    parser.add_argument("--version", action="version", version=f"sscag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    cluster = sub.add_parser("cluster", help="cluster an HSIC cube")
    cluster.add_argument("--input", required=True, help="HSIC cube path")
    cluster.add_argument("--ground-truth", help="CSV or PGM ground truth (optional)")
    cluster.add_argument("--clusters", type=int, required=True, metavar="C")
    cluster.add_argument("--anchors", type=int, required=True, metavar="M")
    cluster.add_argument("--alpha", type=float, required=True)
    cluster.add_argument("--neighbors", type=int, default=5, metavar="K")
    cluster.add_argument("--gamma0", type=float, default=DEFAULT_GAMMA0)
    cluster.add_argument(
        "--scales", type=_scales,
        default=DEFAULT_SCALES,
        help="comma-separated odd window sizes (default 3,7,11,15)",
    )
    cluster.add_argument("--seed", type=int, default=0)
    cluster.add_argument("--restarts", type=int, default=10)
    cluster.add_argument(
        "--candidate-window", type=int, default=0, metavar="R",
        help="neighbor candidate radius in pixels; 0 = exact search",
    )
    cluster.add_argument("--threads", type=int, default=0, help="cap worker threads")
    cluster.add_argument("--out-dir", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic scene")
    synth.add_argument("--height", type=int, required=True)
    synth.add_argument("--width", type=int, required=True)
    synth.add_argument("--bands", type=int, required=True)
    synth.add_argument("--classes", type=int, required=True)
    synth.add_argument("--delta", type=float, default=0.5, help="class spectra separation")
    synth.add_argument("--noise", type=float, default=0.05)
    synth.add_argument("--background", type=float, default=0.0,
                       help="fraction of pixels left unlabeled")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out-cube", required=True)
    synth.add_argument("--out-gt", required=True)

    ev = sub.add_parser("eval", help="score a label file against ground truth")
    ev.add_argument("--labels", required=True)
    ev.add_argument("--ground-truth", required=True)

    bench = sub.add_parser("bench", help="stage timing ladder and scaling slopes")
    bench.add_argument(
        "--sizes", type=_scales, default=DEFAULT_SIZES,
        help="comma-separated pixel counts (default 4096,8192,16384)",
    )
    bench.add_argument("--bands", type=int, default=8)
    bench.add_argument("--anchors", type=int, default=64)
    bench.add_argument("--neighbors", type=int, default=5)
    bench.add_argument("--clusters", type=int, default=4)
    bench.add_argument("--scales", type=_scales, default=(3,))
    bench.add_argument("--alpha", type=float, default=0.6)
    bench.add_argument("--gamma0", type=float, default=DEFAULT_GAMMA0)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--threads", type=int, default=0)
    return parser


def _thread_cap(args):
    cap = getattr(args, "threads", 0) or 0
    if not cap:
        cap = int(os.environ.get("SSCAG_THREADS", "0") or 0)
    return cap


class _limit_threads:
    """Apply a BLAS/worker thread cap for the duration of a command."""

    def __init__(self, cap):
        self.cap = cap
        self._ctl = None

    def __enter__(self):
        if self.cap > 0:
            from threadpoolctl import threadpool_limits

            self._ctl = threadpool_limits(limits=self.cap)
        return self

    def __exit__(self, *exc):
        if self._ctl is not None:
            self._ctl.__exit__(*exc)
        return False


def _cmd_cluster(args):
    in_path = Path(args.input)
    if not in_path.exists():
        print(f"sscag: error: data: input file not found: {in_path}", file=sys.stderr)
        return 3
    cube = load_cube(in_path)
    gt = None
    if args.ground_truth:
        gt = load_ground_truth(args.ground_truth, cube=cube)
    params = PipelineParams(
        n_clusters=args.clusters,
        n_anchors=args.anchors,
        n_neighbors=args.neighbors,
        alpha=args.alpha,
        gamma0=args.gamma0,
        scales=args.scales,
        seed=args.seed,
        restarts=args.restarts,
        candidate_window=args.candidate_window,
    )
    result = run_sscag(cube, params, gt=gt)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = None
    if gt is not None:
        scores = evaluate(result.labels, gt)
        metrics = {key: scores[key] for key in ("oa", "aa", "kappa")}
        if scores["kappa_negative"]:
            metrics["kappa_negative"] = True
    save_labels(result, out_dir / "labels.csv", metrics=metrics)
    mask = gt.mask if gt is not None else None
    render_map(result.labels, cube.height, cube.width, out_dir / "map.ppm", gt_mask=mask)
    if metrics:
        for key, value in metrics.items():
            print(f"{key},{value}")
    print(f"wrote {out_dir / 'labels.csv'} and {out_dir / 'map.ppm'}")
    return 0


def _cmd_synth(args):
    spec = SceneSpec(
        height=args.height,
        width=args.width,
        n_bands=args.bands,
        n_classes=args.classes,
        separation=args.delta,
        noise=args.noise,
        background_fraction=args.background,
    )
    cube, gt = synth_scene(spec, args.seed)
    save_cube(cube, args.out_cube)
    save_ground_truth(gt, args.out_gt)
    print(f"wrote {args.out_cube} and {args.out_gt}")
    return 0


def _cmd_eval(args):
    labels = load_labels(args.labels)
    gt = load_ground_truth(args.ground_truth)
    if gt.labels.shape[0] != labels.shape[0]:
        print(
            "sscag: error: data: label file covers "
            f"{labels.shape[0]} pixels, ground truth {gt.labels.shape[0]}",
            file=sys.stderr,
        )
        return 3
    scores = evaluate(labels, gt)
    print(f"oa,{scores['oa']:.6f}")
    print(f"aa,{scores['aa']:.6f}")
    print(f"kappa,{scores['kappa']:.6f}")
    if scores["kappa_negative"]:
        print("warning,kappa below chance level")
    for cluster, target in sorted(scores["mapping"].items()):
        print(f"mapping,{cluster},{'none' if target is None else target}")
    return 0


def _cmd_bench(args):
    result = run_benchmark(
        sizes=args.sizes,
        n_bands=args.bands,
        n_anchors=args.anchors,
        n_neighbors=args.neighbors,
        n_clusters=args.clusters,
        scales=args.scales,
        alpha=args.alpha,
        gamma0=args.gamma0,
        seed=args.seed,
        repeats=args.repeats,
    )
    print(result.table())
    return 0


_COMMANDS = {
    "cluster": _cmd_cluster,
    "synth": _cmd_synth,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        with _limit_threads(_thread_cap(args)):
            return _COMMANDS[args.command](args)
    except SscagError as err:
        kind = type(err).__name__.removesuffix("Error").lower() or "error"
        print(f"sscag: error: {kind}: {err}", file=sys.stderr)
        return err.exit_code
    except OSError as err:
        print(f"sscag: error: io: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
