"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with `pytest -s tests/test_acceptance.py` to see them).

Criteria are property- and oracle-based at desk scale plus a scaled-down
behavioral experiment and a stage-scaling benchmark; published full-dataset
accuracy figures are documentation targets only and are not asserted here.
"""

import time

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from sscag import (
    HsiCube,
    FilterParams,
    PipelineParams,
    SceneSpec,
    assign_row,
    build_coordinates,
    build_graph,
    embed,
    kappa,
    materialize_S,
    normalize_cube,
    overall_accuracy,
    run_sscag,
    sample_anchors,
    ssdm_distance,
    synth_scene,
    wmf,
)
from sscag.bench import run_benchmark
from sscag.cli import main as cli_main
from sscag.filtering import multiscale_wmf
from sscag.metrics import evaluate
from sscag.neighbors import build_neighbor_summary
from sscag.spectral import kmeans
from oracles import dense_top_eigenpairs, dss_reference, simplex_assign_reference


def report(number, ok, detail):
    print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {number} failed: {detail}"


def random_pipeline_graph(rng, max_n=300, max_m=30):
    height = int(rng.integers(8, 18))
    width = int(rng.integers(8, max_n // height + 1))
    n = height * width
    m = int(rng.integers(4, max_m + 1))
    k = int(rng.integers(1, min(m, 7)))
    alpha = float(rng.uniform(0.0, 1.0))
    cube = HsiCube(height, width, rng.uniform(size=(n, 5)))
    norm = normalize_cube(cube)
    stack = multiscale_wmf(norm, (3,), 0.2)
    summary = build_neighbor_summary(norm, stack, max(k, 2))
    anchors = sample_anchors(norm, m, int(rng.integers(0, 2**31)))
    return build_graph(norm, summary, anchors, k, alpha), k


def test_criterion_1_closed_form_solver_oracle():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(5, 51))
        k = int(rng.integers(1, m))
        costs = rng.uniform(0.0, 10.0, size=m)
        got = assign_row(costs, k)
        expected = simplex_assign_reference(costs, k)
        worst = max(worst, float(np.abs(got - expected).max()))
    elapsed = time.perf_counter() - start
    report(
        1,
        worst <= 1e-8 and elapsed < 10.0,
        f"1000 instances, max deviation {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_2_graph_invariants():
    rng = np.random.default_rng(2)
    worst_row, worst_sym, worst_rowsum, min_eig = 0.0, 0.0, 0.0, 0.0
    for _ in range(100):
        graph, k = random_pipeline_graph(rng)
        z = graph.weights
        worst_row = max(worst_row, float(np.abs(z.sum(axis=1) - 1.0).max()))
        assert np.all((z > 0).sum(axis=1) <= k)
        assert z.min() >= 0.0
        sim = materialize_S(graph)
        worst_sym = max(worst_sym, float(np.abs(sim - sim.T).max()))
        worst_rowsum = max(worst_rowsum, float(np.abs(sim.sum(axis=1) - 1.0).max()))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(sim).min()))
    ok = worst_row <= 1e-12 and worst_sym <= 1e-12 and worst_rowsum <= 1e-10 and min_eig >= -1e-10
    report(
        2,
        ok,
        f"100 pipelines: row-sum dev {worst_row:.1e}, asymmetry {worst_sym:.1e}, "
        f"S row-sum dev {worst_rowsum:.1e}, min eig {min_eig:.1e}",
    )


def test_criterion_3_embedding_oracle():
    worst_angle, worst_trace = 0.0, 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        cube = HsiCube(10, 20, rng.uniform(size=(200, 6)))
        norm = normalize_cube(cube)
        stack = multiscale_wmf(norm, (3,), 0.2)
        summary = build_neighbor_summary(norm, stack, 5)
        anchors = sample_anchors(norm, 20, seed)
        graph = build_graph(norm, summary, anchors, 5, 0.6)
        embedding = embed(graph, 4)
        sim = materialize_S(graph)
        vals, vecs = dense_top_eigenpairs(sim, 4)
        angle = float(np.abs(subspace_angles(embedding.coords, vecs)).max())
        f = embedding.coords
        trace_dev = abs(float(np.trace(f.T @ sim @ f)) - float(vals.sum()))
        worst_angle = max(worst_angle, angle)
        worst_trace = max(worst_trace, trace_dev)
    report(
        3,
        worst_angle <= 1e-8 and worst_trace <= 1e-8,
        f"10 graphs (n=200, m=20, c=4): max angle {worst_angle:.1e}, "
        f"max trace deviation {worst_trace:.1e}",
    )


def test_criterion_4_wmf_correctness():
    constant = HsiCube(6, 6, np.full((36, 4), 0.3))
    const_dev = float(
        np.abs(wmf(constant, FilterParams(5, 0.2)).values - constant.values).max()
    )

    line = HsiCube(1, 3, np.array([[0.0], [0.5], [1.0]]))
    filtered = wmf(line, FilterParams(3, 0.2))
    weight = np.exp(-0.2 * 0.25)
    center_dev = abs(filtered.values[1, 0] - (0.5 + weight) / (1.0 + 2.0 * weight))
    border_expected = weight * 0.5 / (1.0 + weight)
    border_dev = abs(filtered.values[0, 0] - border_expected)
    hand_ok = (
        center_dev <= 1e-10
        and border_dev <= 1e-10
        and abs(filtered.values[1, 0] - 0.5) <= 1e-10
        and abs(border_expected - 0.24375) < 1e-4
    )

    rng = np.random.default_rng(4)
    hull_ok = True
    for _ in range(100):
        h, w = (int(v) for v in rng.integers(2, 9, size=2))
        cube = HsiCube(h, w, rng.uniform(size=(h * w, 3)))
        out = wmf(cube, FilterParams(3, float(rng.uniform(0.05, 2.0))))
        hull_ok &= bool(
            np.all(out.values.min(axis=0) >= cube.values.min(axis=0) - 1e-12)
            and np.all(out.values.max(axis=0) <= cube.values.max(axis=0) + 1e-12)
        )
    report(
        4,
        const_dev <= 1e-12 and hand_ok and hull_ok,
        f"constant dev {const_dev:.1e}, hand-case devs {center_dev:.1e}/"
        f"{border_dev:.1e}, hull bound on 100 cubes {hull_ok}",
    )


def test_criterion_5_dss_oracle():
    rng = np.random.default_rng(5)
    coords = build_coordinates(16, 16)
    worst = 0.0
    exact = True
    for _ in range(5):
        cube = HsiCube(16, 16, rng.uniform(size=(256, 6)))
        filtered = {w: wmf(cube, FilterParams(w, 0.2)) for w in (3, 5, 7)}
        for _ in range(100):
            i, j = (int(v) for v in rng.integers(0, 256, size=2))
            window = int(rng.choice([3, 5, 7]))
            got = ssdm_distance(i, j, cube, filtered[window], coords, window)
            expected = dss_reference(
                i, j, cube.values, filtered[window].values, 16, 16, window
            )
            worst = max(worst, abs(got - expected))
        for _ in range(10):
            i, j = (int(v) for v in rng.integers(0, 256, size=2))
            if i == j:
                continue
            diff = cube.values[i] - filtered[3].values[j]
            exact &= ssdm_distance(i, j, cube, filtered[3], coords, 1) == float(
                np.sqrt((diff * diff).sum())
            )
    report(
        5,
        worst <= 1e-10 and exact,
        f"500 triples max deviation {worst:.1e}, unit-window reduction exact: {exact}",
    )


def test_criterion_6_metrics():
    cm = np.array([[3, 1], [1, 3]])
    hand_ok = (
        overall_accuracy(cm) == 0.75
        and abs(kappa(cm) - 0.5) == 0.0
        and evaluate(
            np.array([1, 1, 1, 1, 2, 2, 2, 2]),
            np.array([1, 1, 1, 2, 2, 2, 2, 1]),
        )["aa"] == 0.75
    )

    rng = np.random.default_rng(6)
    gt = rng.integers(1, 5, size=300)
    pred = rng.integers(0, 7, size=300)
    base = evaluate(pred, gt)
    invariant = True
    for _ in range(100):
        perm = rng.permutation(7)
        scores = evaluate(perm[pred], gt)
        invariant &= (
            scores["oa"] == base["oa"]
            and scores["aa"] == base["aa"]
            and scores["kappa"] == base["kappa"]
        )

    bounded = True
    for _ in range(1000):
        size = int(rng.integers(2, 6))
        counts = rng.integers(0, 25, size=(size, size))
        if counts.sum() == 0:
            continue
        bounded &= kappa(counts) <= overall_accuracy(counts) + 1e-12
    report(
        6,
        hand_ok and invariant and bounded,
        f"hand values {hand_ok}, permutation invariance {invariant}, "
        f"kappa<=OA on 1000 matrices {bounded}",
    )


def test_criterion_7_end_to_end_behavioral():
    spec = SceneSpec(32, 32, 8, 4, separation=0.5, noise=0.05)
    sscag_oas, baseline_oas, slowest = [], [], 0.0
    for seed in range(5):
        cube, gt = synth_scene(spec, seed)
        params = PipelineParams(n_clusters=4, n_anchors=64, alpha=0.6, seed=seed)
        start = time.perf_counter()
        result = run_sscag(cube, params)
        slowest = max(slowest, time.perf_counter() - start)
        sscag_oas.append(evaluate(result.labels, gt)["oa"])
        baseline, _ = kmeans(normalize_cube(cube).values, 4, seed, restarts=10)
        baseline_oas.append(evaluate(baseline + 1, gt)["oa"])
    sscag_median = float(np.median(sscag_oas))
    baseline_median = float(np.median(baseline_oas))
    report(
        7,
        sscag_median >= 0.95 and sscag_median >= baseline_median and slowest < 60.0,
        f"median OA {sscag_median:.4f} vs raw k-means {baseline_median:.4f}, "
        f"slowest run {slowest:.1f}s",
    )


def test_criterion_8_complexity_scaling():
    start = time.perf_counter()
    result = run_benchmark()  # n in {4096, 8192, 16384}, d=8, m=64, k=5
    elapsed = time.perf_counter() - start
    graph_slope = result.slopes["graph"]
    dss_slope = result.slopes["neighbors"]
    report(
        8,
        0.8 <= graph_slope <= 1.3 and 1.7 <= dss_slope <= 2.3 and elapsed < 600.0,
        f"graph slope {graph_slope:.2f}, exact-search slope {dss_slope:.2f}, "
        f"{elapsed:.0f}s total",
    )


def test_criterion_9_cli_determinism(tmp_path):
    cube = tmp_path / "scene.hsic"
    gt = tmp_path / "scene.pgm"
    code = cli_main([
        "synth", "--height", "16", "--width", "16", "--bands", "6",
        "--classes", "4", "--delta", "0.5", "--noise", "0.05", "--seed", "3",
        "--out-cube", str(cube), "--out-gt", str(gt),
    ])
    assert code == 0
    digests = []
    for name in ("one", "two"):
        out = tmp_path / name
        code = cli_main([
            "cluster", "--input", str(cube), "--ground-truth", str(gt),
            "--clusters", "4", "--anchors", "32", "--alpha", "0.6",
            "--scales", "3,5", "--seed", "11", "--out-dir", str(out),
        ])
        assert code == 0
        digests.append(
            ((out / "labels.csv").read_bytes(), (out / "map.ppm").read_bytes())
        )
    identical = digests[0] == digests[1]
    report(9, identical, f"reruns byte-identical: {identical}")
