import numpy as np
import pytest

from sscag import (
    AnchorGraph,
    DataError,
    HsiCube,
    ParameterError,
    SceneSpec,
    assign_row,
    build_graph,
    combined_distances,
    materialize_S,
    normalize_cube,
    sample_anchors,
    synth_scene,
)
from sscag.filtering import multiscale_wmf
from sscag.neighbors import build_neighbor_summary
from oracles import simplex_assign_reference


def pipeline_graph(seed, height=10, width=10, m=12, k=4, alpha=0.5):
    spec = SceneSpec(height, width, 5, 3, separation=0.4, noise=0.2)
    cube, _ = synth_scene(spec, seed)
    norm = normalize_cube(cube)
    stack = multiscale_wmf(norm, (3,), 0.2)
    summary = build_neighbor_summary(norm, stack, k)
    anchors = sample_anchors(norm, m, seed + 1)
    return build_graph(norm, summary, anchors, k, alpha)


class TestSampling:
    def test_exhaustive_sampling_is_permutation(self, rng):
        cube = HsiCube(4, 4, rng.uniform(size=(16, 3)))
        anchors = sample_anchors(cube, 16, 0)
        np.testing.assert_array_equal(np.sort(anchors.source_ids), np.arange(16))

    def test_deterministic_per_seed(self, rng):
        cube = HsiCube(5, 5, rng.uniform(size=(25, 3)))
        a = sample_anchors(cube, 7, 42)
        b = sample_anchors(cube, 7, 42)
        np.testing.assert_array_equal(a.source_ids, b.source_ids)
        assert not np.array_equal(
            a.source_ids, sample_anchors(cube, 7, 43).source_ids
        )

    def test_oversampling_rejected(self, rng):
        cube = HsiCube(2, 2, rng.uniform(size=(4, 1)))
        with pytest.raises(ParameterError):
            sample_anchors(cube, 5, 0)

    def test_anchor_rows_match_sources(self, rng):
        cube = HsiCube(3, 3, rng.uniform(size=(9, 4)))
        anchors = sample_anchors(cube, 4, 1)
        np.testing.assert_array_equal(
            anchors.anchors, cube.values[anchors.source_ids]
        )


class TestCombinedDistances:
    def test_alpha_zero_is_purely_spectral(self, rng):
        x = rng.uniform(size=3)
        x_mean = rng.uniform(size=3)
        anchors = rng.uniform(size=(6, 3))
        costs = combined_distances(x, x_mean, anchors, 0.0)
        expected = ((anchors - x) ** 2).sum(axis=1)
        np.testing.assert_allclose(costs, expected, atol=1e-14)

    def test_one_band_hand_case(self):
        costs = combined_distances(
            np.array([0.0]), np.array([1.0]), np.array([[0.0], [1.0]]), 1.0
        )
        np.testing.assert_allclose(costs, [1.0, 1.0])
        row = assign_row(costs, 1)
        np.testing.assert_array_equal(row, [1.0, 0.0])  # tie -> anchor 0

    def test_coincident_point_has_zero_cost(self):
        u = np.array([0.3, 0.7])
        costs = combined_distances(u, u, u[None, :], 2.0)
        assert costs[0] == 0.0

    def test_negative_alpha_rejected(self):
        with pytest.raises(ParameterError):
            combined_distances(np.zeros(2), np.zeros(2), np.zeros((3, 2)), -0.1)


class TestAssignRow:
    def test_sorted_hand_case(self):
        row = assign_row(np.array([0.0, 1.0, 2.0, 5.0]), 2)
        np.testing.assert_allclose(row, [2 / 3, 1 / 3, 0.0, 0.0])

    def test_degenerate_uniform(self):
        row = assign_row(np.array([1.0, 1.0, 1.0]), 2)
        np.testing.assert_array_equal(row, [0.5, 0.5, 0.0])

    def test_second_hand_case(self):
        row = assign_row(np.array([0.0, 3.0, 6.0]), 2)
        np.testing.assert_allclose(row, [2 / 3, 1 / 3, 0.0])

    def test_unsorted_input(self):
        row = assign_row(np.array([5.0, 2.0, 0.0, 1.0]), 2)
        np.testing.assert_allclose(row, [0.0, 0.0, 2 / 3, 1 / 3])

    def test_matches_qp_oracle(self, rng):
        for _ in range(300):
            m = int(rng.integers(5, 51))
            k = int(rng.integers(1, m))
            costs = rng.uniform(0.0, 10.0, size=m)
            got = assign_row(costs, k)
            expected = simplex_assign_reference(costs, k)
            assert np.abs(got - expected).max() <= 1e-8

    def test_sparsity_and_simplex(self, rng):
        for _ in range(200):
            m = int(rng.integers(3, 30))
            k = int(rng.integers(1, m))
            row = assign_row(rng.uniform(0.0, 4.0, size=m), k)
            assert np.count_nonzero(row) == k
            assert row.min() >= 0.0
            assert abs(row.sum() - 1.0) <= 1e-12

    def test_monotone_within_support(self, rng):
        for _ in range(100):
            costs = rng.uniform(0.0, 2.0, size=10)
            row = assign_row(costs, 4)
            support = np.flatnonzero(row)
            order = support[np.argsort(costs[support])]
            assert np.all(np.diff(row[order]) <= 1e-15)

    def test_k_not_smaller_than_m_rejected(self):
        with pytest.raises(ParameterError):
            assign_row(np.array([1.0, 2.0]), 2)

    def test_non_finite_costs_rejected(self):
        with pytest.raises(DataError):
            assign_row(np.array([1.0, np.inf, 2.0]), 1)


class TestBuildGraph:
    def test_self_anchor_dominates(self, rng):
        values = rng.uniform(size=(9, 4))
        cube = HsiCube(3, 3, values)
        anchors = sample_anchors(cube, 9, 0)
        summary_mean = values  # alpha = 0 makes the mean irrelevant
        from sscag.neighbors import NeighborSummary

        summary = NeighborSummary(
            ids=np.zeros((9, 2), dtype=np.int64),
            distances=np.zeros((9, 2)),
            mean=summary_mean,
        )
        graph = build_graph(cube, summary, anchors, 3, 0.0)
        for i in range(9):
            own = np.flatnonzero(anchors.source_ids == i)[0]
            assert graph.weights[i].argmax() == own

    def test_rows_sum_to_one(self):
        graph = pipeline_graph(0)
        np.testing.assert_allclose(graph.weights.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(graph.weights >= 0)
        assert np.all((graph.weights > 0).sum(axis=1) <= graph.k)

    def test_rows_match_closed_form_recomputation(self, rng):
        graph = pipeline_graph(5, m=20, k=5)
        spec = SceneSpec(10, 10, 5, 3, separation=0.4, noise=0.2)
        cube, _ = synth_scene(spec, 5)
        norm = normalize_cube(cube)
        stack = multiscale_wmf(norm, (3,), 0.2)
        summary = build_neighbor_summary(norm, stack, 5)
        anchors = sample_anchors(norm, 20, 6)
        for i in rng.integers(0, 100, size=25):
            costs = combined_distances(
                norm.values[i], summary.mean[i], anchors.anchors, 0.5
            )
            np.testing.assert_allclose(
                graph.weights[i], assign_row(costs, 5), atol=1e-8
            )

    def test_rows_match_qp_oracle(self, rng):
        # n=200, m=20, k=5 graph against the independent iterative solver
        graph = pipeline_graph(8, height=10, width=20, m=20, k=5)
        spec = SceneSpec(10, 20, 5, 3, separation=0.4, noise=0.2)
        cube, _ = synth_scene(spec, 8)
        norm = normalize_cube(cube)
        stack = multiscale_wmf(norm, (3,), 0.2)
        summary = build_neighbor_summary(norm, stack, 5)
        anchors = sample_anchors(norm, 20, 9)
        for i in rng.integers(0, 200, size=40):
            costs = combined_distances(
                norm.values[i], summary.mean[i], anchors.anchors, 0.5
            )
            expected = simplex_assign_reference(costs, 5)
            assert np.abs(graph.weights[i] - expected).max() <= 1e-8

    def test_degrees_recomputable(self):
        graph = pipeline_graph(2)
        np.testing.assert_allclose(
            graph.degrees, graph.weights.sum(axis=0), atol=1e-12
        )


class TestMaterialize:
    def test_two_block_hand_case(self):
        weights = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        graph = AnchorGraph(
            weights=weights,
            degrees=weights.sum(axis=0),
            active=np.array([True, True]),
            alpha=0.0,
            k=1,
        )
        sim = materialize_S(graph)
        expected = np.zeros((4, 4))
        expected[:2, :2] = 0.5
        expected[2:, 2:] = 0.5
        np.testing.assert_allclose(sim, expected, atol=1e-15)

    def test_row_sums_symmetry_psd(self):
        for seed in range(3):
            sim = materialize_S(pipeline_graph(seed))
            np.testing.assert_allclose(sim.sum(axis=1), 1.0, atol=1e-10)
            assert np.abs(sim - sim.T).max() <= 1e-12
            assert np.linalg.eigvalsh(sim).min() >= -1e-10

    def test_zero_degree_anchor_dropped_without_change(self):
        weights = np.array([[0.6, 0.0, 0.4], [0.3, 0.0, 0.7], [1.0, 0.0, 0.0]])
        degrees = weights.sum(axis=0)
        with_dead = AnchorGraph(
            weights=weights, degrees=degrees, active=degrees > 0, alpha=0.0, k=2
        )
        alive = AnchorGraph(
            weights=weights[:, [0, 2]],
            degrees=degrees[[0, 2]],
            active=np.array([True, True]),
            alpha=0.0,
            k=2,
        )
        np.testing.assert_array_equal(
            materialize_S(with_dead), materialize_S(alive)
        )

    def test_size_guard(self):
        weights = np.zeros((2001, 2))
        weights[:, 0] = 1.0
        graph = AnchorGraph(
            weights=weights,
            degrees=weights.sum(axis=0),
            active=np.array([True, False]),
            alpha=0.0,
            k=1,
        )
        with pytest.raises(ParameterError):
            materialize_S(graph)
