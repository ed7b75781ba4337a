"""Tour construction driver, nearest-neighbor baseline, and the exact oracle."""

import itertools
import math

import numpy as np
import pytest

from evotree.problems import InvalidHeuristicOutput
from evotree.problems.tsp import (
    HELD_KARP_MAX_NODES,
    construct_tsp,
    distance_matrix,
    gen_tsp,
    held_karp,
    nearest_greedy,
    score_instance,
    tour_length,
)

SQUARE = {"coords": np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])}


def brute_force_tour(dist: np.ndarray) -> float:
    """Independent oracle: enumerate all tours anchored at node 0."""
    n = len(dist)
    best = math.inf
    for perm in itertools.permutations(range(1, n)):
        tour = (0, *perm)
        length = sum(dist[tour[i]][tour[(i + 1) % n]] for i in range(n))
        best = min(best, length)
    return best


class TestGeometry:
    def test_distance_matrix_symmetric_zero_diagonal(self):
        dist = distance_matrix(SQUARE["coords"])
        assert dist.shape == (4, 4)
        assert np.allclose(dist, dist.T)
        assert np.all(np.diag(dist) == 0)
        assert dist[0][1] == pytest.approx(1.0)
        assert dist[0][2] == pytest.approx(math.sqrt(2))

    def test_tour_length_closes_the_loop(self):
        dist = distance_matrix(SQUARE["coords"])
        assert tour_length([0, 1, 2, 3], dist) == pytest.approx(4.0)

    def test_gen_is_seeded_unit_square(self):
        a = gen_tsp(10, np.random.default_rng(5))
        b = gen_tsp(10, np.random.default_rng(5))
        assert np.array_equal(a["coords"], b["coords"])
        assert a["coords"].shape == (10, 2)
        assert np.all((a["coords"] >= 0) & (a["coords"] < 1))


class TestConstruction:
    def test_square_nearest_tour(self):
        tour = construct_tsp(SQUARE, nearest_greedy)
        assert sorted(tour) == [0, 1, 2, 3]
        assert tour[0] == 0
        dist = distance_matrix(SQUARE["coords"])
        assert tour_length(tour, dist) == pytest.approx(4.0)

    def test_collinear_points_hand_value(self):
        inst = {"coords": np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])}
        assert score_instance(inst, nearest_greedy) == pytest.approx(-2.0)

    def test_score_is_negated_length(self):
        assert score_instance(SQUARE, nearest_greedy) == pytest.approx(-4.0)

    def test_start_node_respected(self):
        tour = construct_tsp(SQUARE, nearest_greedy, start_node=2)
        assert tour[0] == 2

    def test_bad_start_node(self):
        with pytest.raises(ValueError):
            construct_tsp(SQUARE, nearest_greedy, start_node=9)

    def test_heuristic_must_return_unvisited_member(self):
        def visits_start(c, d, u, m):
            return d  # start node is never in the unvisited set

        with pytest.raises(InvalidHeuristicOutput):
            construct_tsp(SQUARE, visits_start)

    def test_heuristic_non_integral_output_rejected(self):
        def halfway(c, d, u, m):
            return u[0] + 0.5

        with pytest.raises(InvalidHeuristicOutput):
            construct_tsp(SQUARE, halfway)

    def test_numpy_integer_output_accepted(self):
        def np_pick(c, d, u, m):
            return np.int64(u[0])

        tour = construct_tsp(SQUARE, np_pick)
        assert sorted(tour) == [0, 1, 2, 3]


class TestHeldKarp:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for n in (4, 5, 6, 7, 8):
            dist = distance_matrix(gen_tsp(n, rng)["coords"])
            assert held_karp(dist) == pytest.approx(brute_force_tour(dist), abs=1e-9)

    def test_tiny_cases(self):
        assert held_karp(np.zeros((1, 1))) == 0.0
        dist = distance_matrix(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert held_karp(dist) == pytest.approx(10.0)

    def test_size_cap(self):
        with pytest.raises(ValueError):
            held_karp(np.zeros((HELD_KARP_MAX_NODES + 1, HELD_KARP_MAX_NODES + 1)))

    def test_nearest_never_beats_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            inst = gen_tsp(9, rng)
            dist = distance_matrix(inst["coords"])
            assert -score_instance(inst, nearest_greedy) >= held_karp(dist) - 1e-9
