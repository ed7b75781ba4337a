"""Candidate scoring statuses and the native registry executor."""

import math
import time

import numpy as np
import pytest

from evotree.config import DatasetSpec
from evotree.evaluation import (
    STATUS_INVALID_OUTPUT,
    STATUS_OK,
    STATUS_PARSE_ERROR,
    STATUS_RUNTIME_ERROR,
    STATUS_TIMEOUT,
    EvaluationOutcome,
    NativeExecutor,
    NativeRegistry,
    evaluate_candidate,
)
from evotree.problems.datasets import build_dataset
from evotree.problems.tsp import nearest_greedy

from engine_kit import TSP_CODES, make_tsp_registry


@pytest.fixture(scope="module")
def instances():
    return build_dataset(DatasetSpec("tsp", params={"count": 3, "nodes": 6, "seed": 2}))


class TestNativeExecutor:
    def test_ok_scores_every_instance(self, instances):
        executor = NativeExecutor(make_tsp_registry())
        out = evaluate_candidate(TSP_CODES["nearest"], "tsp", instances, executor, 10.0)
        assert out.status == STATUS_OK
        assert len(out.scores) == 3
        assert out.score == math.fsum(out.scores) / 3
        assert all(s < 0 for s in out.scores)  # negated tour lengths
        assert out.wall_ms >= 0

    def test_unknown_code_is_parse_error(self, instances):
        executor = NativeExecutor(make_tsp_registry())
        out = evaluate_candidate("def select_next_node(): pass", "tsp", instances, executor, 10.0)
        assert out.status == STATUS_PARSE_ERROR
        assert out.scores is None and out.score is None

    def test_raising_heuristic_is_runtime_error(self, instances):
        registry = NativeRegistry()
        code = NativeRegistry.stub_code("select_next_node", "boom")

        def boom(c, d, u, m):
            raise RuntimeError("exploded")

        registry.register(code, boom)
        out = evaluate_candidate(code, "tsp", instances, NativeExecutor(registry), 10.0)
        assert out.status == STATUS_RUNTIME_ERROR
        assert "exploded" in out.error

    def test_invalid_driver_output(self, instances):
        registry = NativeRegistry()
        code = NativeRegistry.stub_code("select_next_node", "bad")
        registry.register(code, lambda c, d, u, m: -5)  # never a valid unvisited node
        out = evaluate_candidate(code, "tsp", instances, NativeExecutor(registry), 10.0)
        assert out.status == STATUS_INVALID_OUTPUT

    def test_slow_heuristic_times_out(self, instances):
        registry = NativeRegistry()
        code = NativeRegistry.stub_code("select_next_node", "slow")

        def slow(c, d, u, m):
            time.sleep(0.05)
            return nearest_greedy(c, d, u, m)

        registry.register(code, slow)
        out = evaluate_candidate(code, "tsp", instances, NativeExecutor(registry), 0.01)
        assert out.status == STATUS_TIMEOUT
        assert out.scores is None  # partial results discarded

    def test_timeout_checked_between_instances(self):
        # generous limit: all instances complete even though each is slow
        registry = NativeRegistry()
        code = NativeRegistry.stub_code("select_next_node", "slowok")

        def slowish(c, d, u, m):
            time.sleep(0.001)
            return nearest_greedy(c, d, u, m)

        registry.register(code, slowish)
        data = build_dataset(DatasetSpec("tsp", params={"count": 2, "nodes": 5, "seed": 0}))
        out = evaluate_candidate(code, "tsp", data, NativeExecutor(registry), 10.0)
        assert out.status == STATUS_OK


class FixedExecutor:
    def __init__(self, scores):
        self.scores = scores

    def run(self, code, problem, instances, timeout_s):
        return STATUS_OK, list(self.scores), None


class TestOutcome:
    def test_mean_is_exact(self, instances):
        out = evaluate_candidate("x", "tsp", instances, FixedExecutor([0.1, 0.2, 0.3]), 1.0)
        assert out.score == math.fsum([0.1, 0.2, 0.3]) / 3

    def test_non_finite_scores_become_invalid_output(self, instances):
        out = evaluate_candidate("x", "tsp", instances, FixedExecutor([1.0, float("nan"), 2.0]), 1.0)
        assert out.status == STATUS_INVALID_OUTPUT
        out = evaluate_candidate("x", "tsp", instances, FixedExecutor([1.0, float("inf"), 2.0]), 1.0)
        assert out.status == STATUS_INVALID_OUTPUT

    def test_job_ids_increment(self, instances):
        a = evaluate_candidate("x", "tsp", instances, FixedExecutor([1.0]), 1.0)
        b = evaluate_candidate("x", "tsp", instances, FixedExecutor([1.0]), 1.0)
        assert b.job_id == a.job_id + 1

    def test_outcome_is_frozen(self):
        out = EvaluationOutcome(job_id=1, status=STATUS_OK)
        with pytest.raises(AttributeError):
            out.status = "other"

    def test_start_node_threaded_through(self):
        registry = make_tsp_registry()
        data = build_dataset(DatasetSpec("tsp", params={"count": 1, "nodes": 6, "seed": 2}))
        a = evaluate_candidate(TSP_CODES["nearest"], "tsp", data, NativeExecutor(registry, start_node=0), 5.0)
        b = evaluate_candidate(TSP_CODES["nearest"], "tsp", data, NativeExecutor(registry, start_node=3), 5.0)
        assert a.status == b.status == STATUS_OK
        assert a.score != b.score  # different anchors give different tours here
