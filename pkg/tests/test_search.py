"""Selection math, tree bookkeeping, and the elite pool."""

import math
import random

import pytest

from evotree.search import (
    DEGENERATE_SPAN,
    INITIAL_Q_MAX,
    INITIAL_Q_MIN,
    EliteSet,
    QualityBounds,
    SearchTree,
    backpropagate,
    decay_lambda,
    select_child,
    should_widen,
    uct_score,
)


def make_bounds(q_min: float, q_max: float) -> QualityBounds:
    bounds = QualityBounds()
    bounds.update(q_min)
    bounds.update(q_max)
    return bounds


class TestDecay:
    def test_endpoints(self):
        assert decay_lambda(0.1, 0, 1000) == 0.1
        assert decay_lambda(0.1, 1000, 1000) == 0.0

    def test_midpoint(self):
        assert decay_lambda(0.1, 500, 1000) == 0.05

    def test_linearity(self):
        for t in range(0, 1001, 50):
            assert decay_lambda(0.2, t, 1000) == pytest.approx(0.2 * (1000 - t) / 1000, abs=0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            decay_lambda(0.1, -1, 100)
        with pytest.raises(ValueError):
            decay_lambda(0.1, 101, 100)


class TestWiden:
    def test_examples(self):
        assert should_widen(9, 3, 0.5) is True
        assert should_widen(8, 3, 0.5) is False
        assert should_widen(0, 0, 0.5) is True

    def test_square_root_rule(self):
        for visits in (1, 2, 3, 4, 8, 9, 15, 16, 24, 25, 99, 100):
            cap = math.isqrt(visits)
            assert should_widen(visits, cap, 0.5)
            assert not should_widen(visits, cap + 1, 0.5)


class TestBounds:
    def test_sentinels(self):
        bounds = QualityBounds()
        assert bounds.q_max == INITIAL_Q_MAX == -1e5
        assert bounds.q_min == INITIAL_Q_MIN == 0.0

    def test_first_update_replaces_both(self):
        bounds = QualityBounds()
        bounds.update(-7.0)
        assert bounds.q_max == -7.0
        assert bounds.q_min == -7.0

    def test_subsequent_updates_extend(self):
        bounds = make_bounds(-9.0, -3.0)
        bounds.update(-6.0)
        assert (bounds.q_min, bounds.q_max) == (-9.0, -3.0)
        bounds.update(-1.0)
        assert bounds.q_max == -1.0

    def test_normalize(self):
        bounds = make_bounds(0.0, 10.0)
        assert bounds.normalize(5.0) == 0.5
        assert bounds.normalize(10.0) == 1.0

    def test_degenerate_span_normalizes_to_zero(self):
        bounds = make_bounds(4.0, 4.0)
        assert bounds.span_degenerate
        assert bounds.normalize(4.0) == 0.0
        near = make_bounds(4.0, 4.0 + DEGENERATE_SPAN / 2)
        assert near.normalize(4.0) == 0.0

    def test_round_trip(self):
        bounds = make_bounds(-2.0, 3.5)
        again = QualityBounds.from_dict(bounds.to_dict())
        assert (again.q_min, again.q_max) == (-2.0, 3.5)
        assert again.normalize(0.75) == bounds.normalize(0.75)


class TestUct:
    def test_hand_value(self):
        # 5 within [0, 10] plus 0.1 * sqrt(ln(8 + 1) / 2), computed independently
        bounds = make_bounds(0.0, 10.0)
        got = uct_score(5.0, visits=2, parent_visits=8, bounds=bounds, lam=0.1)
        assert got == pytest.approx(0.6048147073968205, abs=1e-9)

    def test_zero_lambda_is_pure_exploitation(self):
        bounds = make_bounds(0.0, 4.0)
        assert uct_score(1.0, 1, 50, bounds, 0.0) == 0.25

    def test_requires_visits(self):
        with pytest.raises(ValueError):
            uct_score(1.0, 0, 5, make_bounds(0.0, 1.0), 0.1)


def build_tree(performances: list[float]) -> SearchTree:
    tree = SearchTree()
    for g in performances:
        tree.attach(tree.root, "i1", f"code {g}", f"desc {g}", g)
    return tree


class TestTree:
    def test_attach_assigns_creation_ordered_ids(self):
        tree = build_tree([-3.0, -1.0, -2.0])
        assert [n.id for n in tree.root.children] == [1, 2, 3]
        assert all(n.N == 1 and n.Q == n.performance for n in tree.root.children)
        assert tree.root.depth == 0
        assert tree.root.children[0].depth == 1

    def test_best_node_ties_to_earliest(self):
        tree = build_tree([-2.0, -1.0, -1.0])
        assert tree.best_node().id == 2

    def test_export_round_trip(self):
        tree = build_tree([-3.0, -1.0])
        deep = tree.attach(tree.root.children[0], "m1", "deep", "deep", -2.5)
        backpropagate(tree.root.children[0], 1)
        rows = tree.export_nodes()
        clone = SearchTree.from_export(rows)
        assert clone.export_nodes() == rows
        assert clone.nodes[deep.id].parent.id == deep.parent.id
        fresh = clone.attach(clone.root, "e1", "x", "x", -9.0)
        assert fresh.id == deep.id + 1  # id counter restored

    def test_subtree_iterates_all_descendants(self):
        tree = build_tree([-1.0, -2.0])
        child = tree.root.children[0]
        tree.attach(child, "m1", "a", "a", -3.0)
        ids = sorted(n.id for n in child.subtree())
        assert ids == [1, 3]


class TestSelectChild:
    def test_prefers_higher_quality(self):
        tree = build_tree([-5.0, -1.0])
        bounds = make_bounds(-5.0, -1.0)
        assert select_child(tree.root, bounds, 0.0).id == 2

    def test_exploration_term_can_flip(self):
        tree = build_tree([-5.0, -1.0])
        tree.root.N = 50
        tree.root.children[1].N = 40
        bounds = make_bounds(-5.0, -1.0)
        # bad child: 0 + lam * sqrt(ln 51 / 1); good child: 1 + lam * sqrt(ln 51 / 40)
        lam = 0.8
        assert select_child(tree.root, bounds, lam).id == 1

    def test_tie_breaks_to_smallest_id(self):
        tree = build_tree([-2.0, -2.0, -2.0])
        bounds = make_bounds(-4.0, -2.0)
        assert select_child(tree.root, bounds, 0.3).id == 1

    def test_errors_on_leaf(self):
        tree = build_tree([-2.0])
        with pytest.raises(ValueError):
            select_child(tree.root.children[0], make_bounds(-2.0, -1.0), 0.1)


class TestBackpropagate:
    def test_max_walks_to_root(self):
        tree = build_tree([-4.0])
        mid = tree.root.children[0]
        leaf = tree.attach(mid, "m1", "a", "a", -2.0)
        tree.attach(mid, "m2", "b", "b", -3.0)
        backpropagate(mid, 2)
        assert mid.Q == -2.0
        assert mid.N == 3
        assert tree.root.Q == -2.0
        assert tree.root.N == 2  # started at 0, incremented by added
        assert leaf.Q == -2.0 and leaf.N == 1

    def test_noop_when_nothing_added(self):
        tree = build_tree([-4.0])
        mid = tree.root.children[0]
        before = (mid.Q, mid.N, tree.root.N)
        backpropagate(mid, 0)
        assert (mid.Q, mid.N, tree.root.N) == before


class FixedRandom:
    def __init__(self, value: float) -> None:
        self.value = value

    def random(self) -> float:
        return self.value


class TestElite:
    def fill(self, performances):
        tree = build_tree(list(performances))
        elite = EliteSet()
        for node in tree.root.children:
            elite.update(node)
        return elite

    def test_keeps_top_ten_by_performance_then_id(self):
        elite = self.fill([-float(i) for i in range(15, 0, -1)])  # -15 .. -1
        assert len(elite.entries) == 10
        assert [e.performance for e in elite.entries] == [-float(i) for i in range(1, 11)]

    def test_tie_prefers_older_node(self):
        elite = self.fill([-1.0, -1.0, -2.0])
        assert elite.ids() == [1, 2, 3]

    def test_sample_boundaries(self):
        elite = self.fill([-float(i) for i in range(1, 11)])  # ranks follow ids here
        weights = [1.0 / (rank + 10) for rank in range(1, 11)]
        p1 = weights[0] / sum(weights)
        assert p1 == pytest.approx(0.1359344769788911, abs=1e-12)
        assert elite.sample(FixedRandom(p1 - 1e-9)).node_id == elite.ids()[0]
        assert elite.sample(FixedRandom(p1 + 1e-9)).node_id == elite.ids()[1]
        assert elite.sample(FixedRandom(1.0 - 1e-12)).node_id == elite.ids()[-1]

    def test_sample_frequency(self):
        elite = self.fill([-float(i) for i in range(1, 11)])
        rng = random.Random(0)
        n = 100_000
        hits = sum(elite.sample(rng).node_id == elite.ids()[0] for _ in range(n))
        assert hits / n == pytest.approx(0.1359344769788911, abs=5e-3)
        rng = random.Random(1)
        tail = sum(elite.sample(rng).node_id == elite.ids()[-1] for _ in range(n))
        assert tail / n == pytest.approx(0.07476396233839011, abs=5e-3)

    def test_round_trip(self):
        elite = self.fill([-3.0, -1.0])
        again = EliteSet.from_dict(elite.to_dict())
        assert again.ids() == elite.ids()

    def test_sample_empty_errors(self):
        with pytest.raises(ValueError):
            EliteSet().sample(random.Random(0))
