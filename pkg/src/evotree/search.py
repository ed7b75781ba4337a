"""Search tree core: node bookkeeping, selection, widening, backpropagation.

Quality values are oriented so that larger is better.  The root is virtual
(it carries no heuristic); every other node wraps one evaluated candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random
from typing import Any, Iterator

# Sentinel bounds from before any candidate was scored.  q_max starts far
# below q_min so the first real score replaces both at once.
INITIAL_Q_MAX = -1e5
INITIAL_Q_MIN = 0.0

# Bound spans at or below this are treated as degenerate: the normalized
# quality term becomes 0 and selection falls back to the exploration term.
DEGENERATE_SPAN = 1e-12

ELITE_CAPACITY = 10


def decay_lambda(explore_init: float, t: int, budget: int) -> float:
    """Exploration weight after t of budget evaluations: linear decay to 0."""
    if not 0 <= t <= budget:
        raise ValueError(f"t={t} outside [0, {budget}]")
    return explore_init * (budget - t) / budget


def should_widen(visits: int, n_children: int, alpha: float) -> bool:
    """Progressive widening test: floor(visits**alpha) >= current child count."""
    if visits < 0:
        raise ValueError("visits must be >= 0")
    return math.floor(visits**alpha) >= n_children


@dataclass
class QualityBounds:
    """Running [q_min, q_max] over every successfully evaluated candidate."""

    q_max: float = INITIAL_Q_MAX
    q_min: float = INITIAL_Q_MIN
    _seen: bool = False

    def update(self, performance: float) -> None:
        if not math.isfinite(performance):
            raise ValueError("bounds only accept finite performances")
        if not self._seen:
            self.q_max = performance
            self.q_min = performance
            self._seen = True
            return
        self.q_max = max(self.q_max, performance)
        self.q_min = min(self.q_min, performance)

    @property
    def span_degenerate(self) -> bool:
        return (self.q_max - self.q_min) <= DEGENERATE_SPAN

    def normalize(self, q: float) -> float:
        if self.span_degenerate:
            return 0.0
        return (q - self.q_min) / (self.q_max - self.q_min)

    def to_dict(self) -> dict[str, Any]:
        return {"q_max": self.q_max, "q_min": self.q_min, "seen": self._seen}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> QualityBounds:
        return cls(q_max=d["q_max"], q_min=d["q_min"], _seen=d["seen"])


def uct_score(q: float, visits: int, parent_visits: int, bounds: QualityBounds, lam: float) -> float:
    """Normalized quality plus lam * sqrt(ln(parent_visits + 1) / visits)."""
    if visits < 1:
        raise ValueError("uct_score needs visits >= 1")
    if parent_visits < 0:
        raise ValueError("parent_visits must be >= 0")
    explore = math.sqrt(math.log(parent_visits + 1) / visits)
    return bounds.normalize(q) + lam * explore


@dataclass
class SearchNode:
    """One tree node; the root holds no candidate (code is None)."""

    id: int
    parent: SearchNode | None
    action: str | None
    depth: int
    code: str | None
    description: str | None
    performance: float | None  # the candidate's own dataset score, fixed at attach
    Q: float | None = None     # running max over the subtree's scores
    N: int = 0
    children: list[SearchNode] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def subtree(self) -> Iterator[SearchNode]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


class SearchTree:
    """Holds the virtual root and assigns creation-ordered node ids."""

    def __init__(self) -> None:
        self.root = SearchNode(id=0, parent=None, action=None, depth=0, code=None, description=None, performance=None)
        self.nodes: dict[int, SearchNode] = {0: self.root}
        self._next_id = 1

    def attach(self, parent: SearchNode, action: str, code: str, description: str, performance: float) -> SearchNode:
        node = SearchNode(
            id=self._next_id,
            parent=parent,
            action=action,
            depth=parent.depth + 1,
            code=code,
            description=description,
            performance=performance,
            Q=performance,
            N=1,
        )
        self._next_id += 1
        parent.children.append(node)
        self.nodes[node.id] = node
        return node

    def __len__(self) -> int:
        return len(self.nodes)

    def best_node(self) -> SearchNode:
        """Highest candidate score ever seen; ties go to the earliest node."""
        best: SearchNode | None = None
        for node in sorted(self.nodes.values(), key=lambda n: n.id):
            if node.performance is None:
                continue
            if best is None or node.performance > best.performance:
                best = node
        if best is None:
            raise ValueError("tree holds no evaluated candidate")
        return best

    def export_nodes(self) -> list[dict[str, Any]]:
        rows = []
        for node_id in sorted(self.nodes):
            n = self.nodes[node_id]
            rows.append(
                {
                    "id": n.id,
                    "parent": None if n.parent is None else n.parent.id,
                    "action": n.action,
                    "depth": n.depth,
                    "Q": n.Q,
                    "N": n.N,
                    "code": n.code,
                    "description": n.description,
                    "performance": n.performance,
                }
            )
        return rows

    @classmethod
    def from_export(cls, rows: list[dict[str, Any]]) -> SearchTree:
        tree = cls()
        for row in sorted(rows, key=lambda r: r["id"]):
            if row["id"] == 0:
                tree.root.Q = row["Q"]
                tree.root.N = row["N"]
                continue
            parent = tree.nodes[row["parent"]]
            node = SearchNode(
                id=row["id"],
                parent=parent,
                action=row["action"],
                depth=row["depth"],
                code=row["code"],
                description=row["description"],
                performance=row["performance"],
                Q=row["Q"],
                N=row["N"],
            )
            parent.children.append(node)
            tree.nodes[node.id] = node
        tree._next_id = max(tree.nodes) + 1
        return tree


def select_child(node: SearchNode, bounds: QualityBounds, lam: float) -> SearchNode:
    """Child with the highest selection score; ties go to the smallest id."""
    if not node.children:
        raise ValueError("select_child called on a leaf")
    best = node.children[0]
    best_score = uct_score(best.Q, best.N, node.N, bounds, lam)
    for child in node.children[1:]:
        score = uct_score(child.Q, child.N, node.N, bounds, lam)
        if score > best_score:
            best, best_score = child, score
    return best


def backpropagate(node: SearchNode, added: int) -> None:
    """Refresh Q as the max over children and add `added` visits, node to root.

    `added` is the number of children successfully attached this pass; a
    pass where every generation failed leaves Q and N untouched.
    """
    if added <= 0:
        return
    cur: SearchNode | None = node
    while cur is not None:
        if cur.children:
            cur.Q = max(child.Q for child in cur.children)
        cur.N += added
        cur = cur.parent


@dataclass(frozen=True)
class EliteEntry:
    node_id: int
    performance: float
    code: str
    description: str


class EliteSet:
    """Top candidates ever evaluated, best first; ties keep the older node."""

    def __init__(self, capacity: int = ELITE_CAPACITY) -> None:
        self.capacity = capacity
        self.entries: list[EliteEntry] = []

    def update(self, node: SearchNode) -> None:
        if node.performance is None:
            raise ValueError("elite set only accepts evaluated nodes")
        entry = EliteEntry(node.id, node.performance, node.code, node.description)
        self.entries.append(entry)
        self.entries.sort(key=lambda e: (-e.performance, e.node_id))
        del self.entries[self.capacity :]

    def sample(self, rng: Random) -> EliteEntry:
        """Draw one entry with priority 1 / (rank + 10), rank starting at 1."""
        if not self.entries:
            raise ValueError("elite set is empty")
        weights = [1.0 / (rank + 10) for rank in range(1, len(self.entries) + 1)]
        total = sum(weights)
        pick = rng.random() * total
        acc = 0.0
        for entry, weight in zip(self.entries, weights):
            acc += weight
            if pick < acc:
                return entry
        return self.entries[-1]

    def ids(self) -> list[int]:
        return [e.node_id for e in self.entries]

    def to_dict(self) -> list[dict[str, Any]]:
        return [
            {"node_id": e.node_id, "performance": e.performance, "code": e.code, "description": e.description}
            for e in self.entries
        ]

    @classmethod
    def from_dict(cls, rows: list[dict[str, Any]], capacity: int = ELITE_CAPACITY) -> EliteSet:
        elite = cls(capacity)
        elite.entries = [EliteEntry(r["node_id"], r["performance"], r["code"], r["description"]) for r in rows]
        return elite
