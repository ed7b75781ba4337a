"""Knapsack construction: instances, driver, ratio baseline, exact oracle."""

from __future__ import annotations

import numpy as np

KP_EXACT_MAX_ITEMS = 30


def gen_kp(n: int, capacity: float, rng: np.random.Generator) -> dict:
    """Item values and weights drawn uniformly from (0, 1)."""
    return {"values": rng.random(n), "weights": rng.random(n), "capacity": float(capacity)}


def construct_kp(instance: dict, heuristic) -> list[int]:
    """Add items one at a time; the heuristic only ever sees items that fit."""
    from evotree.problems import InvalidHeuristicOutput

    values = np.asarray(instance["values"], float)
    weights = np.asarray(instance["weights"], float)
    remaining = float(instance["capacity"])
    available = list(range(len(values)))
    chosen: list[int] = []
    while True:
        feasible = [i for i in available if weights[i] <= remaining]
        if not feasible:
            return chosen
        pick = heuristic(remaining, values[feasible], weights[feasible])
        try:
            idx = int(pick)
        except (TypeError, ValueError):
            raise InvalidHeuristicOutput(f"item index {pick!r} is not an integer") from None
        if isinstance(pick, float) and not float(pick).is_integer():
            raise InvalidHeuristicOutput(f"item index {pick!r} is not integral")
        if not 0 <= idx < len(feasible):
            raise InvalidHeuristicOutput(f"item index {idx} outside the feasible list of {len(feasible)}")
        item = feasible[idx]
        chosen.append(item)
        remaining -= float(weights[item])
        available.remove(item)


def score_instance(instance: dict, heuristic) -> float:
    chosen = construct_kp(instance, heuristic)
    values = np.asarray(instance["values"], float)
    return float(values[chosen].sum())


def ratio_greedy(remaining_capacity, item_values, item_weights):
    """Highest value-to-weight ratio among the feasible items."""
    return int(np.argmax(item_values / item_weights))


def kp_exact(values: np.ndarray, weights: np.ndarray, capacity: float) -> float:
    """Exact optimum via depth-first branch and bound with a fractional bound."""
    values = np.asarray(values, float)
    weights = np.asarray(weights, float)
    n = len(values)
    if n > KP_EXACT_MAX_ITEMS:
        raise ValueError(f"kp_exact limited to n <= {KP_EXACT_MAX_ITEMS}, got {n}")
    order = np.argsort(-(values / weights))
    v = values[order]
    w = weights[order]

    def fractional_bound(i: int, room: float) -> float:
        bound = 0.0
        while i < n and w[i] <= room:
            bound += v[i]
            room -= w[i]
            i += 1
        if i < n:
            bound += v[i] * (room / w[i])
        return bound

    best = 0.0
    stack = [(0, float(capacity), 0.0)]
    while stack:
        i, room, value = stack.pop()
        if value > best:
            best = value
        if i == n or value + fractional_bound(i, room) <= best + 1e-12:
            continue
        stack.append((i + 1, room, value))
        if w[i] <= room:
            stack.append((i + 1, room - w[i], value + v[i]))
    return best
