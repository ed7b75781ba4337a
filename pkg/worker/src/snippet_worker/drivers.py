"""Construction drivers, mirrored operation-for-operation from the engine.

The engine's evaluator and this worker must score the same snippet on the
same instances to the same floats, so every loop below repeats the engine's
arithmetic order exactly: same distance formula, same feasibility filters,
same validation rules, same score orientation (larger is better; tour
length and bin count are negated).
"""

from __future__ import annotations

import itertools
import math
from typing import Any, Callable, Sequence

import numpy as np

FUNCTION_NAMES = {
    "tsp": "select_next_node",
    "kp": "select_next_item",
    "bpp_online": "score_bins",
    "asp": "score_vector",
}


class InvalidOutput(ValueError):
    """The snippet returned something the construction loop cannot use."""


def decode_instance(problem: str, raw: dict[str, Any]) -> dict:
    if problem == "tsp":
        return {"coords": np.asarray(raw["coords"], float)}
    if problem == "kp":
        return {
            "values": np.asarray(raw["values"], float),
            "weights": np.asarray(raw["weights"], float),
            "capacity": float(raw["capacity"]),
        }
    if problem == "bpp_online":
        return {"items": np.asarray(raw["items"], int), "capacity": int(raw["capacity"])}
    if problem == "asp":
        return {"n": int(raw["n"]), "w": int(raw["w"])}
    raise ValueError(f"unknown problem {problem!r}")


def score_instance(problem: str, instance: dict, fn: Callable, start_node: int = 0) -> float:
    if problem == "tsp":
        return score_tsp(instance, fn, start_node)
    if problem == "kp":
        return score_kp(instance, fn)
    if problem == "bpp_online":
        return score_bpp_online(instance, fn)
    if problem == "asp":
        return score_asp(instance, fn)
    raise ValueError(f"unknown problem {problem!r}")


# ----- routing ---------------------------------------------------------------


def distance_matrix(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff**2).sum(-1))


def tour_length(tour: list[int], dist: np.ndarray) -> float:
    total = 0.0
    for a, b in zip(tour, tour[1:]):
        total += dist[a, b]
    return total + dist[tour[-1], tour[0]]


def construct_tsp(instance: dict, fn: Callable, start_node: int = 0) -> list[int]:
    coords = np.asarray(instance["coords"], float)
    n = len(coords)
    if not 0 <= start_node < n:
        raise ValueError(f"start_node {start_node} outside instance of size {n}")
    dist = distance_matrix(coords)
    tour = [start_node]
    unvisited = [i for i in range(n) if i != start_node]
    current = start_node
    while unvisited:
        choice = fn(current, start_node, np.array(unvisited), dist)
        try:
            nxt = int(choice)
        except (TypeError, ValueError):
            raise InvalidOutput(f"next node {choice!r} is not an integer") from None
        if isinstance(choice, float) and not float(choice).is_integer():
            raise InvalidOutput(f"next node {choice!r} is not integral")
        if nxt not in unvisited:
            raise InvalidOutput(f"next node {nxt} is not an unvisited node")
        tour.append(nxt)
        unvisited.remove(nxt)
        current = nxt
    return tour


def score_tsp(instance: dict, fn: Callable, start_node: int = 0) -> float:
    tour = construct_tsp(instance, fn, start_node)
    dist = distance_matrix(np.asarray(instance["coords"], float))
    return -tour_length(tour, dist)


# ----- knapsack ---------------------------------------------------------------


def construct_kp(instance: dict, fn: Callable) -> list[int]:
    values = np.asarray(instance["values"], float)
    weights = np.asarray(instance["weights"], float)
    remaining = float(instance["capacity"])
    available = list(range(len(values)))
    chosen: list[int] = []
    while True:
        feasible = [i for i in available if weights[i] <= remaining]
        if not feasible:
            return chosen
        pick = fn(remaining, values[feasible], weights[feasible])
        try:
            idx = int(pick)
        except (TypeError, ValueError):
            raise InvalidOutput(f"item index {pick!r} is not an integer") from None
        if isinstance(pick, float) and not float(pick).is_integer():
            raise InvalidOutput(f"item index {pick!r} is not integral")
        if not 0 <= idx < len(feasible):
            raise InvalidOutput(f"item index {idx} outside the feasible list of {len(feasible)}")
        item = feasible[idx]
        chosen.append(item)
        remaining -= float(weights[item])
        available.remove(item)


def score_kp(instance: dict, fn: Callable) -> float:
    chosen = construct_kp(instance, fn)
    values = np.asarray(instance["values"], float)
    return float(values[chosen].sum())


# ----- online bin packing -----------------------------------------------------


def construct_bpp_online(instance: dict, fn: Callable) -> int:
    items = np.asarray(instance["items"])
    capacity = float(instance["capacity"])
    bins: list[float] = []  # remaining capacities
    for raw_size in items:
        size = float(raw_size)
        feasible = [i for i, room in enumerate(bins) if room >= size]
        if not feasible:
            bins.append(capacity - size)
            continue
        scores = fn(size, np.array([bins[i] for i in feasible], float))
        arr = np.asarray(scores, float).ravel()
        if arr.shape != (len(feasible),):
            raise InvalidOutput(f"expected {len(feasible)} bin scores, got shape {np.shape(scores)}")
        if not np.isfinite(arr).all():
            raise InvalidOutput("bin scores must be finite")
        bins[feasible[int(np.argmax(arr))]] -= size
    return len(bins)


def score_bpp_online(instance: dict, fn: Callable) -> float:
    return -float(construct_bpp_online(instance, fn))


# ----- admissible vector sets ---------------------------------------------------

_GOOD_TRIPLES = ((0, 0, 1), (0, 0, 2), (0, 1, 2))

# third values that disqualify a coordinate as a witness, per value pair
_BAD_THIRD = {
    (0, 0): (0,),
    (0, 1): (1,),
    (0, 2): (2,),
    (1, 1): (0, 1, 2),
    (1, 2): (1, 2),
    (2, 2): (0, 1, 2),
}


def enumerate_vectors(n: int, w: int):
    for support in itertools.combinations(range(n), w):
        for pattern in itertools.product((1, 2), repeat=w):
            vec = [0] * n
            for pos, val in zip(support, pattern):
                vec[pos] = val
            yield tuple(vec)


def construct_asp(n: int, w: int, fn: Callable) -> list[tuple[int, ...]]:
    scored = []
    for vec in enumerate_vectors(n, w):
        try:
            score = float(fn(vec, n, w))
        except (TypeError, ValueError):
            raise InvalidOutput("vector score is not a real number") from None
        if math.isnan(score) or math.isinf(score):
            raise InvalidOutput(f"vector score {score!r} is not finite")
        scored.append((score, vec))
    scored.sort(key=lambda sv: (-sv[0], sv[1]))

    chosen: list[tuple[int, ...]] = []
    bad = [[0, 0, 0] for _ in range(n)]
    pair_count = 0
    for _, vec in scored:
        if pair_count:
            mask = (1 << pair_count) - 1
            for i, v in enumerate(vec):
                mask &= bad[i][v]
                if not mask:
                    break
            if mask:
                continue
        for member in chosen:
            bit = 1 << pair_count
            pair_count += 1
            for i in range(n):
                lo, hi = sorted((member[i], vec[i]))
                for bv in _BAD_THIRD[lo, hi]:
                    bad[i][bv] |= bit
        chosen.append(vec)
    return chosen


def score_asp(instance: dict, fn: Callable) -> float:
    return float(len(construct_asp(int(instance["n"]), int(instance["w"]), fn)))
