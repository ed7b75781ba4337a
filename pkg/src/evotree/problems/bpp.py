"""Online bin packing: Weibull streams, placement driver, fit baselines."""

from __future__ import annotations

import math

import numpy as np

WEIBULL_SHAPE = 3.0
WEIBULL_SCALE = 45.0


def gen_bpp_stream(n: int, capacity: int, rng: np.random.Generator) -> dict:
    """Item sizes: scaled Weibull draws, rounded up, clipped to [1, capacity]."""
    raw = WEIBULL_SCALE * rng.weibull(WEIBULL_SHAPE, n)
    items = np.clip(np.ceil(raw), 1, capacity).astype(int)
    return {"items": items, "capacity": int(capacity)}


def construct_bpp_online(instance: dict, heuristic) -> int:
    """Place items in arrival order; open a new bin only when nothing fits."""
    from evotree.problems import InvalidHeuristicOutput

    items = np.asarray(instance["items"])
    capacity = float(instance["capacity"])
    bins: list[float] = []  # remaining capacities
    for raw_size in items:
        size = float(raw_size)
        feasible = [i for i, room in enumerate(bins) if room >= size]
        if not feasible:
            bins.append(capacity - size)
            continue
        scores = heuristic(size, np.array([bins[i] for i in feasible], float))
        arr = np.asarray(scores, float).ravel()
        if arr.shape != (len(feasible),):
            raise InvalidHeuristicOutput(
                f"expected {len(feasible)} bin scores, got shape {np.shape(scores)}"
            )
        if not np.isfinite(arr).all():
            raise InvalidHeuristicOutput("bin scores must be finite")
        bins[feasible[int(np.argmax(arr))]] -= size
    return len(bins)


def score_instance(instance: dict, heuristic) -> float:
    return -float(construct_bpp_online(instance, heuristic))


def best_fit(item_size, remaining_capacities):
    """Prefer the bin left with the least room; ties go to the lowest index."""
    return -(remaining_capacities - item_size)


def first_fit(item_size, remaining_capacities):
    """Constant scores: argmax tie-breaking picks the lowest-index bin."""
    return np.zeros(len(remaining_capacities))


def bpp_lower_bound(items, capacity: float) -> int:
    """Total size divided by capacity, rounded up; ignores packing geometry."""
    total = float(np.asarray(items, float).sum())
    return int(math.ceil(total / float(capacity)))
