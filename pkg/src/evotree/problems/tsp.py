"""Tour construction: instances, driver, nearest-neighbor baseline, exact oracle."""

from __future__ import annotations

import numpy as np

HELD_KARP_MAX_NODES = 14


def gen_tsp(n: int, rng: np.random.Generator) -> dict:
    """Nodes drawn uniformly from the unit square."""
    return {"coords": rng.random((n, 2))}


def distance_matrix(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff**2).sum(-1))


def tour_length(tour: list[int], dist: np.ndarray) -> float:
    total = 0.0
    for a, b in zip(tour, tour[1:]):
        total += dist[a, b]
    return total + dist[tour[-1], tour[0]]


def construct_tsp(instance: dict, heuristic, start_node: int = 0) -> list[int]:
    """Build a closed tour by asking the heuristic for one node at a time."""
    from evotree.problems import InvalidHeuristicOutput

    coords = np.asarray(instance["coords"], float)
    n = len(coords)
    if not 0 <= start_node < n:
        raise ValueError(f"start_node {start_node} outside instance of size {n}")
    dist = distance_matrix(coords)
    tour = [start_node]
    unvisited = [i for i in range(n) if i != start_node]
    current = start_node
    while unvisited:
        choice = heuristic(current, start_node, np.array(unvisited), dist)
        try:
            nxt = int(choice)
        except (TypeError, ValueError):
            raise InvalidHeuristicOutput(f"next node {choice!r} is not an integer") from None
        if isinstance(choice, float) and not float(choice).is_integer():
            raise InvalidHeuristicOutput(f"next node {choice!r} is not integral")
        if nxt not in unvisited:
            raise InvalidHeuristicOutput(f"next node {nxt} is not an unvisited node")
        tour.append(nxt)
        unvisited.remove(nxt)
        current = nxt
    return tour


def score_instance(instance: dict, heuristic, start_node: int = 0) -> float:
    tour = construct_tsp(instance, heuristic, start_node)
    dist = distance_matrix(np.asarray(instance["coords"], float))
    return -tour_length(tour, dist)


def nearest_greedy(current_node, destination_node, unvisited_nodes, distance_matrix):
    """Closest unvisited node; ties go to the lowest node index."""
    row = distance_matrix[current_node][unvisited_nodes]
    return int(unvisited_nodes[int(np.argmin(row))])


def held_karp(dist: np.ndarray) -> float:
    """Exact closed-tour optimum via subset dynamic programming (n <= 14)."""
    n = len(dist)
    if n > HELD_KARP_MAX_NODES:
        raise ValueError(f"held_karp limited to n <= {HELD_KARP_MAX_NODES}, got {n}")
    if n == 1:
        return 0.0
    if n == 2:
        return float(dist[0, 1] + dist[1, 0])
    # cost[mask][j]: cheapest path over node set mask, starting at 0, ending at j
    size = 1 << n
    cost = np.full((size, n), np.inf)
    cost[1][0] = 0.0
    for mask in range(1, size):
        if not mask & 1:
            continue
        for j in range(n):
            if not mask & (1 << j) or not np.isfinite(cost[mask][j]):
                continue
            base = cost[mask][j]
            for k in range(1, n):
                if mask & (1 << k):
                    continue
                nmask = mask | (1 << k)
                cand = base + dist[j, k]
                if cand < cost[nmask][k]:
                    cost[nmask][k] = cand
    full = size - 1
    return float(min(cost[full][j] + dist[j, 0] for j in range(1, n)))
