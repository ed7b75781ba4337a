"""Admissible vector sets: enumeration, greedy growth, brute-force verifier.

Vectors live in {0, 1, 2}^n with exactly w non-zero entries.  A set is
admissible when every three distinct members have some coordinate whose
three values form the multiset {0,0,1}, {0,0,2} or {0,1,2}.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Iterator, Sequence

import numpy as np

Vector = tuple[int, ...]

_GOOD_TRIPLES = ((0, 0, 1), (0, 0, 2), (0, 1, 2))

# For each unordered pair of coordinate values, the third values that would
# leave the coordinate unusable as a witness for the triple condition.
_BAD_THIRD = {
    (0, 0): (0,),
    (0, 1): (1,),
    (0, 2): (2,),
    (1, 1): (0, 1, 2),
    (1, 2): (1, 2),
    (2, 2): (0, 1, 2),
}


def gen_asp(n: int, w: int) -> dict:
    if not 0 < w <= n:
        raise ValueError(f"need 0 < w <= n, got n={n} w={w}")
    return {"n": int(n), "w": int(w)}


def enumerate_vectors(n: int, w: int) -> Iterator[Vector]:
    """All candidate vectors: support patterns outer, {1,2} value patterns inner."""
    for support in itertools.combinations(range(n), w):
        for pattern in itertools.product((1, 2), repeat=w):
            vec = [0] * n
            for pos, val in zip(support, pattern):
                vec[pos] = val
            yield tuple(vec)


def candidate_count(n: int, w: int) -> int:
    return math.comb(n, w) * 2**w


def asp_admissible(existing: Sequence[Vector], candidate: Vector) -> bool:
    """Plain reference check of the candidate against every pair in the set."""
    for a, b in itertools.combinations(existing, 2):
        if not any(
            tuple(sorted((a[i], b[i], candidate[i]))) in _GOOD_TRIPLES
            for i in range(len(candidate))
        ):
            return False
    return True


def construct_asp(n: int, w: int, heuristic: Callable) -> list[Vector]:
    """Score every candidate, then greedily add admissible ones, best first.

    Admissibility against all accepted pairs is tracked with one bitmask per
    (coordinate, value): bit p is set when value v at coordinate i cannot
    serve as a witness for pair p.  A candidate fails exactly when the AND
    of its n selected masks is non-zero.
    """
    from evotree.problems import InvalidHeuristicOutput

    scored = []
    for vec in enumerate_vectors(n, w):
        try:
            score = float(heuristic(vec, n, w))
        except (TypeError, ValueError):
            raise InvalidHeuristicOutput("vector score is not a real number") from None
        if math.isnan(score) or math.isinf(score):
            raise InvalidHeuristicOutput(f"vector score {score!r} is not finite")
        scored.append((score, vec))
    scored.sort(key=lambda sv: (-sv[0], sv[1]))

    chosen: list[Vector] = []
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


def score_instance(instance: dict, heuristic) -> float:
    return float(len(construct_asp(int(instance["n"]), int(instance["w"]), heuristic)))


def uniform_score(vector, n, w):
    """Scores every vector equally, leaving order to the lexicographic tie rule."""
    return 0.0


def verify_admissible_set(vectors: Sequence[Vector]) -> bool:
    """Check every triple of distinct vectors directly (vectorized over pairs)."""
    m = len(vectors)
    if m < 3:
        return True
    arr = np.array(vectors, np.int8)
    n = arr.shape[1]
    counts = np.stack([(arr == v).astype(np.int8) for v in (0, 1, 2)], axis=2)  # m x n x 3
    # process vector k against all pairs (i, j) with i < j < k
    pair_counts = np.empty((m * (m - 1) // 2, n, 3), np.int8)
    filled = 0
    for k in range(m):
        ck = counts[k]
        if k >= 2:
            total = pair_counts[:filled] + ck  # per-triple value counts
            c0, c1, c2 = total[..., 0], total[..., 1], total[..., 2]
            ok = ((c0 == 2) & (c1 == 1)) | ((c0 == 2) & (c2 == 1)) | ((c0 == 1) & (c1 == 1) & (c2 == 1))
            if not ok.any(axis=1).all():
                return False
        if k >= 1:
            pair_counts[filled : filled + k] = counts[:k] + ck
            filled += k
    return True
