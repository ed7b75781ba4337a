"""Seeded benchmark reports: candidates and baselines against references.

Scores inside the search are oriented so larger is better; reports convert
back to each problem's natural objective (tour length, packed value, bin
count, set size) and attach a percentage gap against the strongest reference
available: an exact oracle when the instance size permits, the bin-count
lower bound for packing streams, or a named baseline heuristic otherwise.
"""

from __future__ import annotations

import math

from evotree.problems import BASELINES, score_instance
from evotree.problems import asp, bpp, kp, tsp

# problems where the natural objective is minimized (score is its negation)
_MINIMIZED = {"tsp", "bpp_online"}


def natural_objective(problem: str, score: float) -> float:
    return -score if problem in _MINIMIZED else score


def run_heuristic(problem: str, heuristic, instances: list[dict], start_node: int = 0) -> list[float]:
    """Oriented per-instance scores for a callable heuristic."""
    return [score_instance(problem, inst, heuristic, start_node) for inst in instances]


def baseline_heuristic(problem: str, name: str):
    try:
        return BASELINES[problem][name]
    except KeyError:
        known = ", ".join(sorted(BASELINES.get(problem, {})))
        raise ValueError(f"unknown baseline {name!r} for {problem!r} (known: {known})") from None


def default_baseline(problem: str) -> str:
    return {"tsp": "nearest_greedy", "kp": "ratio_greedy", "bpp_online": "best_fit", "asp": "uniform"}[problem]


def reference_values(problem: str, instances: list[dict], start_node: int = 0) -> tuple[list[float], str]:
    """Per-instance reference objectives plus a label describing their source."""
    if problem == "tsp":
        n = len(instances[0]["coords"])
        if n <= tsp.HELD_KARP_MAX_NODES:
            refs = [tsp.held_karp(tsp.distance_matrix(inst["coords"])) for inst in instances]
            return refs, "exact"
    elif problem == "kp":
        n = len(instances[0]["values"])
        if n <= kp.KP_EXACT_MAX_ITEMS:
            refs = [kp.kp_exact(inst["values"], inst["weights"], inst["capacity"]) for inst in instances]
            return refs, "exact"
    elif problem == "bpp_online":
        refs = [float(bpp.bpp_lower_bound(inst["items"], inst["capacity"])) for inst in instances]
        return refs, "lower_bound"
    elif problem == "asp":
        refs = [float(math.comb(inst["n"], inst["w"])) for inst in instances]
        return refs, "upper_bound"
    name = default_baseline(problem)
    base = baseline_heuristic(problem, name)
    scores = run_heuristic(problem, base, instances, start_node)
    return [natural_objective(problem, s) for s in scores], f"baseline:{name}"


def gap_percent(problem: str, value: float, reference: float) -> float:
    """Positive when the value is worse than the reference."""
    if reference == 0:
        raise ValueError("reference objective is zero; gap undefined")
    if problem in _MINIMIZED:
        return (value - reference) / reference * 100.0
    return (reference - value) / reference * 100.0


def report(problem: str, heuristic, instances: list[dict], start_node: int = 0) -> dict:
    """Mean natural objective and mean gap versus the best available reference."""
    scores = run_heuristic(problem, heuristic, instances, start_node)
    values = [natural_objective(problem, s) for s in scores]
    refs, ref_kind = reference_values(problem, instances, start_node)
    gaps = [gap_percent(problem, v, r) for v, r in zip(values, refs)]
    return {
        "problem": problem,
        "instances": len(instances),
        "mean_objective": math.fsum(values) / len(values),
        "reference": ref_kind,
        "mean_reference": math.fsum(refs) / len(refs),
        "mean_gap_pct": math.fsum(gaps) / len(gaps),
    }


def baseline_report(problem: str, name: str, instances: list[dict], start_node: int = 0) -> dict:
    out = report(problem, baseline_heuristic(problem, name), instances, start_node)
    out["baseline"] = name
    return out
