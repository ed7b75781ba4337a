"""Problem suite: instance generators, construction drivers, baselines, oracles.

Every driver turns one heuristic function plus one instance into a complete
solution and reports a score oriented so that larger is better (tour length
and bin count are negated).  Drivers validate heuristic outputs and raise
InvalidHeuristicOutput on anything malformed.
"""

from __future__ import annotations

from dataclasses import dataclass

from evotree.problems import asp, bpp, kp, tsp


class InvalidHeuristicOutput(ValueError):
    """A heuristic returned something the construction loop cannot use."""


@dataclass(frozen=True)
class ProblemSpec:
    """Prompt-facing description of one problem's heuristic slot."""

    name: str
    description: str
    framework_description: str
    function_name: str
    input_names: tuple[str, ...]
    output_names: tuple[str, ...]


SPECS: dict[str, ProblemSpec] = {
    "tsp": ProblemSpec(
        name="tsp",
        description=(
            "Solving Traveling Salesman Problem (TSP) with constructive heuristics. "
            "TSP requires finding the shortest path that visits all given nodes and "
            "returns to the starting node."
        ),
        framework_description=(
            "The select_next_node function takes as input the current node, the "
            "destination_node, a set of unvisited nodes, and a distance matrix, and "
            "returns the next node to visit."
        ),
        function_name="select_next_node",
        input_names=("current_node", "destination_node", "unvisited_nodes", "distance_matrix"),
        output_names=("next_node",),
    ),
    "kp": ProblemSpec(
        name="kp",
        description=(
            "Solving 0-1 Knapsack Problem (KP) with constructive heuristics. "
            "KP requires selecting a subset of items to maximize the total value "
            "without exceeding the knapsack capacity."
        ),
        framework_description=(
            "The select_next_item function takes as input the remaining capacity of "
            "the knapsack and the values and weights of the items that still fit, and "
            "returns the index of the next item to add."
        ),
        function_name="select_next_item",
        input_names=("remaining_capacity", "item_values", "item_weights"),
        output_names=("item_index",),
    ),
    "bpp_online": ProblemSpec(
        name="bpp_online",
        description=(
            "Solving online Bin Packing Problem (BPP) with constructive heuristics. "
            "Online BPP requires assigning each arriving item to a bin immediately, "
            "using as few bins as possible."
        ),
        framework_description=(
            "The score_bins function takes as input the size of the current item and "
            "the remaining capacities of the feasible bins, and returns a score for "
            "placing the item into each of these bins."
        ),
        function_name="score_bins",
        input_names=("item_size", "remaining_capacities"),
        output_names=("bin_scores",),
    ),
    "asp": ProblemSpec(
        name="asp",
        description=(
            "Solving Admissible Set Problem (ASP) with constructive heuristics. "
            "ASP requires building a largest possible set of vectors with entries "
            "from {0, 1, 2} and a fixed number of non-zero entries, such that every "
            "three distinct vectors in the set have a coordinate whose three values "
            "are 0, 0, 1 or 0, 0, 2 or 0, 1, 2 in some order."
        ),
        framework_description=(
            "The score_vector function takes as input a candidate vector together "
            "with its dimension n and its number of non-zero entries w, and returns "
            "a score; vectors with higher scores are preferred when greedily growing "
            "the admissible set."
        ),
        function_name="score_vector",
        input_names=("vector", "n", "w"),
        output_names=("score",),
    ),
}


def get_spec(problem: str) -> ProblemSpec:
    try:
        return SPECS[problem]
    except KeyError:
        raise ValueError(f"unknown problem {problem!r}") from None


def score_instance(problem: str, instance: dict, heuristic, start_node: int = 0) -> float:
    """Run the problem's construction driver; larger scores are better."""
    if problem == "tsp":
        return tsp.score_instance(instance, heuristic, start_node)
    if problem == "kp":
        return kp.score_instance(instance, heuristic)
    if problem == "bpp_online":
        return bpp.score_instance(instance, heuristic)
    if problem == "asp":
        return asp.score_instance(instance, heuristic)
    raise ValueError(f"unknown problem {problem!r}")


# Named baseline heuristics, keyed as they appear in native code registries.
BASELINES = {
    "tsp": {"nearest_greedy": tsp.nearest_greedy},
    "kp": {"ratio_greedy": kp.ratio_greedy},
    "bpp_online": {"best_fit": bpp.best_fit, "first_fit": bpp.first_fit},
    "asp": {"uniform": asp.uniform_score},
}
