"""Dataset assembly and instance-file serialization."""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from evotree.config import DatasetSpec
from evotree.problems import asp, bpp, kp, tsp

# Frozen seeds whose 1,000-instance means reproduce the published baseline
# figures (nearest-neighbor tours, ratio-greedy knapsacks, fit-rule packing).
REPRODUCTION_SEEDS = {"tsp": 3, "kp": 98, "bpp_online": 123}


def build_dataset(spec: DatasetSpec) -> list[dict]:
    """Materialize the evaluation instances for one run, deterministically."""
    p = spec.params
    if spec.problem == "tsp":
        rng = np.random.default_rng(p["seed"])
        return [tsp.gen_tsp(p["nodes"], rng) for _ in range(p["count"])]
    if spec.problem == "kp":
        rng = np.random.default_rng(p["seed"])
        return [kp.gen_kp(p["items"], p["capacity"], rng) for _ in range(p["count"])]
    if spec.problem == "bpp_online":
        rng = np.random.default_rng(p["seed"])
        return [bpp.gen_bpp_stream(n, cap, rng) for n, cap in p["streams"]]
    if spec.problem == "asp":
        return [asp.gen_asp(p["n"], p["w"])]
    raise ValueError(f"unknown problem {spec.problem!r}")


def instance_to_json(problem: str, instance: dict) -> dict[str, Any]:
    if problem == "tsp":
        return {"coords": np.asarray(instance["coords"], float).tolist()}
    if problem == "kp":
        return {
            "values": np.asarray(instance["values"], float).tolist(),
            "weights": np.asarray(instance["weights"], float).tolist(),
            "capacity": float(instance["capacity"]),
        }
    if problem == "bpp_online":
        return {
            "items": np.asarray(instance["items"]).astype(int).tolist(),
            "capacity": int(instance["capacity"]),
        }
    if problem == "asp":
        return {"n": int(instance["n"]), "w": int(instance["w"])}
    raise ValueError(f"unknown problem {problem!r}")


def instance_from_json(problem: str, raw: dict[str, Any]) -> dict:
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


def save_instances(path: str, spec: DatasetSpec, instances: list[dict]) -> None:
    doc = {
        "problem": spec.problem,
        "params": spec.params,
        "instances": [instance_to_json(spec.problem, inst) for inst in instances],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_instances(path: str) -> tuple[str, list[dict]]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    problem = doc["problem"]
    return problem, [instance_from_json(problem, raw) for raw in doc["instances"]]
