"""Run configuration: search parameters, dataset specs, backend selection."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any

PROBLEMS = ("tsp", "kp", "bpp_online", "asp")

# Default evaluation datasets, one per problem.
_DATASET_DEFAULTS: dict[str, dict[str, Any]] = {
    "tsp": {"count": 64, "nodes": 50, "seed": 0},
    "kp": {"count": 64, "items": 100, "capacity": 25.0, "seed": 0},
    "bpp_online": {"streams": [[1000, 100], [1000, 500], [5000, 100], [5000, 500]], "seed": 0},
    "asp": {"n": 15, "w": 10},
}


class ConfigError(ValueError):
    """Raised for unknown fields, bad values, or inconsistent combinations."""


@dataclass(frozen=True)
class DatasetSpec:
    """Evaluation dataset description; params are problem-specific."""

    problem: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        merged = dict(_DATASET_DEFAULTS[self.problem])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ConfigError(f"unknown dataset params for {self.problem}: {sorted(unknown)}")
        merged.update(self.params)
        object.__setattr__(self, "params", merged)


@dataclass(frozen=True)
class EvolutionConfig:
    """Parameters of the tree search itself."""

    problem: str = "tsp"
    budget: int = 1000            # total evaluation attempts allowed
    init_size: int | None = None  # initial root children; None resolves per black_box
    max_depth: int = 10           # selection descends while depth < max_depth
    expand_count: int = 2         # mutation children of each kind per expansion
    explore_init: float = 0.1     # initial exploration weight, decays linearly to 0
    widen_alpha: float = 0.5      # widen a node when floor(visits**alpha) >= child count
    eval_timeout_s: float = 60.0  # wall budget for scoring one candidate on the dataset
    seed: int = 0
    black_box: bool = False       # hide problem wording and input names in prompts
    start_node: int = 0           # fixed first node for tour construction

    def __post_init__(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.budget < 1 or self.max_depth < 1 or self.expand_count < 0:
            raise ConfigError("budget and max_depth must be >= 1, expand_count >= 0")
        if self.init_size is not None and self.init_size < 1:
            raise ConfigError("init_size must be >= 1")
        if not (0.0 < self.widen_alpha < 1.0) or self.explore_init < 0.0:
            raise ConfigError("widen_alpha in (0, 1) and explore_init >= 0 required")
        if self.eval_timeout_s <= 0:
            raise ConfigError("eval_timeout_s must be positive")

    @property
    def resolved_init_size(self) -> int:
        if self.init_size is not None:
            return self.init_size
        return 10 if self.black_box else 4


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs: search, dataset, backend, executor, outputs."""

    evolution: EvolutionConfig
    dataset: DatasetSpec
    backend: str = "replay"                      # "replay" | "http"
    replay_script: str | None = None
    executor: str = "native"                     # "native" | "external"
    worker_cmd: tuple[str, ...] | None = None    # external executor launch command
    checkpoint_interval: int = 25                # evaluations between checkpoints
    out_dir: str = "run_out"

    def __post_init__(self) -> None:
        if self.backend not in ("replay", "http"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.executor not in ("native", "external"):
            raise ConfigError(f"unknown executor {self.executor!r}")
        if self.backend == "replay" and not self.replay_script:
            raise ConfigError("replay backend requires replay_script")
        if self.evolution.problem != self.dataset.problem:
            raise ConfigError("evolution.problem and dataset.problem disagree")
        if self.checkpoint_interval < 1:
            raise ConfigError("checkpoint_interval must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if self.worker_cmd is not None:
            d["worker_cmd"] = list(self.worker_cmd)
        return d

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> RunConfig:
        raw = dict(raw)
        try:
            evo_raw = dict(raw.pop("evolution"))
            ds_raw = dict(raw.pop("dataset"))
        except KeyError as exc:
            raise ConfigError(f"missing config section: {exc}") from None
        known_evo = set(EvolutionConfig.__dataclass_fields__)
        bad = set(evo_raw) - known_evo
        if bad:
            raise ConfigError(f"unknown evolution fields: {sorted(bad)}")
        known_run = set(cls.__dataclass_fields__) - {"evolution", "dataset"}
        bad = set(raw) - known_run
        if bad:
            raise ConfigError(f"unknown run fields: {sorted(bad)}")
        if raw.get("worker_cmd") is not None:
            raw["worker_cmd"] = tuple(raw["worker_cmd"])
        evolution = EvolutionConfig(**evo_raw)
        dataset = DatasetSpec(ds_raw.pop("problem", evolution.problem), ds_raw.pop("params", ds_raw))
        return cls(evolution=evolution, dataset=dataset, **raw)

    @classmethod
    def load(cls, path: str) -> RunConfig:
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def content_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()
