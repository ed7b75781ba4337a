"""End-to-end search driver.

Builds the initial pool of candidates, then repeats the four-stage loop:
exploration-decayed selection with progressive widening, expansion through
the LLM actions, evaluation of every new candidate, and max-backpropagation.
The budget counter t advances once per generation attempt whether or not the
attempt yields a valid candidate, and checkpoints taken at iteration
boundaries allow byte-identical resumption under the replay backend.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from evotree.actions import (
    ContextCandidate,
    GenerationParseError,
    collect_path_candidates,
    context_from_node,
    parse_generation,
    render_alignment_prompt,
    render_prompt,
    sample_subtree_representatives,
)
from evotree.config import RunConfig
from evotree.evaluation import STATUS_OK, WorkerProtocolError, evaluate_candidate
from evotree.gateway import AllAttemptsFailed, ChatRequest, GatewayError, TransportError, with_retry
from evotree.problems import get_spec
from evotree.search import (
    EliteSet,
    QualityBounds,
    SearchNode,
    SearchTree,
    backpropagate,
    decay_lambda,
    select_child,
    should_widen,
)

INIT_RETRY_FACTOR = 3  # cap on initialization attempts, times the pool size
MAX_EVOLUTION_CONTEXT = 5  # the crossover-from-subtrees action reads at most 5 candidates


class InitializationExhausted(RuntimeError):
    """Too many failed generations while building the initial pool."""


class ConfigMismatch(RuntimeError):
    """Checkpoint was produced under a different configuration."""


@dataclass(frozen=True)
class CurvePoint:
    t: int
    best_g: float
    best_id: int


@dataclass(frozen=True)
class RunResult:
    best_id: int
    best_code: str
    best_description: str
    best_g: float
    t: int
    node_count: int
    curve: tuple[CurvePoint, ...]


def _encode_rng_state(state: tuple) -> list:
    version, internal, gauss = state
    return [version, list(internal), gauss]


def _decode_rng_state(raw: list) -> tuple:
    version, internal, gauss = raw
    return (version, tuple(internal), gauss)


def canonical_json(document: Any) -> str:
    """Stable serialization used wherever byte-identical output matters."""
    return json.dumps(document, sort_keys=True, separators=(",", ":"))


class Engine:
    """Owns the tree, the budget, and all randomness of one run."""

    def __init__(self, config: RunConfig, backend, executor, instances: list[dict]) -> None:
        self.config = config
        self.evo = config.evolution
        self.spec = get_spec(self.evo.problem)
        self.backend = backend
        self.executor = executor
        self.instances = instances
        self.tree = SearchTree()
        self.bounds = QualityBounds()
        self.elite = EliteSet()
        self.rng = random.Random(self.evo.seed)
        self.t = 0
        self.curve: list[CurvePoint] = []
        self.best_id: int | None = None
        self.best_g: float | None = None
        self.events: list[dict] = []  # per-iteration diagnostics, not persisted
        self._last_checkpoint_t = 0

    # ----- single generation attempt ------------------------------------

    def _chat(self, prompt: str) -> str:
        return with_retry(self.backend, ChatRequest(prompt=prompt)).text

    def _align_description(self, design_idea: str, code: str) -> str:
        """Second LLM pass re-describing the code; falls back to the draft idea."""
        prompt = render_alignment_prompt(self.spec, design_idea, code, black_box=self.evo.black_box)
        try:
            text = self._chat(prompt).strip()
        except (TransportError, AllAttemptsFailed):
            return design_idea
        return text or design_idea

    def _attempt(self, action: str, context: list[ContextCandidate], parent: SearchNode) -> SearchNode | None:
        """One generation: prompt, parse, align, evaluate. Always costs one t."""
        prompt = render_prompt(action, self.spec, context, black_box=self.evo.black_box)
        text = self._chat(prompt)
        node = None
        try:
            parsed = parse_generation(text, self.spec.function_name)
        except GenerationParseError:
            parsed = None
        if parsed is not None:
            description = self._align_description(parsed.description_draft, parsed.code)
            outcome = evaluate_candidate(
                parsed.code, self.evo.problem, self.instances, self.executor, self.evo.eval_timeout_s
            )
            if outcome.status == STATUS_OK:
                node = self.tree.attach(parent, action, parsed.code, description, outcome.score)
        self.t += 1
        if node is not None:
            self._register(node)
        return node

    def _register(self, node: SearchNode) -> None:
        self.bounds.update(node.performance)
        self.elite.update(node)
        if self.best_g is None or node.performance > self.best_g:
            self.best_g = node.performance
            self.best_id = node.id
            self.curve.append(CurvePoint(t=self.t, best_g=node.performance, best_id=node.id))

    def _elite_reference(self) -> ContextCandidate:
        entry = self.elite.sample(self.rng)
        return ContextCandidate(code=entry.code, description=entry.description, objective=-entry.performance)

    # ----- initialization -------------------------------------------------

    def initialize(self) -> None:
        """One fresh candidate, then crossovers over the growing initial pool."""
        target = self.evo.resolved_init_size
        max_attempts = INIT_RETRY_FACTOR * target
        attempts = 0
        while len(self.tree.root.children) < target:
            if attempts >= max_attempts:
                raise InitializationExhausted(
                    f"{len(self.tree.root.children)} of {target} initial candidates "
                    f"after {attempts} attempts"
                )
            attempts += 1
            pool = self.tree.root.children
            if not pool:
                node = self._attempt("i1", [], self.tree.root)
            else:
                context = [context_from_node(n) for n in pool[-MAX_EVOLUTION_CONTEXT:]]
                node = self._attempt("e1", context, self.tree.root)
            if node is not None:
                backpropagate(self.tree.root, 1)

    # ----- one outer-loop iteration ---------------------------------------

    def iterate_once(self) -> dict:
        evo = self.evo
        lam = decay_lambda(evo.explore_init, self.t, evo.budget)
        event: dict[str, Any] = {
            "t_start": self.t,
            "lam": lam,
            "root_widen": None,
            "descent_widens": [],
            "expanded": None,
            "created": [],
        }
        root = self.tree.root

        # widen the root pool when the visit count allows another subtree
        if should_widen(root.N, len(root.children), evo.widen_alpha) and len(root.children) >= 2:
            context = sample_subtree_representatives(root, self.rng)
            child = self._attempt("e1", context, root)
            event["root_widen"] = {"parent": 0, "child": None if child is None else child.id}
            if child is not None:
                backpropagate(root, 1)

        # descend; internal nodes passed through may each gain one widened child
        node = root
        while node.children and node.depth < evo.max_depth:
            node = select_child(node, self.bounds, lam)
            if node.children and should_widen(node.N, len(node.children), evo.widen_alpha):
                context = [self._elite_reference(), context_from_node(node)]
                child = self._attempt("e2", context, node)
                event["descent_widens"].append(
                    {"parent": node.id, "child": None if child is None else child.id}
                )
                if child is not None:
                    backpropagate(node, 1)
        event["expanded"] = node.id

        # expansion: crossover, path synthesis, then k of each mutation flavor
        created = 0
        child = self._attempt("e2", [self._elite_reference(), context_from_node(node)], node)
        if child is not None:
            created += 1
            event["created"].append(child.id)
        path = collect_path_candidates(node)
        if len(path) >= 2:
            child = self._attempt("s1", path, node)
            if child is not None:
                created += 1
                event["created"].append(child.id)
        for action in ("m1", "m2"):
            for _ in range(evo.expand_count):
                child = self._attempt(action, [context_from_node(node)], node)
                if child is not None:
                    created += 1
                    event["created"].append(child.id)
        if created:
            backpropagate(node, created)

        event["t_end"] = self.t
        self.events.append(event)
        return event

    # ----- checkpointing ---------------------------------------------------

    def checkpoint_document(self) -> dict:
        return {
            "config_hash": self.config.content_hash(),
            "t": self.t,
            "tree": self.tree_document(),
            "bounds": self.bounds.to_dict(),
            "elite": self.elite.to_dict(),
            "rng_state": _encode_rng_state(self.rng.getstate()),
            "replay_cursor": getattr(self.backend, "cursor", None),
            "curve": [[p.t, p.best_g, p.best_id] for p in self.curve],
            "best_id": self.best_id,
            "last_checkpoint_t": self._last_checkpoint_t,
        }

    def write_checkpoint(self) -> Path:
        self._last_checkpoint_t = self.t
        path = Path(self.config.out_dir) / "checkpoint.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = self.checkpoint_document()
        doc["last_checkpoint_t"] = self._last_checkpoint_t
        path.write_text(canonical_json(doc) + "\n")
        return path

    def _maybe_checkpoint(self) -> None:
        if self.t - self._last_checkpoint_t >= self.config.checkpoint_interval:
            self.write_checkpoint()

    @classmethod
    def from_checkpoint(
        cls, checkpoint: dict, config: RunConfig, backend, executor, instances: list[dict]
    ) -> Engine:
        if checkpoint.get("config_hash") != config.content_hash():
            raise ConfigMismatch("checkpoint was written under a different configuration")
        engine = cls(config, backend, executor, instances)
        engine.tree = SearchTree.from_export(checkpoint["tree"]["nodes"])
        engine.bounds = QualityBounds.from_dict(checkpoint["bounds"])
        engine.elite = EliteSet.from_dict(checkpoint["elite"])
        engine.rng.setstate(_decode_rng_state(checkpoint["rng_state"]))
        engine.t = checkpoint["t"]
        engine.curve = [CurvePoint(t=row[0], best_g=row[1], best_id=row[2]) for row in checkpoint["curve"]]
        engine.best_id = checkpoint["best_id"]
        if engine.best_id is not None:
            engine.best_g = engine.tree.nodes[engine.best_id].performance
        engine._last_checkpoint_t = checkpoint.get("last_checkpoint_t", engine.t)
        cursor = checkpoint.get("replay_cursor")
        if cursor is not None and hasattr(backend, "cursor"):
            backend.cursor = cursor
        return engine

    # ----- whole-run drivers ------------------------------------------------

    def run(self) -> RunResult:
        try:
            if self.t == 0 and len(self.tree) == 1:
                self.initialize()
                self._maybe_checkpoint()
            while self.t <= self.evo.budget:
                self.iterate_once()
                self._maybe_checkpoint()
        except (GatewayError, WorkerProtocolError):
            self.write_checkpoint()
            raise
        self.write_checkpoint()
        return self.result()

    def result(self) -> RunResult:
        best = self.tree.best_node()
        return RunResult(
            best_id=best.id,
            best_code=best.code,
            best_description=best.description,
            best_g=best.performance,
            t=self.t,
            node_count=len(self.tree),
            curve=tuple(self.curve),
        )

    # ----- exports ------------------------------------------------------------

    def tree_document(self) -> dict:
        return {
            "meta": {
                "t": self.t,
                "q_max": self.bounds.q_max,
                "q_min": self.bounds.q_min,
                "elite": self.elite.ids(),
                "seed": self.evo.seed,
            },
            "nodes": self.tree.export_nodes(),
        }


def export_curve_csv(curve: list[CurvePoint] | tuple[CurvePoint, ...]) -> str:
    lines = ["t,best_g"]
    lines.extend(f"{p.t},{p.best_g!r}" for p in curve)
    return "\n".join(lines) + "\n"


def export_tree_dot(tree: SearchTree) -> str:
    """Graph description of the search tree for visual inspection."""

    def esc(text: str) -> str:
        return text.replace("\\", "\\\\").replace('"', '\\"')

    lines = ["digraph search_tree {", "  node [shape=box];"]
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        if node.parent is None:
            label = "root"
        else:
            label = f"{node.id} {node.action} g={node.performance:.5f} N={node.N}"
        lines.append(f'  n{node.id} [label="{esc(label)}"];')
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        if node.parent is not None:
            lines.append(f"  n{node.parent.id} -> n{node.id};")
    lines.append("}")
    return "\n".join(lines) + "\n"
