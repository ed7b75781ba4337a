"""Command-line front end.

Subcommands: run, resume, evaluate, gen-instances, bench-baselines,
export-tree, export-curve.  Exit codes: 0 success, 2 configuration problem,
3 initialization exhausted, 4 backend or worker failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from evotree import bench
from evotree.config import ConfigError, DatasetSpec, RunConfig
from evotree.engine import (
    ConfigMismatch,
    Engine,
    InitializationExhausted,
    canonical_json,
    export_curve_csv,
    export_tree_dot,
)
from evotree.evaluation import (
    NativeExecutor,
    NativeRegistry,
    WorkerPool,
    WorkerProtocolError,
    evaluate_candidate,
)
from evotree.gateway import GatewayError, HttpBackend, ReplayBackend
from evotree.problems import BASELINES, get_spec
from evotree.problems.datasets import build_dataset, load_instances, save_instances
from evotree.search import SearchTree

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INIT = 3
EXIT_BACKEND = 4


def default_registry(problem: str, function_name: str) -> NativeRegistry:
    """Registry with the named baselines preregistered under stub code keys."""
    registry = NativeRegistry()
    for name, heuristic in BASELINES[problem].items():
        registry.register(NativeRegistry.stub_code(function_name, name), heuristic)
    return registry


def _build_backend(config: RunConfig):
    if config.backend == "replay":
        return ReplayBackend.from_file(config.replay_script)
    return HttpBackend()


def _build_executor(config: RunConfig):
    start_node = config.evolution.start_node
    if config.executor == "native":
        spec = get_spec(config.evolution.problem)
        return NativeExecutor(default_registry(config.evolution.problem, spec.function_name), start_node)
    return WorkerPool.spawn(size=1, cmd=config.worker_cmd, start_node=start_node)


def _write_artifacts(engine: Engine, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tree.json").write_text(canonical_json(engine.tree_document()) + "\n")
    (out / "tree.dot").write_text(export_tree_dot(engine.tree))
    (out / "curve.csv").write_text(export_curve_csv(engine.curve))
    result = engine.result()
    best = {
        "id": result.best_id,
        "g": result.best_g,
        "description": result.best_description,
        "code": result.best_code,
        "t": result.t,
        "nodes": result.node_count,
    }
    (out / "best.json").write_text(json.dumps(best, indent=2) + "\n")


def _finish_run(engine: Engine) -> int:
    result = engine.run()
    _write_artifacts(engine, engine.config.out_dir)
    print(
        json.dumps(
            {
                "best_id": result.best_id,
                "best_g": result.best_g,
                "t": result.t,
                "nodes": result.node_count,
                "out_dir": engine.config.out_dir,
            },
            indent=2,
        )
    )
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig.load(args.config)
    instances = build_dataset(config.dataset)
    engine = Engine(config, _build_backend(config), _build_executor(config), instances)
    return _finish_run(engine)


def cmd_resume(args: argparse.Namespace) -> int:
    config = RunConfig.load(args.config)
    checkpoint = json.loads(Path(args.checkpoint).read_text())
    instances = build_dataset(config.dataset)
    engine = Engine.from_checkpoint(checkpoint, config, _build_backend(config), _build_executor(config), instances)
    return _finish_run(engine)


def _dataset_from_args(args: argparse.Namespace) -> DatasetSpec:
    params = {}
    if args.params:
        params = json.loads(args.params)
    return DatasetSpec(problem=args.problem, params=params)


def cmd_evaluate(args: argparse.Namespace) -> int:
    if args.instances:
        problem, instances = load_instances(args.instances)
        if problem != args.problem:
            raise ConfigError(f"instance file holds {problem!r}, not {args.problem!r}")
    else:
        instances = build_dataset(_dataset_from_args(args))
    if args.baseline:
        out = bench.baseline_report(args.problem, args.baseline, instances, args.start_node)
    else:
        code = Path(args.code_file).read_text()
        pool = WorkerPool.spawn(size=1, cmd=tuple(args.worker_cmd) if args.worker_cmd else None, start_node=args.start_node)
        try:
            outcome = evaluate_candidate(code, args.problem, instances, pool, args.timeout_s)
        finally:
            pool.close()
        out = {
            "problem": args.problem,
            "instances": len(instances),
            "status": outcome.status,
            "g": outcome.score,
            "error": outcome.error,
        }
        if outcome.status == "ok":
            out["mean_objective"] = bench.natural_objective(args.problem, outcome.score)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_gen_instances(args: argparse.Namespace) -> int:
    spec = _dataset_from_args(args)
    save_instances(args.out, spec, build_dataset(spec))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench_baselines(args: argparse.Namespace) -> int:
    instances = build_dataset(_dataset_from_args(args))
    reports = [
        bench.baseline_report(args.problem, name, instances, args.start_node)
        for name in sorted(BASELINES[args.problem])
    ]
    print(json.dumps(reports, indent=2))
    return EXIT_OK


def cmd_export_tree(args: argparse.Namespace) -> int:
    checkpoint = json.loads(Path(args.checkpoint).read_text())
    document = checkpoint["tree"]
    Path(args.out).write_text(canonical_json(document) + "\n")
    if args.dot:
        tree = SearchTree.from_export(document["nodes"])
        Path(args.dot).write_text(export_tree_dot(tree))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_export_curve(args: argparse.Namespace) -> int:
    checkpoint = json.loads(Path(args.checkpoint).read_text())
    from evotree.engine import CurvePoint

    curve = [CurvePoint(t=row[0], best_g=row[1], best_id=row[2]) for row in checkpoint["curve"]]
    Path(args.out).write_text(export_curve_csv(curve))
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evotree", description="Evolve heuristic functions with tree search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a search from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(func=cmd_run)

    p_resume = sub.add_parser("resume", help="continue a checkpointed search")
    p_resume.add_argument("--config", required=True)
    p_resume.add_argument("--checkpoint", required=True)
    p_resume.set_defaults(func=cmd_resume)

    p_eval = sub.add_parser("evaluate", help="score a baseline or a code file over a seeded test set")
    p_eval.add_argument("--problem", required=True)
    p_eval.add_argument("--baseline")
    p_eval.add_argument("--code-file")
    p_eval.add_argument("--instances", help="instance file from gen-instances")
    p_eval.add_argument("--params", help="JSON dataset parameter overrides")
    p_eval.add_argument("--start-node", type=int, default=0)
    p_eval.add_argument("--timeout-s", type=float, default=60.0)
    p_eval.add_argument("--worker-cmd", nargs="+")
    p_eval.set_defaults(func=cmd_evaluate)

    p_gen = sub.add_parser("gen-instances", help="write a seeded instance file")
    p_gen.add_argument("--problem", required=True)
    p_gen.add_argument("--params", help="JSON dataset parameter overrides")
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen_instances)

    p_bench = sub.add_parser("bench-baselines", help="report every named baseline on a seeded test set")
    p_bench.add_argument("--problem", required=True)
    p_bench.add_argument("--params", help="JSON dataset parameter overrides")
    p_bench.add_argument("--start-node", type=int, default=0)
    p_bench.set_defaults(func=cmd_bench_baselines)

    p_tree = sub.add_parser("export-tree", help="write the tree export from a checkpoint")
    p_tree.add_argument("--checkpoint", required=True)
    p_tree.add_argument("--out", required=True)
    p_tree.add_argument("--dot", help="also write a graph-description file")
    p_tree.set_defaults(func=cmd_export_tree)

    p_curve = sub.add_parser("export-curve", help="write the improvement curve from a checkpoint")
    p_curve.add_argument("--checkpoint", required=True)
    p_curve.add_argument("--out", required=True)
    p_curve.set_defaults(func=cmd_export_curve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "evaluate" and bool(args.baseline) == bool(args.code_file):
        parser.error("evaluate needs exactly one of --baseline or --code-file")
    try:
        return args.func(args)
    except (ConfigError, ConfigMismatch, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InitializationExhausted as exc:
        print(f"initialization exhausted: {exc}", file=sys.stderr)
        return EXIT_INIT
    except (GatewayError, WorkerProtocolError) as exc:
        print(f"backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
