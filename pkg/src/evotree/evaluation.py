"""Candidate scoring: native registry execution and external worker dispatch.

A candidate's dataset score g is the exact arithmetic mean of per-instance
scores (larger is better).  The native executor maps known code strings to
in-process heuristics, which keeps end-to-end runs fully deterministic; the
external executor ships jobs to a sandboxed worker subprocess over
newline-delimited JSON and enforces the wall-clock deadline from the parent
side, killing and respawning the worker on overrun.
"""

from __future__ import annotations

import json
import math
import os
import select
import subprocess
import sys
import time
from dataclasses import dataclass

from evotree.problems import InvalidHeuristicOutput, score_instance
from evotree.problems.datasets import instance_to_json

STATUS_OK = "ok"
STATUS_PARSE_ERROR = "parse_error"
STATUS_RUNTIME_ERROR = "runtime_error"
STATUS_TIMEOUT = "timeout"
STATUS_INVALID_OUTPUT = "invalid_output"
STATUSES = (STATUS_OK, STATUS_PARSE_ERROR, STATUS_RUNTIME_ERROR, STATUS_TIMEOUT, STATUS_INVALID_OUTPUT)

TIMEOUT_GRACE_S = 2.0


class WorkerProtocolError(RuntimeError):
    """The worker answered with a malformed frame or the wrong job id."""


@dataclass(frozen=True)
class EvaluationOutcome:
    job_id: int
    status: str
    scores: tuple[float, ...] | None = None
    score: float | None = None  # mean of scores when status == "ok"
    error: str | None = None
    wall_ms: float = 0.0


class NativeRegistry:
    """Exact code-string to callable mapping for deterministic runs."""

    def __init__(self) -> None:
        self._by_code: dict[str, object] = {}

    def register(self, code: str, heuristic) -> None:
        self._by_code[code] = heuristic

    def lookup(self, code: str):
        return self._by_code.get(code)

    @staticmethod
    def stub_code(function_name: str, label: str) -> str:
        """Canonical registry key that still looks like a function definition."""
        return f"def {function_name}(*args):\n    pass  # native:{label}"


class NativeExecutor:
    """Runs registry heuristics in-process, checking the clock between instances."""

    def __init__(self, registry: NativeRegistry, start_node: int = 0) -> None:
        self.registry = registry
        self.start_node = start_node

    def run(self, code: str, problem: str, instances: list[dict], timeout_s: float) -> tuple[str, list[float] | None, str | None]:
        heuristic = self.registry.lookup(code)
        if heuristic is None:
            return STATUS_PARSE_ERROR, None, "code not present in the native registry"
        started = time.monotonic()
        scores: list[float] = []
        for instance in instances:
            if time.monotonic() - started > timeout_s:
                return STATUS_TIMEOUT, None, f"exceeded {timeout_s}s"
            try:
                scores.append(score_instance(problem, instance, heuristic, self.start_node))
            except InvalidHeuristicOutput as exc:
                return STATUS_INVALID_OUTPUT, None, str(exc)
            except Exception as exc:  # noqa: BLE001 - heuristic code is arbitrary
                return STATUS_RUNTIME_ERROR, None, f"{type(exc).__name__}: {exc}"
        return STATUS_OK, scores, None


class WorkerClient:
    """One external worker subprocess speaking line-delimited JSON."""

    def __init__(self, cmd: tuple[str, ...] | None = None, start_node: int = 0) -> None:
        self.cmd = tuple(cmd) if cmd else (sys.executable, "-m", "snippet_worker")
        self.start_node = start_node
        self.proc: subprocess.Popen | None = None
        self._buffer = b""
        self.respawn_count = 0

    def _ensure_alive(self) -> None:
        if self.proc is not None and self.proc.poll() is None:
            return
        if self.proc is not None:
            self.respawn_count += 1
        self._buffer = b""
        self.proc = subprocess.Popen(
            list(self.cmd),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )

    def _kill(self) -> None:
        if self.proc is None:
            return
        try:
            self.proc.kill()
            self.proc.wait(timeout=5)
        except Exception:  # noqa: BLE001 - already dying
            pass
        self.proc = None
        self._buffer = b""

    def _read_line(self, deadline: float) -> bytes | None:
        """One response line, or None on timeout/EOF; kills nothing itself."""
        stdout = self.proc.stdout
        while True:
            nl = self._buffer.find(b"\n")
            if nl != -1:
                line = self._buffer[:nl]
                self._buffer = self._buffer[nl + 1 :]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            ready, _, _ = select.select([stdout], [], [], remaining)
            if not ready:
                return None
            chunk = os.read(stdout.fileno(), 65536)
            if not chunk:  # worker died
                return None
            self._buffer += chunk

    def run(self, code: str, problem: str, instances: list[dict], timeout_s: float) -> tuple[str, list[float] | None, str | None]:
        self._ensure_alive()
        request = {
            "job_id": self._next_job_id(),
            "problem": problem,
            "code": code,
            "timeout_s": timeout_s,
            "instances": [instance_to_json(problem, inst) for inst in instances],
        }
        if problem == "tsp":
            request["start_node"] = self.start_node
        frame = json.dumps(request) + "\n"
        try:
            self.proc.stdin.write(frame.encode())
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._kill()
            return STATUS_RUNTIME_ERROR, None, "worker crashed before accepting the job"
        # give the worker a little slack past its own limit before killing it
        deadline = time.monotonic() + timeout_s + TIMEOUT_GRACE_S / 2
        line = self._read_line(deadline)
        if line is None:
            died = self.proc.poll() is not None
            self._kill()
            if died:
                return STATUS_RUNTIME_ERROR, None, "worker crashed mid-job"
            return STATUS_TIMEOUT, None, f"no response within {timeout_s}s"
        try:
            response = json.loads(line.decode())
        except ValueError as exc:
            self._kill()
            raise WorkerProtocolError(f"malformed worker frame: {exc}") from None
        if response.get("job_id") != request["job_id"]:
            self._kill()
            raise WorkerProtocolError(
                f"job id mismatch: sent {request['job_id']}, got {response.get('job_id')}"
            )
        status = response.get("status")
        if status not in STATUSES:
            self._kill()
            raise WorkerProtocolError(f"unknown worker status {status!r}")
        if status == STATUS_OK:
            scores = response.get("scores")
            if not isinstance(scores, list) or len(scores) != len(instances):
                self._kill()
                raise WorkerProtocolError("ok response without a full scores list")
            return status, [float(s) for s in scores], None
        return status, None, response.get("error")

    _job_counter = 0

    def _next_job_id(self) -> int:
        WorkerClient._job_counter += 1
        return WorkerClient._job_counter

    def close(self) -> None:
        if self.proc is not None and self.proc.poll() is None:
            try:
                self.proc.stdin.close()
                self.proc.wait(timeout=2)
            except Exception:  # noqa: BLE001
                self._kill()
        self.proc = None


@dataclass
class WorkerPool:
    """Round-robin pool; outcomes always return in submission order."""

    clients: list[WorkerClient]
    _next: int = 0

    @classmethod
    def spawn(cls, size: int = 1, cmd: tuple[str, ...] | None = None, start_node: int = 0) -> WorkerPool:
        return cls(clients=[WorkerClient(cmd, start_node) for _ in range(size)])

    def run(self, code: str, problem: str, instances: list[dict], timeout_s: float):
        client = self.clients[self._next]
        self._next = (self._next + 1) % len(self.clients)
        return client.run(code, problem, instances, timeout_s)

    def close(self) -> None:
        for client in self.clients:
            client.close()


_eval_counter = 0


def evaluate_candidate(code: str, problem: str, instances: list[dict], executor, timeout_s: float) -> EvaluationOutcome:
    """Score one candidate over the whole dataset; any failure voids the job."""
    global _eval_counter
    _eval_counter += 1
    job_id = _eval_counter
    started = time.monotonic()
    status, scores, error = executor.run(code, problem, instances, timeout_s)
    wall_ms = (time.monotonic() - started) * 1000.0
    if status != STATUS_OK:
        return EvaluationOutcome(job_id=job_id, status=status, error=error, wall_ms=wall_ms)
    if scores is None or any(not math.isfinite(s) for s in scores):
        return EvaluationOutcome(
            job_id=job_id, status=STATUS_INVALID_OUTPUT, error="non-finite instance score", wall_ms=wall_ms
        )
    mean = math.fsum(scores) / len(scores)
    return EvaluationOutcome(
        job_id=job_id, status=STATUS_OK, scores=tuple(scores), score=mean, wall_ms=wall_ms, error=None
    )
