"""Wire schema: one JSON record per line, each response echoing its job_id."""

from __future__ import annotations

import json
from typing import Any

STATUS_OK = "ok"
STATUS_PARSE_ERROR = "parse_error"
STATUS_RUNTIME_ERROR = "runtime_error"
STATUS_TIMEOUT = "timeout"
STATUS_INVALID_OUTPUT = "invalid_output"

PROBLEMS = ("tsp", "kp", "bpp_online", "asp")


class UnrecoverableRequest(ValueError):
    """No usable job_id, so no response can be addressed; the worker exits."""


class RecoverableRequest(ValueError):
    """Request is malformed but carries a job_id to answer with parse_error."""

    def __init__(self, job_id: int, message: str) -> None:
        super().__init__(message)
        self.job_id = job_id


def parse_request(line: str) -> dict[str, Any]:
    try:
        raw = json.loads(line)
    except ValueError as exc:
        raise UnrecoverableRequest(f"unparseable request line: {exc}") from None
    if not isinstance(raw, dict):
        raise UnrecoverableRequest(f"request must be an object, got {type(raw).__name__}")
    job_id = raw.get("job_id")
    if not isinstance(job_id, int) or isinstance(job_id, bool):
        raise UnrecoverableRequest(f"request lacks an integer job_id: {job_id!r}")

    problem = raw.get("problem")
    if problem not in PROBLEMS:
        raise RecoverableRequest(job_id, f"unknown problem {problem!r}")
    if not isinstance(raw.get("code"), str):
        raise RecoverableRequest(job_id, "code must be a string")
    timeout_s = raw.get("timeout_s")
    if not isinstance(timeout_s, (int, float)) or isinstance(timeout_s, bool) or timeout_s <= 0:
        raise RecoverableRequest(job_id, f"timeout_s must be a positive number, got {timeout_s!r}")
    instances = raw.get("instances")
    if not isinstance(instances, list) or not instances:
        raise RecoverableRequest(job_id, "instances must be a non-empty list")
    start_node = raw.get("start_node", 0)
    if not isinstance(start_node, int) or isinstance(start_node, bool):
        raise RecoverableRequest(job_id, f"start_node must be an integer, got {start_node!r}")
    return {
        "job_id": job_id,
        "problem": problem,
        "code": raw["code"],
        "timeout_s": float(timeout_s),
        "instances": instances,
        "start_node": start_node,
    }


def ok_response(job_id: int, scores: list[float]) -> str:
    return json.dumps({"job_id": job_id, "status": STATUS_OK, "scores": scores})


def error_response(job_id: int, status: str, message: str) -> str:
    return json.dumps({"job_id": job_id, "status": status, "error": message})
