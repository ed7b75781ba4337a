"""Job loop: one request line in, one response line out, flush, repeat."""

from __future__ import annotations

import math
import os
import sys

from snippet_worker import drivers, protocol, sandbox

ENV_MEMORY_MB = "SNIPPET_WORKER_MEMORY_MB"


def run_job(request: dict) -> str:
    """Score one snippet over one instance batch; any failure voids the job."""
    job_id = request["job_id"]
    problem = request["problem"]
    try:
        with sandbox.job_guard(request["timeout_s"]):
            fn = sandbox.compile_snippet(request["code"], drivers.FUNCTION_NAMES[problem])
            instances = [drivers.decode_instance(problem, raw) for raw in request["instances"]]
            scores = [
                drivers.score_instance(problem, inst, fn, request["start_node"])
                for inst in instances
            ]
    except sandbox.SnippetTimeout:
        return protocol.error_response(job_id, protocol.STATUS_TIMEOUT, "job exceeded its time budget")
    except (sandbox.SnippetParseError, sandbox.ImportRejected) as exc:
        return protocol.error_response(job_id, protocol.STATUS_PARSE_ERROR, str(exc))
    except drivers.InvalidOutput as exc:
        return protocol.error_response(job_id, protocol.STATUS_INVALID_OUTPUT, str(exc))
    except MemoryError:
        return protocol.error_response(job_id, protocol.STATUS_RUNTIME_ERROR, "snippet exhausted the memory ceiling")
    except Exception as exc:  # noqa: BLE001 - snippet code is arbitrary
        return protocol.error_response(job_id, protocol.STATUS_RUNTIME_ERROR, f"{type(exc).__name__}: {exc}")
    if any(not math.isfinite(s) for s in scores):
        return protocol.error_response(job_id, protocol.STATUS_INVALID_OUTPUT, "non-finite instance score")
    return protocol.ok_response(job_id, scores)


def serve_loop(stdin=None, stdout=None) -> int:
    """Serve until stdin closes; returns the process exit code."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    sandbox.install_signal_handlers()
    sandbox.set_memory_ceiling(int(os.environ.get(ENV_MEMORY_MB, sandbox.DEFAULT_MEMORY_MB)))
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = protocol.parse_request(line)
        except protocol.RecoverableRequest as exc:
            stdout.write(protocol.error_response(exc.job_id, protocol.STATUS_PARSE_ERROR, str(exc)) + "\n")
            stdout.flush()
            continue
        except protocol.UnrecoverableRequest as exc:
            print(f"snippet-worker: {exc}", file=sys.stderr)
            return 2
        stdout.write(run_job(request) + "\n")
        stdout.flush()
    return 0
