"""Restricted snippet execution: import allowlist, trimmed builtins, limits.

Each job compiles into a fresh namespace whose builtins exclude file and
code-injection facilities and whose importer admits only the numeric/array
library and the math module.  Resource caps are best-effort POSIX rlimits;
the parent process independently enforces the wall-clock deadline.
"""

from __future__ import annotations

import builtins as _builtins
import math
import signal
from contextlib import contextmanager

try:
    import resource
except ImportError:  # non-POSIX: parent-side wall clock is the only guard
    resource = None

ALLOWED_IMPORT_ROOTS = frozenset({"numpy", "math"})

REMOVED_BUILTINS = frozenset(
    {"open", "exec", "eval", "compile", "input", "breakpoint", "exit", "quit", "help"}
)

DEFAULT_MEMORY_MB = 2048

# extra CPU seconds past the job budget before the kernel steps in
CPU_LIMIT_MARGIN_S = 2


class ImportRejected(ImportError):
    """Snippet tried to import something outside the allowlist."""


class SnippetParseError(ValueError):
    """Snippet failed to compile, define, or expose the expected function."""


class SnippetTimeout(RuntimeError):
    """The per-job wall or CPU guard fired."""


def _restricted_import(name, globals=None, locals=None, fromlist=(), level=0):
    if level != 0:
        raise ImportRejected("relative imports are not available to snippets")
    if name.split(".")[0] not in ALLOWED_IMPORT_ROOTS:
        raise ImportRejected(f"import of {name!r} is not allowed")
    return _builtins.__import__(name, globals, locals, fromlist, level)


def make_namespace() -> dict:
    """Fresh globals for one job; nothing survives into the next job."""
    safe = {k: v for k, v in vars(_builtins).items() if k not in REMOVED_BUILTINS}
    safe["__import__"] = _restricted_import
    return {"__builtins__": safe, "__name__": "snippet"}


def compile_snippet(code: str, function_name: str):
    """Execute the definition and return the named callable."""
    namespace = make_namespace()
    try:
        exec(compile(code, "<snippet>", "exec"), namespace)  # noqa: S102 - the worker exists to run snippets
    except ImportRejected:
        raise
    except SnippetTimeout:
        raise
    except SyntaxError as exc:
        raise SnippetParseError(f"syntax error: {exc}") from None
    except Exception as exc:  # noqa: BLE001 - definition-time failure
        raise SnippetParseError(f"definition failed: {type(exc).__name__}: {exc}") from None
    fn = namespace.get(function_name)
    if not callable(fn):
        raise SnippetParseError(f"snippet does not define a callable {function_name!r}")
    return fn


def _raise_timeout(signum, frame):
    raise SnippetTimeout("job exceeded its time budget")


def install_signal_handlers() -> None:
    signal.signal(signal.SIGALRM, _raise_timeout)
    if hasattr(signal, "SIGXCPU"):
        signal.signal(signal.SIGXCPU, _raise_timeout)


def set_memory_ceiling(memory_mb: int = DEFAULT_MEMORY_MB) -> None:
    """Cap the address space once at startup; kept across jobs."""
    if resource is None:
        return
    ceiling = int(memory_mb) * 1024 * 1024
    soft, hard = resource.getrlimit(resource.RLIMIT_AS)
    if hard != resource.RLIM_INFINITY:
        ceiling = min(ceiling, hard)
    try:
        resource.setrlimit(resource.RLIMIT_AS, (ceiling, hard))
    except (ValueError, OSError):
        pass  # platform refused; the parent still bounds the damage


def _extend_cpu_limit(budget_s: float) -> None:
    """RLIMIT_CPU counts whole-process CPU, so each job raises the soft cap."""
    if resource is None:
        return
    used = resource.getrusage(resource.RUSAGE_SELF)
    spent = used.ru_utime + used.ru_stime
    soft = int(math.ceil(spent + budget_s)) + CPU_LIMIT_MARGIN_S
    _, hard = resource.getrlimit(resource.RLIMIT_CPU)
    if hard != resource.RLIM_INFINITY:
        soft = min(soft, hard)
    try:
        resource.setrlimit(resource.RLIMIT_CPU, (soft, hard))
    except (ValueError, OSError):
        pass


@contextmanager
def job_guard(timeout_s: float):
    """Arm the wall-clock alarm and the CPU cap for the duration of one job.

    The handlers are installed here rather than once at startup so that any
    caller of run_job gets a guard that cannot kill the hosting process.
    """
    _extend_cpu_limit(timeout_s)
    prev_alrm = signal.signal(signal.SIGALRM, _raise_timeout)
    prev_xcpu = signal.signal(signal.SIGXCPU, _raise_timeout) if hasattr(signal, "SIGXCPU") else None
    signal.setitimer(signal.ITIMER_REAL, timeout_s)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0.0)
        signal.signal(signal.SIGALRM, prev_alrm)
        if prev_xcpu is not None:
            signal.signal(signal.SIGXCPU, prev_xcpu)
