"""Sandboxed evaluation worker.

Reads one JSON job per line on stdin, compiles the submitted heuristic
function in a restricted namespace, drives the problem's step-by-step
construction over the instance batch, and writes one JSON response per line
on stdout.  Nothing else is ever written to stdout.
"""

from snippet_worker.server import serve_loop

__version__ = "0.1.0"

__all__ = ["serve_loop", "__version__"]
