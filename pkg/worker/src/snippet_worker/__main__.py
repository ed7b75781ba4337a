import sys

from snippet_worker.server import serve_loop

if __name__ == "__main__":
    sys.exit(serve_loop())
