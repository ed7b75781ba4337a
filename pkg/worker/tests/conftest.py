"""Keep in-process sandbox tests from leaking limits into the test session."""

import resource
import signal

import pytest


@pytest.fixture(autouse=True)
def restore_process_guards():
    cpu = resource.getrlimit(resource.RLIMIT_CPU)
    mem = resource.getrlimit(resource.RLIMIT_AS)
    alrm = signal.getsignal(signal.SIGALRM)
    xcpu = signal.getsignal(signal.SIGXCPU)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0.0)
        resource.setrlimit(resource.RLIMIT_CPU, cpu)
        resource.setrlimit(resource.RLIMIT_AS, mem)
        signal.signal(signal.SIGALRM, alrm)
        signal.signal(signal.SIGXCPU, xcpu)
