"""Session fixtures; the reusable builders live in engine_kit."""

import pytest

from engine_kit import TINY_DATASET

from evotree.problems.datasets import build_dataset


@pytest.fixture(scope="session")
def tiny_instances():
    return build_dataset(TINY_DATASET)
