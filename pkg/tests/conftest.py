import hypothesis
import numpy as np
import pytest

from trailer_extremals.config import SEEDS

hypothesis.settings.register_profile("default", derandomize=True, deadline=None, max_examples=60)
hypothesis.settings.register_profile("fast", derandomize=True, deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(SEEDS.hypothesis)


ACCEPTANCE: dict[int, str] = {}


def record_criterion(n: int, passed: bool, detail: str) -> None:
    line = f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
