"""Shared test configuration.

Thread pinning must happen before numpy first loads its BLAS, so the
environment variables are set at conftest import time; the acceptance
timings assume a single compute thread.
"""

import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def _record(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    line = f"[{status}] {name}{suffix}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture
def record_acceptance():
    """Collect one pass/fail line; echoed in the terminal summary.

    A fixture rather than an importable helper: two test trees live in
    this repository and `import conftest` binds whichever loaded last."""
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
