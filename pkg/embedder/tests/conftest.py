"""Embedder test configuration.

The acceptance recorder is exposed as a fixture (not a module import) so
this suite stays collectable next to the detector's tests, and a
deterministic stand-in encoder lets the pipeline run without downloading
a model.  Thread pinning mirrors the detector suite: it must precede the
first numpy import in the session.
"""

import hashlib
import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def _record(name: str, status: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    line = f"[{status}] {name}{suffix}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture
def record_acceptance():
    """Collect one pass/fail line; echoed in the terminal summary."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        _record(name, "PASS" if passed else "FAIL", detail)

    return record


@pytest.fixture
def record_skip():
    """Record a criterion that could not run in this environment."""

    def record(name: str, reason: str) -> None:
        _record(name, "SKIP", reason)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("embedder acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class FakeEncoder:
    """Offline encoder: each text hashes to a seed that draws a fixed
    normal vector, so equal texts always embed identically."""

    def __init__(self, dimension: int = 768, name: str = "stub-encoder",
                 revision: str = "f" * 40):
        self.dimension = dimension
        self.name = name
        self.revision = revision
        self.batch_sizes: list[int] = []

    def encode(self, texts, batch_size: int) -> np.ndarray:
        self.batch_sizes.append(len(texts))
        out = np.empty((len(texts), self.dimension))
        for i, text in enumerate(texts):
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "big")
            out[i] = np.random.default_rng(seed).standard_normal(self.dimension)
        return out


@pytest.fixture
def fake_encoder():
    return FakeEncoder()


@pytest.fixture
def fake_encoder_cls():
    return FakeEncoder


@pytest.fixture(scope="session")
def texts_path():
    return os.path.join(os.path.dirname(__file__), "data", "texts_20.jsonl")
