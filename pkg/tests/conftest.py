import numpy as np
import pytest

from gikit import Dataset


def rel_gap(a, b) -> float:
    """Max elementwise difference relative to the larger image magnitude."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.abs(a).max(), np.abs(b).max())
    if scale == 0.0:
        return 0.0
    return float(np.abs(a - b).max() / scale)


def assert_images_close(a, b, rtol):
    gap = rel_gap(a, b)
    assert gap <= rtol, f"images differ by relative {gap:.3e} > {rtol:.1e}"


def random_dataset(rng: np.random.Generator, n: int, height: int = 8, width: int = 8) -> Dataset:
    """Arbitrary valid dataset: uniform frames, unrelated noisy buckets."""
    frames = rng.random((n, height, width))
    buckets = rng.normal(5.0, 2.0, size=n)
    return Dataset.from_arrays(frames, buckets)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) == "call" and "test_acceptance" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
