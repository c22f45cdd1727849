import numpy as np
import pytest

from flatmagic.groups import FiniteAbelianGroup


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_grid(n, rng, d=None):
    """Grid of independent uniformly random unit vectors (no orthogonality)."""
    d = n if d is None else d
    g = rng.standard_normal((n, n, d)) + 1j * rng.standard_normal((n, n, d))
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def group(spec):
    return FiniteAbelianGroup.parse(spec)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
