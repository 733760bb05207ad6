import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from elastodg.fem import DGSpace  # noqa: E402
from elastodg.material import MaterialField  # noqa: E402
from elastodg.mesh import unit_box  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_space(dim=2, n=2, k=1, boundary=None):
    mesh = unit_box(dim, n, boundary)
    return DGSpace(mesh, k)


def random_material(mesh, rng, lo=0.5, hi=2.0):
    n = mesh.n_elements
    return MaterialField(rng.uniform(lo, hi, n), rng.uniform(lo, hi, n), rng.uniform(lo, hi, n), mesh.dim)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
