import numpy as np
import pytest

from prefopt.rng import TrialStreams

ACCEPTANCE_LINES: list[str] = []


class FixedStream:
    """Stands in for a Generator, replaying preset draws in order."""

    def __init__(self, normals=(), uniforms=()):
        self._normals = [np.asarray(v, dtype=float) for v in normals]
        self._uniforms = list(uniforms)

    def standard_normal(self, size=None):
        value = self._normals.pop(0)
        return value if size is not None else float(value)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._uniforms.pop(0)


class ScriptedObjective:
    """Returns preset values for successive evaluate calls."""

    def __init__(self, dimension, values):
        self.dimension = dimension
        self._values = list(values)

    def evaluate(self, x, rng):
        return self._values.pop(0)


@pytest.fixture
def fixed_streams():
    def make(directions, n_evals=0):
        return TrialStreams(
            FixedStream(normals=directions),
            FixedStream(normals=[0.0] * n_evals),
            FixedStream(normals=[0.0] * n_evals),
        )

    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
