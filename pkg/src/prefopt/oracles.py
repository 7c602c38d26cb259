"""Stochastic objectives and the pairwise comparison oracle.

The learner never sees ``f`` directly.  It only observes

    sgn(f(x1, xi) - f(x2, zeta))

with ``xi`` and ``zeta`` drawn independently from two separate streams.
Exact ties map to +1.
"""

from __future__ import annotations

import math
import sys
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from .errors import AbortTrial, InvalidInputError


class StochasticObjective(ABC):
    """A noisy objective ``f(x, xi)`` over R^d.

    Subclasses set ``dimension`` and implement :meth:`evaluate`.  The analytic
    hooks return ``None`` when the quantity is unknown.
    """

    dimension: int

    @abstractmethod
    def evaluate(self, x: np.ndarray, rng: np.random.Generator) -> float:
        """One noisy sample f(x, xi); consumes randomness from ``rng`` only."""

    def expected_value(self, x: np.ndarray) -> float | None:
        return None

    def expected_gradient(self, x: np.ndarray) -> np.ndarray | None:
        return None


def _check_point(x: np.ndarray, d: int, name: str) -> None:
    if np.shape(x) != (d,):
        raise InvalidInputError(f"{name} must have shape ({d},), got {np.shape(x)}")


def compare(obj, x1, x2, rng1: np.random.Generator, rng2: np.random.Generator) -> int:
    """Return sgn(f(x1, xi) - f(x2, zeta)) in {+1, -1}, with sgn(0) = +1.

    ``x1`` is evaluated with ``rng1`` and ``x2`` with ``rng2``; exactly two
    evaluations are made.  An :class:`InteractiveOracle` is asked instead.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    _check_point(x1, obj.dimension, "x1")
    _check_point(x2, obj.dimension, "x2")
    if isinstance(obj, InteractiveOracle):
        return obj.ask(x1, x2)
    diff = obj.evaluate(x1, rng1) - obj.evaluate(x2, rng2)
    return 1 if diff >= 0 else -1


@dataclass(frozen=True)
class QuadraticObjective(StochasticObjective):
    """f(x, xi) = ||x||^2 + xi with xi ~ N(0, noise_std^2)."""

    dimension: int
    noise_std: float = 0.0

    smoothness = 2.0  # L

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidInputError("dimension must be at least 1")
        if self.noise_std < 0:
            raise InvalidInputError("noise_std must be nonnegative")

    @property
    def sigma(self) -> float:
        return 0.0

    @property
    def sigma_f(self) -> float:
        return self.noise_std

    def evaluate(self, x, rng):
        # always draw so stream consumption does not depend on noise_std
        return float(x @ x) + self.noise_std * rng.standard_normal()

    def expected_value(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ x)

    def expected_gradient(self, x):
        return 2.0 * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class NonconvexObjective(StochasticObjective):
    """f(x, xi) = sum_i (x_i^2 + cos(3 x_i)) + xi, a separable multi-well function."""

    dimension: int
    noise_std: float = 0.0

    smoothness = 11.0  # |2 - 9 cos(3x)| <= 11

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidInputError("dimension must be at least 1")
        if self.noise_std < 0:
            raise InvalidInputError("noise_std must be nonnegative")

    @property
    def sigma(self) -> float:
        return 0.0

    @property
    def sigma_f(self) -> float:
        return self.noise_std

    def evaluate(self, x, rng):
        return float(np.sum(x * x + np.cos(3.0 * x))) + self.noise_std * rng.standard_normal()

    def expected_value(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(x * x + np.cos(3.0 * x)))

    def expected_gradient(self, x):
        x = np.asarray(x, dtype=float)
        return 2.0 * x - 3.0 * np.sin(3.0 * x)

    @staticmethod
    def coordinate_minimizer(tol: float = 1e-15) -> float:
        """Positive root of 2x - 3 sin(3x) in (0.5, 1.0), a global minimizer per coordinate."""
        lo, hi = 0.5, 1.0
        grad = lambda t: 2.0 * t - 3.0 * math.sin(3.0 * t)  # noqa: E731
        glo = grad(lo)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            gm = grad(mid)
            if gm == 0.0:
                return mid
            if (gm < 0) == (glo < 0):
                lo, glo = mid, gm
            else:
                hi = mid
        return 0.5 * (lo + hi)


def quadratic_objective(d: int, noise_std: float = 0.0) -> QuadraticObjective:
    return QuadraticObjective(d, noise_std)


def nonconvex_objective(d: int, noise_std: float = 0.0) -> NonconvexObjective:
    return NonconvexObjective(d, noise_std)


class CountingObjective(StochasticObjective):
    """Wraps an objective and counts calls to :meth:`evaluate`."""

    def __init__(self, inner: StochasticObjective):
        self.inner = inner
        self.dimension = inner.dimension
        self.calls = 0

    def evaluate(self, x, rng):
        self.calls += 1
        return self.inner.evaluate(x, rng)

    def expected_value(self, x):
        return self.inner.expected_value(x)

    def expected_gradient(self, x):
        return self.inner.expected_gradient(x)


def _format_vector(x: np.ndarray) -> str:
    return "[" + ", ".join(f"{v:.6g}" for v in np.asarray(x, dtype=float)) + "]"


@dataclass
class InteractiveOracle:
    """A human comparator on a text channel.

    Each query prints one prompt line and reads one answer.  ``A`` means the
    first point is better (lower cost), giving -1; ``B`` gives +1.  ``Q``
    aborts the trial.  After ``max_attempts`` malformed answers the trial is
    aborted as well.
    """

    dimension: int
    input_fn: Callable[[str], str] = input
    out: TextIO | None = None
    max_attempts: int = 3
    clock: Callable[[], float] = time.time
    log: list = field(default_factory=list)

    def ask(self, x1: np.ndarray, x2: np.ndarray) -> int:
        t = len(self.log)
        prompt = f"t={t} | A: f({_format_vector(x1)}) vs B: f({_format_vector(x2)}) — better? [A/B]"
        out = self.out if self.out is not None else sys.stdout
        for attempt in range(self.max_attempts):
            print(prompt, file=out, flush=True)
            try:
                raw = self.input_fn("> " if attempt == 0 else "please answer A or B > ")
            except (EOFError, KeyboardInterrupt):
                raise AbortTrial(f"input closed at t={t}") from None
            answer = raw.strip().upper()
            if answer in ("A", "B"):
                outcome = -1 if answer == "A" else 1
                self.log.append(
                    {
                        "t": t,
                        "x1": [float(v) for v in x1],
                        "x2": [float(v) for v in x2],
                        "response": answer,
                        "outcome": outcome,
                        "timestamp": self.clock(),
                    }
                )
                return outcome
            if answer == "Q":
                raise AbortTrial(f"user aborted at t={t}")
        raise AbortTrial(f"no valid answer after {self.max_attempts} attempts at t={t}")


def interactive_oracle(dimension: int, input_fn=input, out: TextIO | None = None) -> InteractiveOracle:
    return InteractiveOracle(dimension, input_fn=input_fn, out=out)
