"""Metrics recorded along a run, and convergence-checking utilities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidInputError, UnsupportedMetricError
from .rng import sample_unit_sphere


@dataclass(frozen=True)
class Metric:
    """A named, side-effect free function of the current iterate."""

    name: str
    fn: Callable[[np.ndarray], float]

    def __call__(self, x: np.ndarray) -> float:
        return float(self.fn(x))


def grad_norm_metric(obj) -> Metric:
    if obj.expected_gradient(np.zeros(obj.dimension)) is None:
        raise UnsupportedMetricError(f"{type(obj).__name__} exposes no gradient")
    return Metric("grad_norm", lambda x: np.linalg.norm(obj.expected_gradient(x)))


def param_error_metric(target) -> Metric:
    target = np.atleast_1d(np.asarray(target, dtype=float))

    def error(x):
        x = np.atleast_1d(x)
        if x.shape != target.shape:
            raise InvalidInputError(f"iterate shape {x.shape} != target shape {target.shape}")
        return np.linalg.norm(x - target)

    return Metric("param_error", error)


def cost_error_metric(obj, target_value: float) -> Metric:
    if obj.expected_value(np.zeros(obj.dimension)) is None:
        raise UnsupportedMetricError(f"{type(obj).__name__} exposes no expected value")
    return Metric("cost_error", lambda x: abs(obj.expected_value(x) - target_value))


def running_average(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.cumsum(values) / np.arange(1, len(values) + 1)


def _loglog_slope(t: np.ndarray, y: np.ndarray) -> float:
    if len(t) < 10:
        raise InsufficientDataError(f"need at least 10 points for a slope fit, got {len(t)}")
    if np.any(y <= 0):
        raise InvalidInputError("running averages must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log(t), np.log(y), 1)
    return float(slope)


def rate_slope(traces: Sequence, metric: str) -> float:
    """Log-log slope of the running-average metric (1/T) sum_{t=1}^T m_t.

    When every trace has the same length, the metric is averaged across
    traces and the slope is fit against ``t`` over the second half of the
    iterations.  When traces have different budgets ``T``, each budget
    contributes one point (its seed-averaged final running average) and the
    slope is fit against ``T``.  Row ``t = 0`` is excluded in both cases.
    """
    if not traces:
        raise InsufficientDataError("no traces given")
    lengths = {len(tr) for tr in traces}
    if len(lengths) == 1:
        mean = np.mean([tr.metrics[metric][1:] for tr in traces], axis=0)
        avg = running_average(mean)
        t = np.arange(1, len(avg) + 1)
        half = len(avg) // 2
        return _loglog_slope(t[half:], avg[half:])

    by_budget: dict[int, list[float]] = {}
    for tr in traces:
        by_budget.setdefault(len(tr) - 1, []).append(float(np.mean(tr.metrics[metric][1:])))
    budgets = np.array(sorted(by_budget), dtype=float)
    finals = np.array([np.mean(by_budget[int(b)]) for b in budgets])
    return _loglog_slope(budgets, finals)


def estimate_cd(d: int, n_samples: int, rng: np.random.Generator, chunk: int = 100_000) -> float:
    """Monte Carlo estimate of E|u_1| for u uniform on the unit sphere in R^d."""
    if n_samples < 10_000:
        raise InvalidInputError(f"n_samples must be at least 10000, got {n_samples}")
    total = 0.0
    remaining = n_samples
    while remaining > 0:
        m = min(chunk, remaining)
        total += float(np.abs(sample_unit_sphere(rng, d, size=m)[:, 0]).sum())
        remaining -= m
    return total / n_samples
