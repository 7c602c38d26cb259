"""The comparison-feedback SGD loop.

Each iteration samples a direction, obtains feedback for ``x_t`` versus
``x_t + delta * u_t``, forms ``g_t`` and steps ``x_{t+1} = x_t - eta * g_t``.
There is no projection: the decision set is all of R^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import AbortTrial, DivergedError, InvalidInputError
from .estimators import ESTIMATORS, EstimatorConfig
from .rng import TrialStreams, trial_streams

DEFAULT_DELTA = 0.01
DIVERGENCE_BOUND = 1e12


def theorem_schedule(T: int, delta: float = DEFAULT_DELTA) -> tuple[float, float]:
    """Step size T^{-1/2} with a constant smoothing radius."""
    if T < 1:
        raise InvalidInputError(f"T must be at least 1, got {T}")
    return T**-0.5, delta


@dataclass(frozen=True)
class OptimizerConfig:
    T: int
    eta: float | str  # a positive float, or "theorem" for T^{-1/2}
    estimator: EstimatorConfig
    x0: tuple[float, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))
        if self.T < 1:
            raise InvalidInputError(f"T must be at least 1, got {self.T}")
        if isinstance(self.eta, str):
            if self.eta != "theorem":
                raise InvalidInputError(f"unknown step-size schedule {self.eta!r}")
        elif self.eta < 0:
            raise InvalidInputError(f"eta must be nonnegative, got {self.eta}")

    @property
    def delta(self) -> float:
        return self.estimator.delta

    @property
    def step_size(self) -> float:
        if self.eta == "theorem":
            return theorem_schedule(self.T, self.delta)[0]
        return float(self.eta)

    def snapshot(self) -> dict:
        return {
            "T": self.T,
            "eta": self.eta,
            "step_size": self.step_size,
            "delta": self.delta,
            "estimator": self.estimator.kind.value,
            "coefficient": self.estimator.coefficient,
            "x0": list(self.x0),
            "seed": self.seed,
        }


@dataclass
class TrialTrace:
    """Per-iteration record of one run, stored column-wise.

    Row ``t`` holds ``x_t`` and the metrics evaluated at ``x_t``.  A complete
    run has ``T + 1`` rows; diverged or aborted runs are truncated.
    """

    t: np.ndarray
    xs: np.ndarray
    metrics: dict[str, np.ndarray]
    config: dict = field(default_factory=dict)
    status: str = "complete"

    @property
    def final_x(self) -> np.ndarray:
        return self.xs[-1]

    def __len__(self) -> int:
        return len(self.t)

    def rows(self) -> Iterator[tuple[int, np.ndarray, dict[str, float]]]:
        for i, t in enumerate(self.t):
            yield int(t), self.xs[i], {k: float(v[i]) for k, v in self.metrics.items()}

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "config": self.config,
            "t": self.t.tolist(),
            "x": self.xs.tolist(),
            "metrics": {k: v.tolist() for k, v in self.metrics.items()},
        }


def run(obj, cfg: OptimizerConfig, metrics: Sequence = (), streams: TrialStreams | None = None) -> TrialTrace:
    """Run ``cfg.T`` iterations against ``obj`` and return the trace.

    ``metrics`` are callables ``m(x) -> float`` with a ``name`` attribute,
    recorded before every update and once after the last.  Uses exactly
    ``2 * T`` objective evaluations.  ``streams`` overrides the streams
    derived from ``cfg.seed``.
    """
    d = obj.dimension
    x = np.array(cfg.x0, dtype=float)
    if x.shape != (d,):
        raise InvalidInputError(f"x0 has dimension {x.size}, objective has {d}")
    if cfg.estimator.dimension != d:
        raise InvalidInputError(f"estimator dimension {cfg.estimator.dimension} != objective dimension {d}")
    eta = cfg.step_size
    step = ESTIMATORS[cfg.estimator.kind]
    if streams is None:
        streams = trial_streams(cfg.seed)

    n = cfg.T + 1
    xs = np.empty((n, d))
    values = {m.name: np.empty(n) for m in metrics}

    def record(t):
        xs[t] = x
        for m in metrics:
            values[m.name][t] = m(x)

    def truncated(rows, status):
        return TrialTrace(
            np.arange(rows),
            xs[:rows].copy(),
            {k: v[:rows].copy() for k, v in values.items()},
            cfg.snapshot(),
            status,
        )

    for t in range(cfg.T):
        record(t)
        try:
            est = step(obj, x, cfg.estimator, streams)
        except AbortTrial as exc:
            exc.trace = truncated(t + 1, "aborted")
            raise
        x = x - eta * est.g
        norm = math.sqrt(float(x @ x))
        if not math.isfinite(norm) or norm > DIVERGENCE_BOUND:
            raise DivergedError(f"iterate diverged at t={t + 1} (|x| = {norm:.3g})", truncated(t + 1, "diverged"))
    record(cfg.T)
    return TrialTrace(np.arange(n), xs, values, cfg.snapshot())
