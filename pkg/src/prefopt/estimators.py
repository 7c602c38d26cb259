"""Two-point gradient estimators.

All three estimators query the current point ``x`` and a perturbed point
``x + delta * u`` once each and return ``coef * feedback * u``, where
``coef`` defaults to ``d / delta``:

* ``psgd_u``: ``u`` uniform on the unit sphere, feedback is the comparison sign.
* ``psgd_g``: ``u`` standard normal (unnormalized), feedback is the comparison sign.
* ``zo_two_point``: ``u`` uniform on the unit sphere, feedback is the raw
  difference of the two noisy values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError
from .oracles import compare
from .rng import TrialStreams, sample_gaussian, sample_unit_sphere


class EstimatorKind(str, Enum):
    PSGD_U = "psgd_u"
    PSGD_G = "psgd_g"
    ZO_TWO_POINT = "zo_two_point"


@dataclass(frozen=True)
class EstimatorConfig:
    kind: EstimatorKind
    delta: float
    dimension: int
    scale: float | None = None  # overrides the d/delta coefficient

    def __post_init__(self):
        object.__setattr__(self, "kind", EstimatorKind(self.kind))
        if not self.delta > 0:
            raise InvalidInputError(f"delta must be positive, got {self.delta}")
        if self.dimension < 1:
            raise InvalidInputError(f"dimension must be at least 1, got {self.dimension}")

    @property
    def coefficient(self) -> float:
        return self.dimension / self.delta if self.scale is None else self.scale


@dataclass(frozen=True)
class GradientEstimate:
    g: np.ndarray
    scale: float
    feedback: float  # comparison sign, or the raw difference for ZO
    direction: np.ndarray


def _sign_estimate(obj, x, cfg: EstimatorConfig, u: np.ndarray, streams: TrialStreams) -> GradientEstimate:
    outcome = compare(obj, x + cfg.delta * u, x, streams.noise1, streams.noise2)
    coef = cfg.coefficient
    return GradientEstimate(coef * outcome * u, coef, outcome, u)


def estimate_psgd_u(obj, x: np.ndarray, cfg: EstimatorConfig, streams: TrialStreams) -> GradientEstimate:
    u = sample_unit_sphere(streams.perturbation, cfg.dimension)
    return _sign_estimate(obj, x, cfg, u, streams)


def estimate_psgd_g(obj, x: np.ndarray, cfg: EstimatorConfig, streams: TrialStreams) -> GradientEstimate:
    u = sample_gaussian(streams.perturbation, cfg.dimension)
    return _sign_estimate(obj, x, cfg, u, streams)


def estimate_zo_two_point(obj, x: np.ndarray, cfg: EstimatorConfig, streams: TrialStreams) -> GradientEstimate:
    u = sample_unit_sphere(streams.perturbation, cfg.dimension)
    if np.shape(x) != (obj.dimension,):
        raise InvalidInputError(f"x must have shape ({obj.dimension},), got {np.shape(x)}")
    diff = obj.evaluate(x + cfg.delta * u, streams.noise1) - obj.evaluate(x, streams.noise2)
    coef = cfg.coefficient
    return GradientEstimate(coef * diff * u, coef, diff, u)


ESTIMATORS = {
    EstimatorKind.PSGD_U: estimate_psgd_u,
    EstimatorKind.PSGD_G: estimate_psgd_g,
    EstimatorKind.ZO_TWO_POINT: estimate_zo_two_point,
}


def estimate(obj, x: np.ndarray, cfg: EstimatorConfig, streams: TrialStreams) -> GradientEstimate:
    return ESTIMATORS[cfg.kind](obj, x, cfg, streams)
