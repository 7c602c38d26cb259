"""Scalar discounted LQG benchmark.

Plant ``x_{k+1} = A x_k + B u_k + w_k`` with ``u_k = K x_k`` and
``w_k ~ N(0, noise_std^2)``; cost

    V(K) = sum_{t=0}^{horizon} gamma^t (Q x_t^2 + R u_t^2).

The optimal gain comes from the scalar discounted Riccati fixed point.  It
is the infinite-horizon optimum; over ``horizon = 50`` with ``gamma = 0.7``
the difference from the finite-horizon minimizer is below ``gamma**50``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericError
from .oracles import StochasticObjective

COST_CAP = 1e12


@dataclass(frozen=True)
class LqgSystem:
    A: float = 1.1
    B: float = 0.1
    Q: float = 1.0
    R: float = 1.0
    gamma: float = 0.7
    noise_std: float = 0.01
    horizon: int = 50
    x0_state: float = 1.0

    def __post_init__(self):
        if not self.Q > 0 or not self.R > 0:
            raise InvalidInputError("Q and R must be positive")
        if not 0 < self.gamma < 1:
            raise InvalidInputError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.noise_std < 0:
            raise InvalidInputError("noise_std must be nonnegative")
        if self.horizon < 1:
            raise InvalidInputError("horizon must be positive")


def rollout_cost(sys: LqgSystem, K: float, rng: np.random.Generator) -> float:
    """One noisy discounted cost sample, capped at ``COST_CAP``."""
    K = float(K)
    a = sys.A + sys.B * K
    weight = sys.Q + sys.R * K * K
    w = (sys.noise_std * rng.standard_normal(sys.horizon)).tolist()
    x = float(sys.x0_state)
    cost = weight * x * x
    disc = 1.0
    for wk in w:
        x = a * x + wk
        disc *= sys.gamma
        cost += disc * weight * x * x
        if not cost < COST_CAP:  # also catches nan from overflow
            return COST_CAP
    return cost


def expected_cost(sys: LqgSystem, K):
    """E V(K) via the second-moment recursion m_{t+1} = (A+BK)^2 m_t + sigma^2.

    Accepts a scalar or an array of gains (evaluated elementwise).
    """
    if np.ndim(K) == 0:
        K = float(K)
        a2 = (sys.A + sys.B * K) ** 2
        s2 = sys.noise_std**2
        m = sys.x0_state**2
        total = 0.0
        disc = 1.0
        for _ in range(sys.horizon + 1):
            total += disc * m
            m = a2 * m + s2
            disc *= sys.gamma
        return (sys.Q + sys.R * K * K) * total

    K = np.asarray(K, dtype=float)
    a2 = (sys.A + sys.B * K) ** 2
    s2 = sys.noise_std**2
    m = np.full(K.shape, sys.x0_state**2)
    total = np.zeros(K.shape)
    disc = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(sys.horizon + 1):
            total += disc * m
            m = a2 * m + s2
            disc *= sys.gamma
        return (sys.Q + sys.R * K * K) * total


def riccati_optimal_gain(sys: LqgSystem, tol: float = 1e-12, max_iter: int = 10**6) -> float:
    """Optimal discounted gain from the scalar Riccati fixed-point iteration."""
    A, B, Q, R, g = sys.A, sys.B, sys.Q, sys.R, sys.gamma
    P = Q
    for _ in range(max_iter):
        P_next = Q + g * A * A * P - (g * A * B * P) ** 2 / (R + g * B * B * P)
        if abs(P_next - P) < tol:
            P = P_next
            break
        P = P_next
    else:
        raise NumericError(f"Riccati iteration did not converge in {max_iter} steps")
    return -g * A * B * P / (R + g * B * B * P)


class LqgObjective(StochasticObjective):
    """One-dimensional objective over the gain ``K``; a sample is one rollout."""

    dimension = 1

    def __init__(self, system: LqgSystem, fd_step: float = 1e-6):
        self.system = system
        self.fd_step = fd_step

    def __repr__(self):
        return f"LqgObjective({self.system!r})"

    def evaluate(self, x, rng):
        return rollout_cost(self.system, x[0], rng)

    def expected_value(self, x):
        return expected_cost(self.system, float(np.asarray(x, dtype=float).reshape(-1)[0]))

    def expected_gradient(self, x):
        k = float(np.asarray(x, dtype=float).reshape(-1)[0])
        h = self.fd_step
        return np.array([(expected_cost(self.system, k + h) - expected_cost(self.system, k - h)) / (2 * h)])


def lqg_objective(sys: LqgSystem) -> LqgObjective:
    return LqgObjective(sys)


def perturbed_init(kstar: float, rng: np.random.Generator) -> float:
    """K_0 = K* + U with U ~ Uniform[0, 1]."""
    return float(kstar) + float(rng.uniform(0.0, 1.0))
