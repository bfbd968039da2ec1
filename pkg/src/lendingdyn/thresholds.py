"""Optimal approval thresholds.

The expected next score of an approved agent is the gain function

    g(x) = x * clamp(x + k) + (1 - x) * clamp(x - c*k),

nondecreasing in x for k, c >= 0.  Away from the clamps g(x) - x =
k*((1+c)*x - c), so the sign of approving an agent flips at x0 = c / (1 + c).
The best stationary threshold approves exactly the agents with g(x) >= x:
beta_hat = x0 clamped into [0, 1], or 1 when g never exceeds x.  The solution
is piecewise exact — three linear segments, no root finding — and does not
depend on the score distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DynamicsParams, ScoreDistribution, ThresholdPolicy, \
    expected_next_score


@dataclass(frozen=True)
class GainFunction:
    k: float
    c: float

    def __post_init__(self):
        if self.k < 0 or self.c < 0:
            raise ValueError("k and c must be nonnegative")

    def __call__(self, x):
        return expected_next_score(x, self.k, self.c)


def gain(g: GainFunction, x):
    """Expected next score for an approved agent at score x."""
    return g(x)


@dataclass(frozen=True)
class OptimalThreshold:
    beta_hat: float
    crossing_point: float | None   # minimal x0 with g(x) > x beyond it; None if never


def optimal_threshold(k: float, c: float) -> OptimalThreshold:
    """Exact best stationary threshold for given k, c.

    Cases (k > 0): the strict-gain region is (x0, 1) with x0 = c/(1+c) while
    the crossing sits between the clamp segments, i.e. k*(1+c) <= 1; when the
    clamp segments overlap (k*(1+c) > 1) the crossing moves to x0 = c*k; and
    once c*k >= 1 the down-clamp pins g(x) <= x everywhere.  k = 0 freezes
    the dynamics, so there is no strict gain anywhere.
    """
    if k < 0 or c < 0:
        raise ValueError("k and c must be nonnegative")
    if k == 0 or c * k >= 1:
        return OptimalThreshold(beta_hat=1.0, crossing_point=None)
    if k * (1 + c) <= 1:
        x0 = c / (1.0 + c)
    else:
        x0 = c * k
    return OptimalThreshold(beta_hat=min(max(x0, 0.0), 1.0), crossing_point=x0)


def grid_search_threshold(dist: ScoreDistribution, params: DynamicsParams,
                          resolution: float = 1e-3) -> float:
    """Beta on the grid {0, res, ..., 1} maximizing the exact one-step mean.

    Ties break toward the largest beta.  resolution must be <= 0.01.
    """
    if not (0 < resolution <= 0.01):
        raise ValueError("resolution must lie in (0, 0.01]")
    m = int(round(1.0 / resolution))
    betas = np.linspace(0.0, 1.0, m + 1)
    scores = dist.scores
    g = expected_next_score(scores, params.k, params.c_for(dist.group))
    values = np.array([
        np.where(scores >= b, g, scores).mean() for b in betas
    ])
    best = np.flatnonzero(values == values.max())[-1]
    return float(betas[best])


def one_step_policy(k: float, c: float, groups) -> ThresholdPolicy:
    """Group-blind policy at beta_hat(k, c)."""
    return ThresholdPolicy.uniform(optimal_threshold(k, c).beta_hat, groups)
