"""Exact absorbing-chain analysis of a single agent's score walk.

With rational step sizes the walk from a rational start visits finitely many
scores: up-moves add `up`, down-moves subtract `down`, values at or above 1
collapse to the absorbing score 1, values below the threshold beta freeze
where they land (each kept as its own absorbing state), and values below 0
collapse to 0.  Ordering states as (absorbing, transient) gives the block
transition matrix

    S = [ I  0 ]
        [ A  B ]

whose transient block B has zero diagonal (a transient state always moves)
and spectral radius < 1.  Absorption probabilities solve (I - B) X = A and
expected steps to absorption solve (I - B) t = 1.  All states and transition
probabilities are exact fractions; floats appear only at the linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .dynamics import DynamicsParams, ScoreDistribution, ThresholdPolicy, simulate_group


class ChainError(ValueError):
    """Raised when a chain cannot be built or fails its sanity checks."""


def _exact(value, name: str) -> Fraction:
    if isinstance(value, float):
        raise TypeError(
            f"{name} must be an exact rational (int, Fraction, or 'a/b' string); "
            f"floats like {value!r} are not accepted")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{name} is not a valid rational: {value!r}") from exc


ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class RationalStep:
    """Exact move sizes: up = k per repayment, down = c*k per late payment."""

    up: Fraction
    down: Fraction

    def __post_init__(self):
        up = _exact(self.up, "up")
        down = _exact(self.down, "down")
        if up < 0 or down < 0:
            raise ValueError("step sizes must be nonnegative")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @classmethod
    def from_gain_penalty(cls, k, c) -> "RationalStep":
        k = _exact(k, "k")
        c = _exact(c, "c")
        return cls(up=k, down=c * k)


@dataclass(frozen=True)
class StateSpace:
    """Reachable states from pi0, partitioned by absorption."""

    pi0: Fraction
    step: RationalStep
    beta: Fraction
    transient: tuple[Fraction, ...]
    absorbing: tuple[Fraction, ...]

    @property
    def states(self) -> tuple[Fraction, ...]:
        return self.absorbing + self.transient


def _is_absorbing(x: Fraction, beta: Fraction) -> bool:
    # 0 never repays and 1 never slips, so both trap regardless of beta.
    return x < beta or x == ZERO or x == ONE


def enumerate_states(pi0, step: RationalStep, beta) -> StateSpace:
    """Closure of {pi0} under the clamped walk, split transient/absorbing."""
    pi0 = _exact(pi0, "pi0")
    beta = _exact(beta, "beta")
    if not (ZERO <= pi0 <= ONE):
        raise ValueError(f"pi0 must lie in [0, 1], got {pi0}")
    if not (ZERO <= beta <= ONE):
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if step.up == 0 or step.down == 0:
        raise ChainError(
            "zero step sizes create transient self-loops; the block structure "
            "requires up > 0 and down > 0")
    seen = {pi0}
    frontier = [pi0]
    while frontier:
        x = frontier.pop()
        if _is_absorbing(x, beta):
            continue
        for nxt in (min(x + step.up, ONE), max(x - step.down, ZERO)):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    transient = tuple(sorted(x for x in seen if not _is_absorbing(x, beta)))
    absorbing = tuple(sorted(x for x in seen if _is_absorbing(x, beta)))
    return StateSpace(pi0=pi0, step=step, beta=beta,
                      transient=transient, absorbing=absorbing)


@dataclass(frozen=True)
class AbsorbingChain:
    """Exact transition blocks over an enumerated state space."""

    space: StateSpace
    # rows: transient states in space order; columns: see each block.
    transient_block: tuple[tuple[Fraction, ...], ...]   # B, transient -> transient
    absorbing_block: tuple[tuple[Fraction, ...], ...]   # A, transient -> absorbing

    def b_matrix(self) -> np.ndarray:
        return np.array([[float(p) for p in row] for row in self.transient_block])

    def a_matrix(self) -> np.ndarray:
        return np.array([[float(p) for p in row] for row in self.absorbing_block])


def build_chain(space: StateSpace) -> AbsorbingChain:
    """Fill the transition blocks: up with probability x, down with 1 - x."""
    t_index = {s: i for i, s in enumerate(space.transient)}
    a_index = {s: i for i, s in enumerate(space.absorbing)}
    nt, na = len(space.transient), len(space.absorbing)
    B = [[ZERO] * nt for _ in range(nt)]
    A = [[ZERO] * na for _ in range(nt)]
    for i, x in enumerate(space.transient):
        for target, prob in ((min(x + space.step.up, ONE), x),
                             (max(x - space.step.down, ZERO), ONE - x)):
            if target in t_index:
                B[i][t_index[target]] += prob
            else:
                A[i][a_index[target]] += prob
    for i, x in enumerate(space.transient):
        if B[i][i] != 0:
            raise ChainError(f"transient state {x} self-loops")
        if sum(B[i]) + sum(A[i]) != ONE:
            raise ChainError(f"row for state {x} is not stochastic")
    return AbsorbingChain(space=space,
                          transient_block=tuple(tuple(r) for r in B),
                          absorbing_block=tuple(tuple(r) for r in A))


def _spectral_radius_below_one(B: np.ndarray) -> None:
    # Power iteration on the nonnegative block; rho(B) >= 1 means the chain
    # was built wrong (some transient state cannot reach absorption).
    if B.size == 0:
        return
    v = np.full(B.shape[0], 1.0)
    rho = 0.0
    for _ in range(500):
        w = B @ v
        norm = w.max()
        if norm == 0.0:
            return
        rho = norm
        v = w / norm
    if rho >= 1.0:
        raise ChainError(f"transient block spectral radius {rho} >= 1")


@dataclass(frozen=True)
class AbsorptionResult:
    start: Fraction
    absorbing_states: tuple[Fraction, ...]
    probabilities: tuple[float, ...]
    expected_steps: float

    def as_dict(self) -> Mapping[Fraction, float]:
        return dict(zip(self.absorbing_states, self.probabilities))

    def probability_of(self, state) -> float:
        state = _exact(state, "state")
        try:
            return self.probabilities[self.absorbing_states.index(state)]
        except ValueError:
            raise KeyError(f"{state} is not an absorbing state") from None


def absorption_probabilities(chain: AbsorbingChain, start) -> AbsorptionResult:
    """Absorption distribution and expected steps from a known state."""
    start = _exact(start, "start")
    space = chain.space
    if start in space.absorbing:
        probs = tuple(1.0 if s == start else 0.0 for s in space.absorbing)
        return AbsorptionResult(start, space.absorbing, probs, 0.0)
    if start not in space.transient:
        raise ValueError(f"{start} is not a state of this chain")
    B = chain.b_matrix()
    A = chain.a_matrix()
    _spectral_radius_below_one(B)
    M = np.eye(B.shape[0]) - B
    X = np.linalg.solve(M, A)
    steps = np.linalg.solve(M, np.ones(B.shape[0]))
    i = space.transient.index(start)
    probs = X[i]
    total = probs.sum()
    if abs(total - 1.0) > 1e-10:
        raise ChainError(f"absorption probabilities sum to {total}, not 1")
    return AbsorptionResult(start, space.absorbing,
                            tuple(float(p) for p in probs),
                            float(steps[i]))


def transient_mass(chain: AbsorbingChain, start, steps: int) -> float:
    """P(still transient after `steps`) = row of B^steps summed."""
    start = _exact(start, "start")
    if start in chain.space.absorbing:
        return 0.0
    i = chain.space.transient.index(start)
    B = chain.b_matrix()
    v = np.ones(B.shape[0])
    for _ in range(steps):
        v = B @ v
    return float(v[i])


def verify_bifurcation(dist: ScoreDistribution, policy: ThresholdPolicy,
                       params: DynamicsParams, horizon: int, seed: int) -> float:
    """Fraction of agents still strictly inside (beta, 1) after `horizon` steps."""
    beta = policy.beta_for(dist.group)
    final = simulate_group(dist, beta, params.k, params.c_for(dist.group),
                           horizon, seed)
    return float(np.mean((final > beta) & (final < 1.0)))
