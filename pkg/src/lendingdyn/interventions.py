"""Structural interventions and the recommendation grid.

A policy evaluation compares a horizon outcome against the no-intervention
baseline (both groups at the pre-intervention penalty c-hat, approved at the
analytic optimal threshold).  The utility of an outcome is

    U = -alpha * |mean_A - mean_D| + (1 - alpha) * efficiency

where efficiency is, in the default signed mode, the summed change of each
group's mean against its baseline; literal mode sums absolute deviations
instead (it rewards harming a group and is kept only as a switch).

Three interventions are compared at strength r in [0, 1]:

    beta_only        penalties unchanged
    group_blind      both groups: c-hat - r * c-hat / 2
    group_conscious  advantaged: c-hat; disadvantaged: c-hat - r * c-hat

After the penalty change, the approval threshold is searched on a 0.01 grid
to maximize the seed-averaged utility at the horizon (one shared beta by
default; independent per-group thresholds behind a flag).  Horizon means are
averaged over replicates first and the utility is computed once from the
averaged means, so a stored utility is always recomputable from its outcome.

Every replicate's uniforms depend only on (seed, replicate, step, group
slot, agent), so outcomes are coupled across policies, penalties, and
thresholds that share a seed, and grid evaluation order cannot change any
number.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._random import derive_seed, uniform_block, TAG_CELL, TAG_REPLICATE
from .dynamics import DynamicsParams, ScoreDistribution
from .thresholds import optimal_threshold


class InterventionKind(enum.Enum):
    BETA_ONLY = "beta_only"
    GROUP_BLIND = "group_blind"
    GROUP_CONSCIOUS = "group_conscious"


KIND_ORDER = (InterventionKind.BETA_ONLY, InterventionKind.GROUP_BLIND,
              InterventionKind.GROUP_CONSCIOUS)


@dataclass(frozen=True)
class UtilityWeights:
    """alpha weights parity against efficiency; mode picks the efficiency term."""

    alpha: float
    mode: str = "signed"

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and 0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if self.mode not in ("signed", "literal"):
            raise ValueError(f"mode must be 'signed' or 'literal', got {self.mode!r}")


def _efficiency(mean_a, mean_d, base_a, base_d, mode: str):
    if mode == "signed":
        return (mean_a - base_a) + (mean_d - base_d)
    return np.abs(mean_a - base_a) + np.abs(mean_d - base_d)


def _utility_values(mean_a, mean_d, base_a, base_d, w: UtilityWeights):
    parity = -w.alpha * np.abs(mean_a - mean_d)
    return parity + (1.0 - w.alpha) * _efficiency(mean_a, mean_d, base_a, base_d, w.mode)


def utility(mean_a: float, mean_d: float, base_a: float, base_d: float,
            weights: UtilityWeights) -> float:
    """Utility of one outcome pair against its baseline pair."""
    for name, v in (("mean_a", mean_a), ("mean_d", mean_d),
                    ("base_a", base_a), ("base_d", base_d)):
        if not (np.isfinite(v) and 0.0 <= v <= 1.0):
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
    return float(_utility_values(mean_a, mean_d, base_a, base_d, weights))


@dataclass(frozen=True)
class InterventionSpec:
    kind: InterventionKind
    r: float
    baseline_c: float

    def __post_init__(self):
        if not isinstance(self.kind, InterventionKind):
            raise TypeError(f"kind must be an InterventionKind, got {self.kind!r}")
        if not (np.isfinite(self.r) and 0.0 <= self.r <= 1.0):
            raise ValueError(f"r must lie in [0, 1], got {self.r!r}")
        if not (np.isfinite(self.baseline_c) and self.baseline_c >= 0.0):
            raise ValueError(f"baseline_c must be nonnegative, got {self.baseline_c!r}")


def apply_intervention(params: DynamicsParams, spec: InterventionSpec,
                       disadvantaged: str = "D") -> DynamicsParams:
    """Post-intervention penalties; k and the group set come from params."""
    groups = tuple(params.c_by_group)
    if spec.kind is InterventionKind.GROUP_CONSCIOUS and disadvantaged not in groups:
        raise KeyError(f"disadvantaged group {disadvantaged!r} not in {groups}")
    c_hat = spec.baseline_c
    if spec.kind is InterventionKind.BETA_ONLY:
        c_by_group = {g: c_hat for g in groups}
    elif spec.kind is InterventionKind.GROUP_BLIND:
        c_by_group = {g: c_hat - spec.r * c_hat / 2.0 for g in groups}
    else:
        c_by_group = {g: c_hat - spec.r * c_hat if g == disadvantaged else c_hat
                      for g in groups}
    return DynamicsParams(k=params.k, c_by_group=c_by_group)


def _replicate_seeds(seed: int, n_seeds: int) -> list[int]:
    return [derive_seed(seed, TAG_REPLICATE, r) for r in range(n_seeds)]


def _mean_curves(scores0: np.ndarray, k: float, c: float, betas: np.ndarray,
                 blocks: np.ndarray) -> np.ndarray:
    """Horizon-end group means, shape (replicates, len(betas)).

    blocks: uniforms of shape (replicates, horizon, n).  The per-step update
    is arithmetic-identical to step_population, so column j of replicate r
    reproduces simulate_group(..., betas[j], seed=rep_seed[r]) exactly.
    """
    n_reps, horizon, n = blocks.shape
    nb = betas.size
    S = np.empty((n_reps, nb, n))
    S[:] = scores0
    b = betas[None, :, None]
    for t in range(horizon):
        u = blocks[:, t, None, :]
        paid = u < S
        moved = np.clip(S + np.where(paid, k, -c * k), 0.0, 1.0)
        S = np.where(S >= b, moved, S)
    return S.mean(axis=2)


def _group_curves(dist: ScoreDistribution, slot: int, k: float, c: float,
                  betas: np.ndarray, rep_seeds: Sequence[int],
                  horizon: int) -> np.ndarray:
    blocks = np.stack([uniform_block(s, horizon, slot, dist.n) for s in rep_seeds])
    return _mean_curves(dist.scores, k, c, betas, blocks)


def _beta_grid(step: float) -> np.ndarray:
    m = int(round(1.0 / step))
    return np.linspace(0.0, 1.0, m + 1)


def baseline_outcome(dist_a: ScoreDistribution, dist_d: ScoreDistribution,
                     params: DynamicsParams, horizon: int, seed: int,
                     long_run_search: bool = False,
                     beta_step: float = 0.01) -> dict[str, float]:
    """Per-group horizon means under the pre-intervention optimum.

    Default threshold is each group's analytic one-step beta-hat; with
    long_run_search the horizon mean itself is grid-searched per group
    (ties toward the larger beta).
    """
    out = {}
    for slot, dist in ((0, dist_a), (1, dist_d)):
        c = params.c_for(dist.group)
        if long_run_search:
            betas = _beta_grid(beta_step)
            curve = _group_curves(dist, slot, params.k, c, betas, [seed], horizon)[0]
            out[dist.group] = float(curve[np.flatnonzero(curve == curve.max())[-1]])
        else:
            bhat = optimal_threshold(params.k, c).beta_hat
            curve = _group_curves(dist, slot, params.k, c, np.array([bhat]),
                                  [seed], horizon)[0]
            out[dist.group] = float(curve[0])
    return out


@dataclass(frozen=True)
class PolicyOutcome:
    """Best-threshold result of one intervention evaluation."""

    kind: InterventionKind
    r: float
    baseline_c: float
    weights: UtilityWeights
    beta_by_group: Mapping[str, float]
    mean_a: float
    mean_d: float
    base_a: float
    base_d: float
    utility: float

    def __post_init__(self):
        object.__setattr__(self, "beta_by_group", dict(self.beta_by_group))


def evaluate_policy(dist_a: ScoreDistribution, dist_d: ScoreDistribution,
                    spec: InterventionSpec, weights: UtilityWeights, k: float,
                    horizon: int = 20, n_seeds: int = 10, seed: int = 0,
                    per_group_beta: bool = False, beta_step: float = 0.01,
                    long_run_baseline: bool = False) -> PolicyOutcome:
    """Apply one intervention and search the threshold grid for best utility.

    Replicate streams depend only on (seed, replicate), so evaluations that
    share a seed are coupled across kinds, r values, and thresholds.
    """
    if dist_a.group == dist_d.group:
        raise ValueError("groups must have distinct labels")
    pre = DynamicsParams.uniform(k, spec.baseline_c,
                                 (dist_a.group, dist_d.group))
    post = apply_intervention(pre, spec, disadvantaged=dist_d.group)
    betas = _beta_grid(beta_step)
    rep_seeds = _replicate_seeds(seed, n_seeds)

    curves_a = _group_curves(dist_a, 0, k, post.c_for(dist_a.group), betas,
                             rep_seeds, horizon)
    curves_d = _group_curves(dist_d, 1, k, post.c_for(dist_d.group), betas,
                             rep_seeds, horizon)
    ma = curves_a.mean(axis=0)
    md = curves_d.mean(axis=0)

    base_by_rep_a = []
    base_by_rep_d = []
    for rs in rep_seeds:
        base = baseline_outcome(dist_a, dist_d, pre, horizon, rs,
                                long_run_search=long_run_baseline,
                                beta_step=beta_step)
        base_by_rep_a.append(base[dist_a.group])
        base_by_rep_d.append(base[dist_d.group])
    base_a = float(np.mean(base_by_rep_a))
    base_d = float(np.mean(base_by_rep_d))

    if per_group_beta:
        grid_u = _utility_values(ma[:, None], md[None, :], base_a, base_d, weights)
        flat = grid_u.ravel()
        best = np.flatnonzero(flat == flat.max())[-1]
        ia, id_ = np.unravel_index(best, grid_u.shape)
        beta_by_group = {dist_a.group: float(betas[ia]),
                         dist_d.group: float(betas[id_])}
        mean_a, mean_d = float(ma[ia]), float(md[id_])
    else:
        u_vals = _utility_values(ma, md, base_a, base_d, weights)
        best = np.flatnonzero(u_vals == u_vals.max())[-1]
        beta_by_group = {dist_a.group: float(betas[best]),
                         dist_d.group: float(betas[best])}
        mean_a, mean_d = float(ma[best]), float(md[best])

    return PolicyOutcome(
        kind=spec.kind, r=spec.r, baseline_c=spec.baseline_c, weights=weights,
        beta_by_group=beta_by_group, mean_a=mean_a, mean_d=mean_d,
        base_a=base_a, base_d=base_d,
        utility=utility(mean_a, mean_d, base_a, base_d, weights))


@dataclass(frozen=True)
class GridCell:
    c: float
    r: float
    best: InterventionKind
    utilities: Mapping[InterventionKind, float]
    marginal: float          # max-normalized across the whole grid
    outcomes: Mapping[InterventionKind, PolicyOutcome]

    def __post_init__(self):
        object.__setattr__(self, "utilities", dict(self.utilities))
        object.__setattr__(self, "outcomes", dict(self.outcomes))


@dataclass(frozen=True)
class RecommendationGrid:
    weights: UtilityWeights
    c_values: tuple[float, ...]
    r_values: tuple[float, ...]
    cells: tuple[GridCell, ...]   # row-major: c outer, r inner
    k: float
    horizon: int
    n_seeds: int
    seed: int

    def cell(self, c: float, r: float) -> GridCell:
        for cell in self.cells:
            if cell.c == c and cell.r == r:
                return cell
        raise KeyError(f"no cell at ({c}, {r})")


def recommend_grid(dist_a: ScoreDistribution, dist_d: ScoreDistribution,
                   c_grid: Sequence[float], r_grid: Sequence[float],
                   weights: UtilityWeights, k: float, horizon: int = 20,
                   n_seeds: int = 10, seed: int = 0, threads: int = 1,
                   per_group_beta: bool = False,
                   beta_step: float = 0.01) -> RecommendationGrid:
    """Evaluate all three interventions on every (c-hat, r) anchor cell.

    Cell (i, j) under policy kind p draws its seed from
    (seed, cell index, p) and its replicates from that, per the concurrency
    contract; thread count can only change wall time, never a value.
    """
    c_values = tuple(float(c) for c in c_grid)
    r_values = tuple(float(r) for r in r_grid)
    if not c_values or not r_values:
        raise ValueError("c_grid and r_grid must be nonempty")

    tasks = []
    for cell_idx in range(len(c_values) * len(r_values)):
        c_hat = c_values[cell_idx // len(r_values)]
        r = r_values[cell_idx % len(r_values)]
        for kind_idx, kind in enumerate(KIND_ORDER):
            tasks.append((cell_idx, c_hat, r, kind_idx, kind))

    def run(task):
        cell_idx, c_hat, r, kind_idx, kind = task
        spec = InterventionSpec(kind=kind, r=r, baseline_c=c_hat)
        cell_seed = derive_seed(seed, TAG_CELL, cell_idx, kind_idx)
        return evaluate_policy(dist_a, dist_d, spec, weights, k,
                               horizon=horizon, n_seeds=n_seeds,
                               seed=cell_seed, per_group_beta=per_group_beta,
                               beta_step=beta_step)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    by_cell: list[dict[InterventionKind, PolicyOutcome]] = [
        {} for _ in range(len(c_values) * len(r_values))]
    for (cell_idx, _, _, _, kind), outcome in zip(tasks, results):
        by_cell[cell_idx][kind] = outcome

    raw_marginals = []
    for outcomes in by_cell:
        u = sorted((outcomes[kind].utility for kind in KIND_ORDER), reverse=True)
        raw_marginals.append(u[0] - u[1])
    max_marginal = max(raw_marginals)
    scale = max_marginal if max_marginal > 0 else 1.0

    cells = []
    for cell_idx, outcomes in enumerate(by_cell):
        utilities = {kind: outcomes[kind].utility for kind in KIND_ORDER}
        best = KIND_ORDER[int(np.argmax([utilities[kind] for kind in KIND_ORDER]))]
        cells.append(GridCell(
            c=c_values[cell_idx // len(r_values)],
            r=r_values[cell_idx % len(r_values)],
            best=best, utilities=utilities,
            marginal=raw_marginals[cell_idx] / scale,
            outcomes=outcomes))
    return RecommendationGrid(weights=weights, c_values=c_values,
                              r_values=r_values, cells=tuple(cells), k=k,
                              horizon=horizon, n_seeds=n_seeds, seed=seed)


def grid_as_dict(grid: RecommendationGrid) -> dict:
    """JSON form: {alpha, c_grid, r_grid, cells:[...]}."""
    return {
        "alpha": grid.weights.alpha,
        "c_grid": list(grid.c_values),
        "r_grid": list(grid.r_values),
        "cells": [
            {
                "c": cell.c,
                "r": cell.r,
                "best": cell.best.value,
                "utilities": {kind.value: cell.utilities[kind]
                              for kind in KIND_ORDER},
                "marginal": cell.marginal,
            }
            for cell in grid.cells
        ],
    }


def grid_rows(grid: RecommendationGrid) -> list[dict]:
    """Flat CSV form, one row per cell."""
    return [
        {
            "c": cell.c,
            "r": cell.r,
            "best": cell.best.value,
            "utility_beta_only": cell.utilities[InterventionKind.BETA_ONLY],
            "utility_group_blind": cell.utilities[InterventionKind.GROUP_BLIND],
            "utility_group_conscious": cell.utilities[InterventionKind.GROUP_CONSCIOUS],
            "marginal": cell.marginal,
        }
        for cell in grid.cells
    ]
