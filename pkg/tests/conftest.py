"""Shared fixtures and oracle helpers."""

from __future__ import annotations

import csv
import math

import numpy as np
import pytest

from lendingdyn import BetaSpec, sample_beta

# Coefficients the synthetic loan generator writes into the late label.
TRUE_INTERCEPT = -2.876
TRUE_BALANCE = 0.0
TRUE_LTV = 0.010
TRUE_DTI = 0.074
TRUE_UNITS = 0.244


def logistic(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def make_loan_rows(n: int, seed: int, purpose_mix: bool = True) -> list[dict]:
    """Synthetic training rows whose late labels follow the fixed pattern.

    Feature scales are compact (single digits to low hundreds) so the
    information matrix is well conditioned at the 1e-8 gradient bar.
    """
    rng = np.random.default_rng(seed)
    balance = rng.uniform(1.0, 9.0, n)
    ltv = rng.uniform(40.0, 100.0, n)
    dti = rng.uniform(0.5, 10.0, n)
    units = rng.integers(1, 5, n)
    lp = (TRUE_INTERCEPT + TRUE_BALANCE * balance + TRUE_LTV * ltv
          + TRUE_DTI * dti + TRUE_UNITS * units)
    late = (rng.random(n) < 1.0 / (1.0 + np.exp(-lp))).astype(int)
    purposes = ["purchase"] * n
    if purpose_mix:
        mix = rng.random(n)
        for i in range(n):
            if mix[i] < 0.10:
                purposes[i] = "refinance"
            elif mix[i] < 0.15:
                purposes[i] = "other"
    return [
        {"balance": repr(float(balance[i])), "ltv": repr(float(ltv[i])),
         "dti": repr(float(dti[i])), "units": str(int(units[i])),
         "purpose": purposes[i], "late": str(int(late[i]))}
        for i in range(n)
    ]


def write_loan_csv(path, rows: list[dict], columns=None) -> None:
    columns = columns or list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)


@pytest.fixture
def beta_pair():
    """A stochastically dominant pair with a visible mean gap."""
    dist_a = sample_beta(BetaSpec(a=4.0, b=8.0, n=400, seed=101), group="A")
    dist_d = sample_beta(BetaSpec(a=3.0, b=8.0, n=400, seed=202), group="D")
    return dist_a, dist_d


@pytest.fixture
def train_csv(tmp_path):
    path = tmp_path / "train.csv"
    write_loan_csv(path, make_loan_rows(1500, seed=5))
    return path
