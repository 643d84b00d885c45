"""Conditioning study: error of linear solves against prescribed condition numbers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .rng import RngState, random_matrix

DEFAULT_N = 20
DEFAULT_EXPONENTS = tuple(float(p) for p in range(1, 16, 2))


@dataclass(frozen=True)
class CondRecord:
    c: float
    err: float


def prescribe_condition(
    a: np.ndarray, c: float, factors: linalg.SvdFactors | None = None
) -> np.ndarray:
    """Rebuild ``a`` from its SVD with singular values replaced by a linear
    ramp from s_max down to s_max/c, so the result has condition number c.

    ``factors`` may carry a precomputed SVD of ``a`` to avoid refactoring
    when sweeping many values of c.
    """
    n = linalg._require_square(a)
    if n < 2:
        raise ValueError("need a matrix of order at least 2")
    if not c >= 1:
        raise ValueError(f"condition number must be >= 1, got {c}")
    f = factors if factors is not None else linalg.svd(a)
    s0 = f.s[0]
    if f.s[-1] == 0.0:
        raise linalg.SingularMatrixError("input matrix is singular")
    ramp = np.array([s0 - j * (s0 - s0 / c) / (n - 1) for j in range(n)])
    return (f.U * ramp) @ f.V.T


def condition_error_study(
    n: int = DEFAULT_N,
    exponents: Sequence[float] = DEFAULT_EXPONENTS,
    rng: RngState = RngState(42),
) -> list[CondRecord]:
    """Draw one random n×n matrix, then for each c = 10^p solve A_c·x = A_c·1
    and record ‖x - 1‖₂. The base matrix and its SVD are shared by all c."""
    if n < 2:
        raise ValueError("n must be at least 2")
    a, _ = random_matrix(n, rng)
    f = linalg.svd(a)
    ones = np.ones(n)
    records = []
    for p in exponents:
        c = 10.0**p
        ac = prescribe_condition(a, c, f)
        x = linalg.solve(ac, ac @ ones)
        records.append(CondRecord(c, linalg.vec_norm2(x - ones)))
    return records


def loglog_slope(records: Sequence[CondRecord]) -> float:
    """Least-squares slope of log10(err) against log10(c)."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    if any(r.err <= 0 for r in records):
        raise ValueError("errors must be positive to take logarithms")
    x = np.array([math.log10(r.c) for r in records])
    y = np.array([math.log10(r.err) for r in records])
    dx = x - x.mean()
    denom = float(np.dot(dx, dx))
    if denom == 0.0:
        raise ValueError("condition numbers must not all be equal")
    return float(np.dot(dx, y - y.mean()) / denom)
