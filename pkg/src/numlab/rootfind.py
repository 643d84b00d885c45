"""Scalar and multidimensional Newton iteration with symbolic derivatives."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .expr import Expr, differentiate, lambdify

DIVERGENCE_BOUND = 1e12


class NewtonError(Exception):
    pass


class StopReason(str, enum.Enum):
    ACCURACY_MET = "accuracy_met"
    MAX_ITERATIONS = "max_iterations"
    NUMERIC_FAILURE = "numeric_failure"


@dataclass(frozen=True)
class Step:
    index: int
    point: tuple[float, ...]
    residual_norm: float
    # scalar iteration only: f(x_k) and f(x_k - h) * f(x_k + h)
    value: float | None = None
    bracket: float | None = None


@dataclass
class IterationTrace:
    steps: list[Step] = field(default_factory=list)
    converged: bool = False
    stop_reason: StopReason = StopReason.MAX_ITERATIONS

    @property
    def points(self) -> np.ndarray:
        return np.array([s.point for s in self.steps])

    @property
    def final(self) -> Step:
        return self.steps[-1]


@dataclass(frozen=True)
class ScalarNewtonConfig:
    x0: float
    maxn: int = 10
    h: float = 5e-6

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.maxn < 1:
            raise ValueError("maxn must be at least 1")


def newton_scalar(f: Expr, var: str, cfg: ScalarNewtonConfig) -> tuple[float, IterationTrace]:
    """Newton iteration x <- x - f(x)/f'(x) with f' obtained symbolically.

    Stops as soon as f(c - h)·f(c + h) < 0, i.e. a sign change brackets the
    root within 2h, or after ``cfg.maxn`` steps. The starting point is not
    tested, only the iterates. Every point, x0 included, is recorded.
    """
    fn = lambdify(f, [var])
    dfn = lambdify(differentiate(f, var), [var])
    h = cfg.h

    def row(k, c):
        fc = fn(c)
        return Step(k, (c,), abs(fc), value=fc, bracket=fn(c - h) * fn(c + h))

    c = float(cfg.x0)
    trace = IterationTrace([row(0, c)])
    for j in range(1, cfg.maxn + 1):
        d = dfn(c)
        if d == 0.0:
            raise NewtonError(f"derivative vanishes at x = {c!r}")
        c = c - fn(c) / d
        if not math.isfinite(c) or abs(c) > DIVERGENCE_BOUND:
            trace.stop_reason = StopReason.NUMERIC_FAILURE
            return c, trace
        step = row(j, c)
        trace.steps.append(step)
        if step.bracket < 0:
            trace.converged = True
            trace.stop_reason = StopReason.ACCURACY_MET
            break
    return c, trace


def jacobian(fs: Sequence[Expr], vars: Sequence[str]) -> list[list[Expr]]:
    if len(fs) != len(vars):
        raise ValueError(f"{len(fs)} functions but {len(vars)} variables")
    return [[differentiate(f, v) for v in vars] for f in fs]


def newton_system(
    fs: Sequence[Expr],
    vars: Sequence[str],
    x0,
    maxiter: int = 12,
    tol: float = 1e-10,
) -> IterationTrace:
    """Newton's method for a square system, x <- x - Δ with J(x)·Δ = f(x).

    The residual ‖f(x_k)‖₂ is recorded for every point. Iteration stops when
    it falls below ``tol`` or after ``maxiter`` updates; ``tol=0`` gives the
    fixed-count mode.
    """
    n = len(vars)
    x = np.array(x0, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"initial point has {x.size} components, expected {n}")
    fns = [lambdify(f, vars) for f in fs]
    jac = [[lambdify(d, vars) for d in row] for row in jacobian(fs, vars)]

    trace = IterationTrace()
    for k in range(maxiter + 1):
        fx = np.array([fn(*x) for fn in fns])
        r = linalg.vec_norm2(fx)
        trace.steps.append(Step(k, tuple(float(v) for v in x), r))
        if r < tol:
            trace.converged = True
            trace.stop_reason = StopReason.ACCURACY_MET
            break
        if k == maxiter:
            break
        jx = np.array([[d(*x) for d in row] for row in jac])
        try:
            delta = linalg.solve(jx, fx)
        except linalg.SingularMatrixError:
            raise NewtonError(f"singular Jacobian at x = {x.tolist()}") from None
        x = x - delta
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_BOUND:
            trace.stop_reason = StopReason.NUMERIC_FAILURE
            break
    return trace
