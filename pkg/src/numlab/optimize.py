"""Nelder-Mead simplex minimization and nonlinear least-squares fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .expr import EvaluationError, Expr, lambdify
from .rng import RngState, uniform_vector


class OptimizeError(Exception):
    pass


@dataclass(frozen=True)
class NmOptions:
    alpha: float = 1.0  # reflection
    gamma: float = 2.0  # expansion
    rho: float = 0.5  # contraction
    sigma: float = 0.5  # shrink
    x_tol: float = 1e-8
    f_tol: float = 1e-8
    max_iter: int = 2000

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass(frozen=True)
class NmStep:
    """Snapshot handed to the ``callback`` of :func:`nelder_mead` after each iteration."""

    iteration: int
    move: str
    simplex: np.ndarray
    fvalues: np.ndarray


@dataclass(frozen=True)
class NmResult:
    xmin: np.ndarray
    fmin: float
    iterations: int
    converged: bool


def initial_simplex(x0: np.ndarray) -> np.ndarray:
    n = len(x0)
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += 0.05 * abs(x0[i]) if x0[i] != 0 else 0.00025
    return simplex


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0,
    opts: NmOptions = NmOptions(),
    callback: Callable[[NmStep], None] | None = None,
) -> NmResult:
    """Minimize ``objective`` with the Nelder-Mead simplex method.

    Termination requires both the largest vertex distance from the best
    vertex below ``x_tol`` and the spread of values below ``f_tol``.
    """
    x0 = np.asarray(x0, dtype=float)
    sim = initial_simplex(x0)
    fs = np.array([objective(v) for v in sim], dtype=float)
    if not np.all(np.isfinite(fs)):
        raise OptimizeError("objective is not finite on the initial simplex")
    n = len(x0)
    a, g, r, s = opts.alpha, opts.gamma, opts.rho, opts.sigma

    it = 0
    converged = False
    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        spread = np.max(np.sqrt(np.sum((sim[1:] - sim[0]) ** 2, axis=1)))
        if spread < opts.x_tol and fs[-1] - fs[0] < opts.f_tol:
            converged = True
            break
        if it >= opts.max_iter:
            break
        it += 1

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = centroid + a * (centroid - worst)
        fr = objective(xr)
        move = None
        if fr < fs[0]:
            xe = centroid + g * (xr - centroid)
            fe = objective(xe)
            if fe < fr:
                sim[-1], fs[-1], move = xe, fe, "expand"
            else:
                sim[-1], fs[-1], move = xr, fr, "reflect"
        elif fr < fs[-2]:
            sim[-1], fs[-1], move = xr, fr, "reflect"
        elif fr < fs[-1]:
            xc = centroid + r * (xr - centroid)
            fc = objective(xc)
            if fc <= fr:
                sim[-1], fs[-1], move = xc, fc, "contract_outside"
        else:
            xc = centroid + r * (worst - centroid)
            fc = objective(xc)
            if fc < fs[-1]:
                sim[-1], fs[-1], move = xc, fc, "contract_inside"
        if move is None:
            best = sim[0]
            sim[1:] = best + s * (sim[1:] - best)
            fs[1:] = [objective(v) for v in sim[1:]]
            move = "shrink"
        if callback is not None:
            callback(NmStep(iteration=it, move=move, simplex=sim.copy(), fvalues=fs.copy()))

    return NmResult(sim[0].copy(), float(fs[0]), it, converged)


# ---------------------------------------------------------------------------
# Model fitting


def _model_fn(model: Expr, x_var: str, param_vars: Sequence[str]):
    fn = lambdify(model, [x_var, *param_vars], vectorized=True)
    return lambda lam, xdata: fn(xdata, *lam)


def residual_norm(model, x_var, param_vars, lam, xdata, ydata) -> float:
    """Euclidean norm of the model residual, the square root of the
    sum-of-squares objective (same minimizer)."""
    xdata, ydata = np.asarray(xdata, dtype=float), np.asarray(ydata, dtype=float)
    if xdata.shape != ydata.shape or xdata.size < 1:
        raise ValueError("xdata and ydata must be non-empty and of equal length")
    fn = model if callable(model) else _model_fn(model, x_var, param_vars)
    return linalg.vec_norm2(fn(lam, xdata) - ydata)


def generate_noisy_data(
    model: Expr,
    x_var: str,
    param_vars: Sequence[str],
    lambda_true,
    xdata,
    noise_lo: float,
    noise_hi: float,
    rng: RngState,
) -> tuple[np.ndarray, RngState]:
    """Model values multiplied by factors drawn uniformly from [noise_lo, noise_hi)."""
    if noise_lo > noise_hi:
        raise ValueError("noise_lo must not exceed noise_hi")
    xdata = np.asarray(xdata, dtype=float)
    y = _model_fn(model, x_var, param_vars)(np.asarray(lambda_true, dtype=float), xdata)
    u, rng = uniform_vector(xdata.size, rng)
    return y * (noise_lo + (noise_hi - noise_lo) * u), rng


@dataclass(frozen=True)
class FitResult:
    lambda_fit: np.ndarray
    s_initial: float
    s_final: float
    iterations: int
    converged: bool


def fit_model(
    model: Expr,
    x_var: str,
    param_vars: Sequence[str],
    xdata,
    ydata,
    lambda0,
    opts: NmOptions = NmOptions(),
) -> FitResult:
    xdata, ydata = np.asarray(xdata, dtype=float), np.asarray(ydata, dtype=float)
    lambda0 = np.asarray(lambda0, dtype=float)
    if lambda0.shape != (len(param_vars),):
        raise ValueError(f"lambda0 has {lambda0.size} entries for {len(param_vars)} parameters")
    fn = _model_fn(model, x_var, param_vars)

    def objective(lam):
        try:
            return residual_norm(fn, x_var, param_vars, lam, xdata, ydata)
        except EvaluationError:
            # outside the model's domain: the simplex just steps away
            return math.inf

    s0 = residual_norm(fn, x_var, param_vars, lambda0, xdata, ydata)
    res = nelder_mead(objective, lambda0, opts)
    return FitResult(res.xmin, s0, res.fmin, res.iterations, res.converged)
