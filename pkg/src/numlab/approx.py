"""L2 polynomial approximation through monomial normal equations.

Coefficients are stored in descending powers: ``coeffs[k-1]`` multiplies
``x**(n-k)``, the same convention as ``numpy.polyval``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .expr import Expr, lambdify
from .quadrature import adaptive_integral

DEFAULT_MAX_N = 12


@dataclass(frozen=True)
class PolyApproxResult:
    n: int
    coeffs: np.ndarray
    max_abs_err: float
    int_abs_err: float
    int_sq_err: float
    grid: list[tuple[float, float, float]]  # (x, g(x), p(x))


def normal_matrix(n: int, r1: float, r2: float) -> np.ndarray:
    """Gram matrix of the basis x^(n-1), ..., x, 1 on [r1, r2] in closed form."""
    if n < 1:
        raise ValueError("n must be positive")
    if not r1 < r2:
        raise ValueError("need r1 < r2")
    a = np.empty((n, n))
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            p = 2 * n - k - j + 1
            a[j - 1, k - 1] = (r2**p - r1**p) / p
    return a


def moment_rhs(g: Expr, n: int, r1: float, r2: float, tol: float = 1e-10, var: str = "x") -> np.ndarray:
    """Entries ∫ g(x)·x^(n-j) dx over [r1, r2], j = 1..n, by adaptive quadrature."""
    gf = lambdify(g, [var])
    b = np.empty(n)
    for j in range(1, n + 1):
        power = n - j
        b[j - 1] = adaptive_integral(lambda x: gf(x) * x**power, r1, r2, tol)[0]
    return b


def polyval(coeffs: Sequence[float], x):
    """Horner evaluation, descending powers. Works on scalars and arrays."""
    if len(coeffs) < 1:
        raise ValueError("need at least one coefficient")
    result = coeffs[0] * np.ones_like(x, dtype=float) if isinstance(x, np.ndarray) else float(coeffs[0])
    for c in coeffs[1:]:
        result = result * x + c
    return result


def l2_polyfit(
    g: Expr,
    n: int,
    r1: float,
    r2: float,
    tol: float = 1e-10,
    grid_intervals: int = 40,
    max_n: int = DEFAULT_MAX_N,
    var: str = "x",
) -> PolyApproxResult:
    """Best L2 polynomial of degree n-1 to ``g`` on [r1, r2].

    The monomial Gram matrix is Hilbert-like and its conditioning degrades
    quickly, hence the ``max_n`` guard; check it with
    ``linalg.condition_number(normal_matrix(n, r1, r2))`` before raising it.
    Error metrics use a uniform grid of ``grid_intervals + 1`` points and
    the trapezoidal rule for the two integrated errors.
    """
    if n > max_n:
        raise ValueError(f"n={n} exceeds max_n={max_n}; the normal matrix is too ill-conditioned")
    if grid_intervals < 40:
        raise ValueError("grid_intervals must be at least 40")
    a = normal_matrix(n, r1, r2)
    b = moment_rhs(g, n, r1, r2, tol, var)
    try:
        c = linalg.solve(a, b)
    except linalg.SingularMatrixError:
        raise linalg.SingularMatrixError("normal matrix is singular") from None

    h = (r2 - r1) / grid_intervals
    xs = np.array([r1 + i * h for i in range(grid_intervals)] + [r2])
    gf = lambdify(g, [var], vectorized=True)
    y1 = gf(xs)
    y2 = polyval(c, xs)
    err = np.abs(y2 - y1)
    int1 = h * (float(np.sum(err)) - 0.5 * (err[0] + err[-1]))
    int2 = h * (float(np.sum(err**2)) - 0.5 * (err[0] ** 2 + err[-1] ** 2))
    grid = [(float(x), float(u), float(v)) for x, u, v in zip(xs, y1, y2)]
    return PolyApproxResult(n, c, float(np.max(err)), float(int1), float(int2), grid)
