"""Composite Newton-Cotes rules, Riemann rectangles and adaptive Simpson.

Integrands may be given as an expression in one variable (``var``) or as a
plain Python callable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .expr import Expr, lambdify

Integrand = Union[Expr, Callable[[float], float]]

MAX_DEPTH = 50
MIN_DEPTH = 3


class IntegrationError(Exception):
    pass


def as_function(f: Integrand, var: str = "x") -> Callable[[float], float]:
    if isinstance(f, Expr):
        return lambdify(f, [var])
    return f


def _check_interval(a: float, b: float) -> None:
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError("number of subintervals must be positive")


def midpoint(f: Integrand, a: float, b: float, n: int, var: str = "x") -> float:
    _check_interval(a, b)
    _check_n(n)
    fn = as_function(f, var)
    h = (b - a) / n
    return sum(fn(a + (i + 0.5) * h) * h for i in range(n))


def trapezoid(f: Integrand, a: float, b: float, n: int, var: str = "x") -> float:
    _check_interval(a, b)
    _check_n(n)
    fn = as_function(f, var)
    h = (b - a) / n
    return h / 2 * (fn(a) + 2 * sum(fn(a + i * h) for i in range(1, n)) + fn(b))


def simpson(f: Integrand, a: float, b: float, n: int, var: str = "x") -> float:
    """Composite Simpson rule; ``n`` must be even."""
    _check_interval(a, b)
    _check_n(n)
    if n % 2:
        raise ValueError(f"Simpson's rule needs an even number of subintervals, got n={n}")
    fn = as_function(f, var)
    h = (b - a) / n
    return h / 3 * (
        fn(a)
        + sum(4 * fn(a + i * h) for i in range(1, n, 2))
        + sum(2 * fn(a + i * h) for i in range(2, n, 2))
        + fn(b)
    )


@dataclass(frozen=True)
class QuadTableRow:
    n: int
    h: float
    err_midpoint: float
    err_trapezoid: float
    err_simpson: float


def convergence_table(
    f: Integrand, a: float, b: float, exact: float, ns: Sequence[int], var: str = "x"
) -> list[QuadTableRow]:
    """Signed errors (approximation minus exact) of the three rules per n."""
    for n in ns:
        if n < 1 or n % 2:
            raise ValueError(f"Simpson's rule needs an even number of subintervals, got n={n}")
    fn = as_function(f, var)
    return [
        QuadTableRow(
            n,
            (b - a) / n,
            midpoint(fn, a, b, n) - exact,
            trapezoid(fn, a, b, n) - exact,
            simpson(fn, a, b, n) - exact,
        )
        for n in ns
    ]


@dataclass(frozen=True)
class Rectangle:
    x_left: float
    x_right: float
    height: float
    # nominal step (b - a)/n; x_right - x_left can differ from it in the last bit
    width: float

    @property
    def area(self) -> float:
        return self.height * self.width


def riemann_rectangles(
    f: Integrand, a: float, b: float, n: int, mode: str = "midpoint", var: str = "x"
) -> list[Rectangle]:
    _check_interval(a, b)
    _check_n(n)
    offsets = {"left": 0.0, "midpoint": 0.5, "right": 1.0}
    if mode not in offsets:
        raise ValueError(f"mode must be one of {sorted(offsets)}, got {mode!r}")
    fn = as_function(f, var)
    h = (b - a) / n
    off = offsets[mode]
    rects = []
    for i in range(n):
        x_right = b if i == n - 1 else a + (i + 1) * h
        rects.append(Rectangle(a + i * h, x_right, fn(a + (i + off) * h), h))
    return rects


def rectangles_sum(rects: Sequence[Rectangle]) -> float:
    return sum(r.area for r in rects)


def adaptive_integral(
    f: Integrand, a: float, b: float, tol: float = 1e-10, var: str = "x"
) -> tuple[float, float]:
    """Adaptive Simpson quadrature with Richardson acceptance.

    A panel is accepted when |S(left) + S(right) - S(whole)| <= 15·tol_local;
    the tolerance halves with each bisection. Returns ``(value, est_error)``
    where est_error sums the per-panel estimates |S2 - S1|/15. The first
    MIN_DEPTH levels are always bisected so that symmetric cancellations
    (e.g. sin over a full period) cannot fake convergence.
    """
    _check_interval(a, b)
    if not tol > 0:
        raise ValueError("tol must be positive")
    fn = as_function(f, var)

    def panel(lo, flo, hi, fhi):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        return mid, fmid, (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, flo, hi, fhi, mid, fmid, whole, tol_local, depth):
        lm, flm, left = panel(lo, flo, mid, fmid)
        rm, frm, right = panel(mid, fmid, hi, fhi)
        diff = left + right - whole
        if depth >= MIN_DEPTH and abs(diff) <= 15.0 * tol_local:
            return left + right + diff / 15.0, abs(diff) / 15.0
        if depth >= MAX_DEPTH:
            raise IntegrationError(
                f"recursion depth {MAX_DEPTH} exceeded near x = {mid!r}; integrand may be singular"
            )
        v1, e1 = recurse(lo, flo, mid, fmid, lm, flm, left, tol_local / 2.0, depth + 1)
        v2, e2 = recurse(mid, fmid, hi, fhi, rm, frm, right, tol_local / 2.0, depth + 1)
        return v1 + v2, e1 + e2

    fa, fb = fn(a), fn(b)
    mid, fmid, whole = panel(a, fa, b, fb)
    return recurse(a, fa, b, fb, mid, fmid, whole, tol, 0)
