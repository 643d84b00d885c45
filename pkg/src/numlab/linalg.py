"""Dense real linear algebra on small matrices.

Matrices and vectors are float64 numpy arrays (2-D and 1-D). numpy is used
for storage and elementwise/inner-product arithmetic only; the
factorizations (LU with partial pivoting, one-sided Jacobi SVD) and
everything built on them are implemented here.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

EPS = 2.220446049250313e-16
SVD_SINE_TOL = 1e-14
SVD_MAX_SWEEPS = 30


class LinalgError(Exception):
    pass


class DimensionError(LinalgError, ValueError):
    pass


class SingularMatrixError(LinalgError):
    pass


def as_matrix(data) -> np.ndarray:
    """Validate and copy ``data`` into a finite 2-D float64 array."""
    a = np.array(data, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def as_vector(data) -> np.ndarray:
    v = np.array(data, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def _require_square(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a.shape[0]


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def mat_vec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    if a.shape[1] != x.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by vector of length {x.shape[0]}")
    return a @ x


def transpose(a: np.ndarray) -> np.ndarray:
    return a.T.copy()


def vec_norm2(x: np.ndarray) -> float:
    return math.sqrt(float(np.dot(x, x)))


def frobenius_norm(a: np.ndarray) -> float:
    return math.sqrt(float(np.sum(a * a)))


# ---------------------------------------------------------------------------
# LU


@dataclass(frozen=True)
class LuFactors:
    """P·A = L·U with P given as the row index array ``perm`` (PA = A[perm])."""

    perm: np.ndarray
    L: np.ndarray
    U: np.ndarray
    swaps: int

    @property
    def P(self) -> np.ndarray:
        n = len(self.perm)
        p = np.zeros((n, n))
        p[np.arange(n), self.perm] = 1.0
        return p


def lu_decompose(a: np.ndarray) -> LuFactors:
    """LU with row-max partial pivoting; ties go to the lowest row index.

    Raises SingularMatrixError when a pivot column is entirely zero.
    """
    n = _require_square(a)
    u = np.array(a, dtype=float)
    l = np.eye(n)
    perm = np.arange(n)
    swaps = 0
    for k in range(n):
        p = k + int(np.argmax(np.abs(u[k:, k])))
        if u[p, k] == 0.0:
            raise SingularMatrixError("matrix is singular")
        if p != k:
            u[[k, p], :] = u[[p, k], :]
            l[[k, p], :k] = l[[p, k], :k]
            perm[[k, p]] = perm[[p, k]]
            swaps += 1
        m = u[k + 1:, k] / u[k, k]
        l[k + 1:, k] = m
        u[k + 1:, k + 1:] -= np.outer(m, u[k, k + 1:])
        u[k + 1:, k] = 0.0
    return LuFactors(perm, l, u, swaps)


def lu_solve(f: LuFactors, b: np.ndarray) -> np.ndarray:
    n = len(f.perm)
    if b.shape[0] != n:
        raise DimensionError(f"right-hand side has length {b.shape[0]}, expected {n}")
    l, u = f.L, f.U
    y = np.empty(n)
    for i in range(n):
        y[i] = b[f.perm[i]] - np.dot(l[i, :i], y[:i])
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - np.dot(u[i, i + 1:], x[i + 1:])) / u[i, i]
    return x


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A·x = b by forward and back substitution on the LU factors."""
    n = _require_square(a)
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise DimensionError(f"right-hand side has shape {b.shape}, expected ({n},)")
    return lu_solve(lu_decompose(a), b)


def inverse(a: np.ndarray) -> np.ndarray:
    n = _require_square(a)
    try:
        f = lu_decompose(a)
    except SingularMatrixError:
        raise SingularMatrixError("matrix must be nonsingular") from None
    inv = np.empty((n, n))
    e = np.zeros(n)
    for i in range(n):
        e[:] = 0.0
        e[i] = 1.0
        inv[:, i] = lu_solve(f, e)
    return inv


def determinant(a: np.ndarray) -> float:
    _require_square(a)
    try:
        f = lu_decompose(a)
    except SingularMatrixError:
        return 0.0
    d = -1.0 if f.swaps % 2 else 1.0
    for x in np.diag(f.U):
        d *= x
    return float(d)


# ---------------------------------------------------------------------------
# SVD


@dataclass(frozen=True)
class SvdFactors:
    """A = U·diag(s)·Vᵀ, s descending and nonnegative."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.s) @ self.V.T


def svd(a: np.ndarray) -> SvdFactors:
    """One-sided (Hestenes) Jacobi SVD of a square matrix.

    Column pairs of A·V are rotated until mutually orthogonal. A sweep ends
    the iteration when every rotation it applied had a sine below 1e-14, or
    when no pair needed rotating; at most 30 sweeps are run. Singular values
    are the final column norms.
    """
    n = _require_square(a)
    # rows of w are the columns of A·V; rows of vt are the columns of V
    w = np.array(a, dtype=float).T.copy()
    vt = np.eye(n)
    orth_tol = n * EPS
    sweeps = 0
    for sweeps in range(1, SVD_MAX_SWEEPS + 1):
        max_sine = 0.0
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                wi, wj = w[i], w[j]
                alpha = float(np.dot(wi, wi))
                beta = float(np.dot(wj, wj))
                gamma = float(np.dot(wi, wj))
                if gamma == 0.0 or abs(gamma) <= orth_tol * math.sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                w[i], w[j] = c * wi - s * wj, s * wi + c * wj
                vi, vj = vt[i].copy(), vt[j]
                vt[i], vt[j] = c * vi - s * vj, s * vi + c * vj
                rotated = True
                max_sine = max(max_sine, abs(s))
        if not rotated or max_sine < SVD_SINE_TOL:
            break

    sv = np.sqrt(np.einsum("ij,ij->i", w, w))
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    w = w[order]
    v = vt[order].T.copy()

    u = np.zeros((n, n))
    nonzero = sv > np.finfo(float).tiny
    u[:, nonzero] = (w[nonzero] / sv[nonzero, None]).T
    sv[~nonzero] = 0.0
    if not np.all(nonzero):
        _complete_basis(u, nonzero)
    return SvdFactors(u, sv, v, sweeps)


def _complete_basis(u: np.ndarray, filled: np.ndarray) -> None:
    """Fill the unset columns of ``u`` with orthonormal vectors, in place."""
    n = u.shape[0]
    basis = [u[:, k] for k in range(n) if filled[k]]
    candidates = iter(np.eye(n))
    for k in range(n):
        if filled[k]:
            continue
        for e in candidates:
            v = e.copy()
            for _ in range(2):
                for q in basis:
                    v -= np.dot(q, v) * q
            norm = vec_norm2(v)
            if norm > 1e-8:
                v /= norm
                u[:, k] = v
                basis.append(v)
                break


def rank(a: np.ndarray) -> int:
    """Number of singular values above n·eps·s_max."""
    n = _require_square(a)
    s = svd(a).s
    tol = n * EPS * s[0]
    return int(np.sum(s > tol))


def condition_number(a: np.ndarray) -> float:
    """s_max / s_min; ``math.inf`` for a singular matrix."""
    s = svd(a).s
    if s[-1] == 0.0:
        return math.inf
    return float(s[0] / s[-1])


# ---------------------------------------------------------------------------
# Serialization


def matrix_to_csv(a: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in a:
        writer.writerow(repr(float(x)) for x in row)
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [
        [float(cell) for cell in row]
        for row in csv.reader(io.StringIO(text))
        if row and any(cell.strip() for cell in row)
    ]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DimensionError("CSV rows must all have the same number of columns")
    return as_matrix(rows)


def matrix_to_json(a: np.ndarray) -> dict:
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": [float(x) for x in a.ravel()]}


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    if rows < 1 or cols < 1 or len(data) != rows * cols:
        raise DimensionError(f"data length {len(data)} does not match {rows}x{cols}")
    return as_matrix(np.asarray(data, dtype=float).reshape(rows, cols))
