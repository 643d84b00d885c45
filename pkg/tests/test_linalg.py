import json
import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from numlab import linalg
from numlab.linalg import (
    DimensionError,
    SingularMatrixError,
    condition_number,
    determinant,
    frobenius_norm,
    inverse,
    lu_decompose,
    mat_mul,
    mat_vec,
    rank,
    solve,
    svd,
    transpose,
    vec_norm2,
)

A = np.array([[1.0, 3, -3], [-3, 7, -3], [-6, 6, -2]])
B = np.array([1.0, 3, 6])
I3 = np.eye(3)


def _exact_lu(rows, perm):
    """Doolittle elimination on Fractions for an already-permuted matrix."""
    m = [[Fraction(v) for v in rows[p]] for p in perm]
    n = len(m)
    lower = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(k + 1, n):
            lower[i][k] = m[i][k] / m[k][k]
            m[i] = [a - lower[i][k] * b for a, b in zip(m[i], m[k])]
    return lower, m


seeds = st.integers(0, 2**32 - 1)


def _random(seed, n):
    return np.random.default_rng(seed).uniform(-1, 1, (n, n))


# --- basics ----------------------------------------------------------------


def test_products_and_norms():
    assert np.array_equal(mat_mul(I3, A), A)
    assert np.allclose(mat_vec(A, np.array([-1.25, -0.75, -1.5])), B, atol=1e-15)
    assert vec_norm2(np.array([3.0, 4.0])) == 5.0
    assert np.array_equal(transpose(A), A.T)
    with pytest.raises(DimensionError):
        mat_mul(A, np.ones((2, 2)))
    with pytest.raises(DimensionError):
        mat_vec(A, np.ones(2))


def test_frobenius_norm():
    assert frobenius_norm(A) == pytest.approx(12.7279220614, abs=1e-9)
    assert frobenius_norm(np.zeros((3, 3))) == 0.0
    assert frobenius_norm(I3) == pytest.approx(math.sqrt(3), rel=1e-15)


def test_as_matrix_rejects_non_finite():
    with pytest.raises(ValueError):
        linalg.as_matrix([[1.0, math.nan]])
    with pytest.raises(DimensionError):
        linalg.as_matrix([1.0, 2.0])


# --- LU --------------------------------------------------------------------


def test_lu_of_reference_matrix():
    f = lu_decompose(A)
    assert list(f.perm) == [2, 1, 0]
    lower, upper = _exact_lu(A.tolist(), [2, 1, 0])
    assert lower[2][0] == Fraction(-1, 6) and upper[2][2] == Fraction(-4, 3)
    assert np.allclose(f.L, np.array(lower, dtype=float), atol=1e-12, rtol=0)
    assert np.allclose(f.U, np.array(upper, dtype=float), atol=1e-12, rtol=0)
    assert np.allclose(f.P @ A, f.L @ f.U, atol=1e-12, rtol=0)


def test_lu_of_identity():
    f = lu_decompose(I3)
    assert list(f.perm) == [0, 1, 2]
    assert np.array_equal(f.L, I3) and np.array_equal(f.U, I3)


def test_lu_ties_pick_lowest_row():
    f = lu_decompose(np.array([[1.0, 2], [-1, 3]]))
    assert list(f.perm) == [0, 1]


def test_lu_zero_pivot_column_is_singular():
    with pytest.raises(SingularMatrixError):
        lu_decompose(np.array([[0.0, 1, 2], [0, 3, 4], [0, 5, 6]]))


def test_lu_matches_scipy_on_random_6x6():
    a = _random(6, 6)
    f = lu_decompose(a)
    p, l, u = scipy.linalg.lu(a)  # a = p @ l @ u
    assert np.allclose(f.P, p.T) and np.allclose(f.L, l, atol=1e-13) and np.allclose(f.U, u, atol=1e-13)


@settings(max_examples=200, deadline=None)
@given(seeds, st.integers(2, 12))
def test_lu_reconstruction_property(seed, n):
    a = _random(seed, n)
    f = lu_decompose(a)
    assert sorted(f.perm) == list(range(n))
    assert np.all(np.diag(f.L) == 1.0)
    assert np.all(np.abs(np.tril(f.L, -1)) <= 1 + 1e-14)
    assert np.all(np.tril(f.U, -1) == 0.0)
    assert np.max(np.abs(f.P @ a - f.L @ f.U)) <= 1e-12 * frobenius_norm(a)


# --- solve / inverse / determinant -----------------------------------------


def test_solve_examples():
    assert np.allclose(solve(A, B), [-1.25, -0.75, -1.5], atol=1e-12, rtol=0)
    assert np.array_equal(solve(I3, B), B)
    assert np.array_equal(solve(A, np.zeros(3)), np.zeros(3))
    with pytest.raises(SingularMatrixError):
        solve(np.ones((3, 3)), B)
    with pytest.raises(DimensionError):
        solve(A, np.ones(2))


def test_inverse_examples():
    expected = [[-0.125, 0.375, -0.375], [-0.375, 0.625, -0.375], [-0.75, 0.75, -0.5]]
    assert np.allclose(inverse(A), expected, atol=1e-12, rtol=0)
    assert np.array_equal(inverse(I3), I3)
    assert np.allclose(inverse(inverse(A)), A, atol=1e-10, rtol=0)
    with pytest.raises(SingularMatrixError, match="matrix must be nonsingular"):
        inverse(np.zeros((2, 2)))


def test_determinant_examples():
    assert determinant(A) == pytest.approx(-32.0, abs=1e-10)
    assert determinant(I3) == 1.0
    assert determinant(A[[1, 0, 2]]) == pytest.approx(32.0, abs=1e-10)
    assert determinant(np.ones((3, 3))) == 0.0


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(2, 10))
def test_solve_residual_property(seed, n):
    a = _random(seed, n)
    if np.linalg.cond(a) > 1e6:
        return
    b = np.random.default_rng(seed + 1).uniform(-1, 1, n)
    x = solve(a, b)
    assert vec_norm2(a @ x - b) <= 1e-10 * frobenius_norm(a) * vec_norm2(x)
    assert np.allclose(x, np.linalg.solve(a, b), rtol=1e-6, atol=1e-9)


# --- SVD -------------------------------------------------------------------


def test_svd_of_diagonal():
    f = svd(np.diag([3.0, 1.0]))
    assert np.allclose(f.s, [3.0, 1.0])
    assert np.allclose(np.abs(f.U), I3[:2, :2]) and np.allclose(np.abs(f.V), I3[:2, :2])
    f = svd(np.diag([1.0, 3.0]))
    assert np.allclose(f.s, [3.0, 1.0])
    assert np.allclose(f.reconstruct(), np.diag([1.0, 3.0]))


def test_svd_of_reference_matrix():
    f = svd(A)
    assert np.prod(f.s) == pytest.approx(32.0, abs=1e-8)
    assert np.allclose(f.s, np.linalg.svd(A, compute_uv=False), rtol=1e-13)


def test_svd_of_zero_matrix():
    f = svd(np.zeros((3, 3)))
    assert np.array_equal(f.s, np.zeros(3))
    assert np.array_equal(f.U, I3) and np.array_equal(f.V, I3)


def test_svd_random_10x10_reconstructs():
    a = _random(10, 10)
    f = svd(a)
    assert frobenius_norm(a - f.reconstruct()) / frobenius_norm(a) <= 1e-10
    assert f.sweeps <= linalg.SVD_MAX_SWEEPS


def test_svd_rank_deficient_completes_u():
    u, v = np.array([1.0, 2, 3]), np.array([0.5, -1, 2])
    f = svd(np.outer(u, v))
    assert np.allclose(f.U.T @ f.U, I3, atol=1e-12)
    assert np.allclose(f.reconstruct(), np.outer(u, v), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(2, 12))
def test_svd_properties(seed, n):
    a = _random(seed, n)
    f = svd(a)
    scale = frobenius_norm(a)
    eye = np.eye(n)
    assert frobenius_norm(f.U.T @ f.U - eye) <= 1e-10 * n
    assert frobenius_norm(f.V.T @ f.V - eye) <= 1e-10 * n
    assert frobenius_norm(a - f.reconstruct()) <= 1e-10 * scale
    assert np.all(np.diff(f.s) <= 0) and np.all(f.s >= 0)
    assert np.sum(f.s**2) == pytest.approx(scale**2, rel=1e-10)
    assert np.allclose(f.s, np.linalg.svd(a, compute_uv=False), rtol=1e-9, atol=1e-14 * scale)
    if f.s[-1] / f.s[0] > 1e-8:
        assert abs(determinant(a)) == pytest.approx(np.prod(f.s), rel=1e-8)


# --- rank / condition ------------------------------------------------------


def test_rank_examples():
    assert rank(A) == 3
    assert rank(np.zeros((3, 3))) == 0
    assert rank(np.outer([1.0, 2, 3], [4.0, -1, 0.5])) == 1


def test_condition_number_examples():
    assert condition_number(np.eye(5)) == 1.0
    assert condition_number(np.diag([10.0, 1.0])) == pytest.approx(10.0, rel=1e-15)
    assert condition_number(np.zeros((2, 2))) == math.inf
    assert condition_number(A) == pytest.approx(np.linalg.cond(A), rel=1e-12)


# --- serialization ---------------------------------------------------------


def test_csv_round_trip():
    a = _random(3, 4)
    assert np.array_equal(linalg.matrix_from_csv(linalg.matrix_to_csv(a)), a)
    with pytest.raises(DimensionError):
        linalg.matrix_from_csv("1,2\n3\n")


def test_json_round_trip():
    obj = linalg.matrix_to_json(A)
    assert obj == {"rows": 3, "cols": 3, "data": A.ravel().tolist()}
    assert np.array_equal(linalg.matrix_from_json(json.loads(json.dumps(obj))), A)
    with pytest.raises(DimensionError):
        linalg.matrix_from_json({"rows": 2, "cols": 2, "data": [1, 2, 3]})
