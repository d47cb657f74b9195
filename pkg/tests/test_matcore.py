import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cofactor_det, crandn
from ncfun.errors import DimensionError, SingularMatrixError
from ncfun.matcore import (
    MatrixTuple,
    direct_power,
    direct_sum,
    expm,
    expm_frechet,
    lu_det,
    matrix_from_json,
    matrix_to_json,
    random_tuple,
    random_unitary,
    slogdet,
    solve,
    solve_inv,
)


def test_lu_det_small_cases():
    assert lu_det(np.eye(3)) == pytest.approx(1.0)
    assert lu_det([[2, 0], [0, 1]]) == pytest.approx(2.0)
    assert lu_det(np.zeros((0, 0))) == 1.0


def test_lu_det_matches_cofactor_expansion(rng):
    for n in range(1, 7):
        m = crandn(rng, n, n)
        ref = cofactor_det(m)
        assert abs(lu_det(m) - ref) <= 1e-12 * abs(ref) * 10


def test_lu_det_rejects_nonsquare():
    with pytest.raises(DimensionError):
        lu_det(np.ones((2, 3)))


def test_non_finite_entries_rejected():
    with pytest.raises(DimensionError):
        lu_det([[np.nan, 0], [0, 1]])


def test_slogdet_consistent_with_det(rng):
    m = crandn(rng, 5, 5)
    sign, logabs = slogdet(m)
    assert sign * np.exp(logabs) == pytest.approx(lu_det(m))


def test_solve_inv_identity_and_diagonal():
    np.testing.assert_allclose(solve_inv(np.eye(4)), np.eye(4))
    np.testing.assert_allclose(solve_inv(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))


def test_solve_inv_residual(rng):
    m = crandn(rng, 6, 6) + 3 * np.eye(6)
    inv, cond = solve_inv(m, return_cond=True)
    assert np.linalg.norm(m @ inv - np.eye(6)) <= 1e-10 * np.linalg.norm(m)
    assert cond >= 1.0


def test_solve_inv_singular_carries_pivot():
    with pytest.raises(SingularMatrixError) as info:
        solve_inv([[1.0, 2.0], [2.0, 4.0]])
    assert info.value.pivot <= info.value.threshold


def test_solve_matches_inverse(rng):
    m, b = crandn(rng, 4, 4), crandn(rng, 4, 2)
    np.testing.assert_allclose(solve(m, b), solve_inv(m) @ b, atol=1e-12)


def test_expm_frechet_trivial_cases():
    e, l = expm_frechet(np.zeros((2, 2)), np.eye(2))
    np.testing.assert_allclose(e, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(l, np.eye(2), atol=1e-14)
    e, l = expm_frechet(np.diag([1.0, 2.0]), np.zeros((2, 2)))
    np.testing.assert_allclose(e, np.diag(np.exp([1.0, 2.0])))
    assert not np.any(l)


def test_expm_frechet_vs_central_difference(rng):
    a, e = crandn(rng, 3, 3), crandn(rng, 3, 3)
    h = 1e-5
    fd = (expm(a + h * e) - expm(a - h * e)) / (2 * h)
    _, l = expm_frechet(a, e)
    assert np.abs(l - fd).max() <= 1e-6 * max(1.0, np.abs(fd).max())


def test_expm_frechet_dimension_mismatch():
    with pytest.raises(DimensionError):
        expm_frechet(np.eye(2), np.eye(3))


def test_expm_inverse_pair(rng):
    a = crandn(rng, 4, 4)
    a *= 5 / np.linalg.norm(a, 2)
    np.testing.assert_allclose(expm(a) @ expm(-a), np.eye(4), atol=1e-8)


def test_direct_sum_examples():
    x = random_tuple(2, 1, 0)
    assert direct_sum(x, MatrixTuple.empty(1)).allclose(x)
    z = direct_sum(MatrixTuple([[[2]]]), MatrixTuple([[[3]]]))
    np.testing.assert_array_equal(z[0], np.diag([2, 3]))
    big = direct_sum(random_tuple(2, 2, 1), random_tuple(3, 2, 2))
    assert big.n == 5
    assert not np.any(big.array[:, :2, 2:]) and not np.any(big.array[:, 2:, :2])


def test_direct_sum_variable_mismatch():
    with pytest.raises(DimensionError):
        direct_sum(random_tuple(2, 1, 0), random_tuple(2, 2, 0))


def test_direct_power_is_repeated_sum():
    x = random_tuple(2, 2, 3)
    assert direct_power(x, 3).allclose(direct_sum(direct_sum(x, x), x))


def test_random_tuple_reproducible():
    a, b = random_tuple(1, 1, 7), random_tuple(1, 1, 7)
    np.testing.assert_array_equal(a.array, b.array)
    x = random_tuple(3, 2, 1)
    assert x.array.shape == (2, 3, 3) and np.all(np.isfinite(x.array))


def test_random_tuple_monte_carlo_moments():
    x = random_tuple(100, 1, 11).array.ravel()
    assert abs(x.mean()) <= 0.05
    assert abs(np.mean(np.abs(x) ** 2) - 1.0) <= 0.05


def test_random_unitary_is_unitary():
    u = random_unitary(5, 2)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-12)


def test_matrix_tuple_validation():
    with pytest.raises(DimensionError):
        MatrixTuple([[[1, 2]]])
    x = random_tuple(2, 2, 0)
    with pytest.raises((ValueError, TypeError)):
        x.array[0, 0, 0] = 5


def test_json_round_trip():
    x = random_tuple(3, 2, 5)
    assert MatrixTuple.from_json(x.to_json()).allclose(x, rtol=0, atol=0)
    m = x[0]
    np.testing.assert_array_equal(matrix_from_json(matrix_to_json(m)), m)


square = st.integers(1, 5).flatmap(lambda n: st.integers(0, 2**31 - 1).map(lambda s: (n, s)))


@settings(max_examples=60, deadline=None)
@given(square, square)
def test_det_multiplicative_over_direct_sums(p, q):
    a = crandn(np.random.default_rng(p[1]), p[0], p[0])
    b = crandn(np.random.default_rng(q[1]), q[0], q[0])
    s = direct_sum(MatrixTuple([a]), MatrixTuple([b]))[0]
    assert abs(lu_det(s) - lu_det(a) * lu_det(b)) <= 1e-10 * abs(lu_det(s))
    assert np.trace(s) == pytest.approx(np.trace(a) + np.trace(b), rel=1e-14, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(square)
def test_det_unitary_invariance(p):
    n, seed = p
    rng = np.random.default_rng(seed)
    a = crandn(rng, n, n)
    u = random_unitary(n, rng)
    assert abs(lu_det(u.conj().T @ a @ u) - lu_det(a)) <= 1e-10 * max(abs(lu_det(a)), 1e-300) * 10


@settings(max_examples=60, deadline=None)
@given(square)
def test_det_exp_is_exp_trace(p):
    n, seed = p
    a = crandn(np.random.default_rng(seed), n, n)
    a /= max(1.0, np.linalg.norm(a, 2) / 3)
    assert abs(lu_det(expm(a)) / np.exp(np.trace(a)) - 1) <= 1e-8
