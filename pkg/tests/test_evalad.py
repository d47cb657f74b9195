import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncfun.errors import DimensionError, SingularMatrixError, ZeroSetError
from ncfun.evalad import (
    closedness_defect,
    dir_deriv,
    divisor,
    evaluate,
    jacobi_pairing,
    tracial_eval,
)
from ncfun.matcore import MatrixTuple, direct_sum, random_tuple, random_unitary, solve_inv
from ncfun.ncexpr import parse, random_expr


def pt(*mats):
    return MatrixTuple(np.array(mats, dtype=complex))


def test_commutator_of_identities_is_zero():
    v = evaluate(parse("x1*x2 - x2*x1"), pt(np.eye(2), np.eye(2))).value
    assert not np.any(v)


def test_one_plus_product_on_matrix_units():
    x = pt([[0, 1], [0, 0]], [[0, 0], [1, 0]])
    np.testing.assert_array_equal(evaluate(parse("1 + x1*x2"), x).value, [[2, 0], [0, 1]])


def test_inverse_of_diagonal():
    res = evaluate(parse("inv(x1)"), pt(np.diag([2.0, 4.0])))
    np.testing.assert_allclose(res.value, np.diag([0.5, 0.25]))
    assert res.condition >= 1.0


def test_matricial_value_is_block_flattened():
    x = random_tuple(3, 2, 0)
    res = evaluate(parse("[[x1, 1],[0, x2]]"), x)
    assert res.value.shape == (6, 6) and res.block_dims == (2, 2)
    np.testing.assert_array_equal(res.value[:3, 3:], np.eye(3))


def test_singular_inverse_names_subexpression():
    with pytest.raises(SingularMatrixError) as info:
        evaluate(parse("x2 + inv(x1 - x1)"), random_tuple(2, 2, 0))
    assert info.value.where == "inv(x1 - x1)"


def test_too_few_variables():
    with pytest.raises(DimensionError):
        evaluate(parse("x1*x3"), random_tuple(2, 2, 0))


def test_dir_deriv_rules():
    x, h = random_tuple(3, 1, 1), random_tuple(3, 1, 2)
    np.testing.assert_array_equal(dir_deriv(parse("x1"), x, h), h[0])
    ai = solve_inv(x[0])
    np.testing.assert_allclose(dir_deriv(parse("inv(x1)"), x, h), -ai @ h[0] @ ai, atol=1e-12)


@pytest.mark.parametrize("seed", range(12))
def test_dir_deriv_vs_central_difference(seed):
    rng = np.random.default_rng(seed)
    e = random_expr(rng, 3, 4, exp=True)
    x, h = random_tuple(3, 3, rng), random_tuple(3, 3, rng)
    step = 1e-5
    try:
        fd = (evaluate(e, x + step * h).value - evaluate(e, x - step * h).value) / (2 * step)
        d = dir_deriv(e, x, h)
    except SingularMatrixError:
        pytest.skip("random point on the zero set")
    assert np.abs(d - fd).max() <= 1e-6 * max(1.0, np.abs(fd).max())


def test_dir_deriv_linear_in_direction(rng):
    e = parse("x1*inv(2 + x2)*x1 + exp(x2)")
    x, h, k = (random_tuple(3, 2, rng) for _ in range(3))
    c = 0.7 - 1.3j
    lhs = dir_deriv(e, x, h + c * k)
    rhs = dir_deriv(e, x, h) + c * dir_deriv(e, x, k)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_divisor_of_one_plus_product(rng):
    x = random_tuple(3, 2, rng)
    a, b = x
    w = solve_inv(np.eye(3) + a @ b)
    g = divisor(parse("1 + x1*x2"), x)
    np.testing.assert_allclose(g[0], b @ w, atol=1e-12)
    np.testing.assert_allclose(g[1], w @ a, atol=1e-12)


def test_divisor_of_variable_and_exp(rng):
    x = random_tuple(3, 1, rng)
    np.testing.assert_allclose(divisor(parse("x1"), x)[0], solve_inv(x[0]), atol=1e-12)
    np.testing.assert_allclose(divisor(parse("exp(x1)"), x)[0], np.eye(3), atol=1e-12)


def test_divisor_on_zero_set():
    with pytest.raises(ZeroSetError):
        divisor(parse("x1*x2"), pt(np.diag([1.0, 0.0]), np.eye(2)))


@pytest.mark.parametrize("seed", range(10))
def test_reverse_equals_forward(seed):
    rng = np.random.default_rng(100 + seed)
    e = random_expr(rng, 2, 4, exp=True)
    x = random_tuple(int(rng.integers(1, 4)), 2, rng)
    try:
        g1 = divisor(e, x, method="reverse")
    except SingularMatrixError:
        pytest.skip("random point on the zero set")
    g2 = divisor(e, x, method="forward")
    assert g1.max_abs_diff(g2) <= 1e-9 * (1 + max(np.abs(c).max() for c in g2))


def test_block_divisor_matches_inverse_blocks(rng):
    # div of [[A, B], [C, D]] pairs H with the blocks of its inverse
    x = random_tuple(2, 4, rng)
    f = parse("[[x1, x2],[x3, x4]]")
    inv = solve_inv(evaluate(f, x).value)
    p, q, r, t = inv[:2, :2], inv[:2, 2:], inv[2:, :2], inv[2:, 2:]
    g = divisor(f, x)
    for got, want in zip(g, (p, r, q, t)):
        np.testing.assert_allclose(got, want, atol=1e-11)
    # det [[A,B],[C,D]] = det A det S, so the divisors add
    split = divisor(parse("x1"), x) + divisor(parse("x4 - x3*inv(x1)*x2"), x)
    assert split.max_abs_diff(g) <= 1e-10


def test_divisor_pairing_property(rng):
    e = parse("inv(1 - x1*x2) + x2")
    x = random_tuple(3, 2, rng)
    g = divisor(e, x)
    for _ in range(20):
        h = random_tuple(3, 2, rng)
        assert abs(g.pairing(h) - jacobi_pairing(e, x, h)) <= 1e-10 * (1 + h.norm() * g.as_tuple().norm())


def test_tracial_eval_examples(rng):
    x = random_tuple(4, 2, rng)
    assert abs(tracial_eval(parse("x1*x2 - x2*x1"), x)) <= 1e-12
    l1 = tracial_eval(parse("1 + x1*x2"), x, kind="logdet")
    l2 = tracial_eval(parse("1 + x2*x1"), x, kind="logdet")
    r = (l1 - l2) / (2j * np.pi)
    assert abs(r - round(r.real)) <= 1e-10


def test_tracial_eval_singular():
    with pytest.raises(ZeroSetError):
        tracial_eval(parse("x1"), pt(np.zeros((2, 2))), kind="logdet")


def test_closedness_of_divisor(rng):
    e = parse("1 + x1*x2*x1")
    x, h, k = (random_tuple(3, 2, rng) for _ in range(3))
    defect, scale = closedness_defect(lambda y: divisor(e, y).components, x, h, k)
    assert defect <= 1e-5 * scale


def test_non_closed_map_detected(rng):
    x, h, k = (random_tuple(3, 2, rng) for _ in range(3))
    defect, scale = closedness_defect(lambda y: (y[1], np.zeros((3, 3))), x, h, k)
    assert defect > 1e-3 * scale


point_seeds = st.integers(0, 2**31 - 1)


@settings(max_examples=40, deadline=None)
@given(point_seeds, st.integers(1, 3), st.integers(1, 3))
def test_respects_direct_sums(seed, n1, n2):
    rng = np.random.default_rng(seed)
    e = random_expr(rng, 2, 4, inv=False, exp=True)
    x, y = random_tuple(n1, 2, rng), random_tuple(n2, 2, rng)
    lhs = evaluate(e, direct_sum(x, y)).value
    vx, vy = evaluate(e, x).value, evaluate(e, y).value
    rhs = np.block([[vx, np.zeros((n1, n2))], [np.zeros((n2, n1)), vy]])
    assert np.abs(lhs - rhs).max() <= 1e-9 * (1 + np.abs(rhs).max())


@settings(max_examples=40, deadline=None)
@given(point_seeds, st.integers(1, 4))
def test_respects_unitary_conjugation(seed, n):
    rng = np.random.default_rng(seed)
    e = random_expr(rng, 2, 4, inv=True)
    x = random_tuple(n, 2, rng)
    u = random_unitary(n, rng)
    try:
        v = evaluate(e, x).value
        w = evaluate(e, x.conj_by(u)).value
    except SingularMatrixError:
        return
    ref = u.conj().T @ v @ u
    assert np.abs(w - ref).max() <= 1e-9 * (1 + np.abs(ref).max()) * max(1.0, evaluate(e, x).condition)
