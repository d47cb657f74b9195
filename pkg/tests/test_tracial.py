import math
from fractions import Fraction

import numpy as np
import pytest

from ncfun.errors import (
    ClosednessError,
    DimensionError,
    DomainExitError,
    EndpointMismatchError,
)
from ncfun.matcore import MatrixTuple, random_tuple
from ncfun.tracial import (
    DomainSpec,
    GermSpec,
    PathSpec,
    circle_loop,
    concatenate,
    constant_path,
    continue_germ,
    diag_rotation_loop,
    integrality_test,
    loop_phi,
    unipotent_loop_2x2,
    path_direct_sum,
    quantization_check,
    random_gl_loop,
    trace_equiv_check,
)

TWO_PI_I = 2j * math.pi
LOGDET = GermSpec.logdet("x1")
GL = DomainSpec.gl()


def scalar_path(values, ts=None):
    values = np.asarray(values, dtype=complex)
    ts = np.linspace(0, 1, len(values)) if ts is None else ts
    return PathSpec(ts, values.reshape(-1, 1, 1, 1))


# paths

def test_path_validation():
    with pytest.raises(DimensionError):
        scalar_path([1, 2], ts=[0.0, 0.5])
    with pytest.raises(DimensionError):
        scalar_path([1, 2, 3], ts=[0.0, 0.6, 0.5])
    x = np.eye(2)[None, None] * np.ones((2, 1, 1, 1))
    with pytest.raises(DimensionError):
        PathSpec([0, 1], x, pad_start=3)
    y = np.array([[[[1, 0], [0, 2]]]] * 2, dtype=complex)
    with pytest.raises(DimensionError):
        PathSpec([0, 1], y, pad_start=2)


def test_essential_points():
    loop = diag_rotation_loop(3, [1, -1, 2])
    assert loop.pad_start == loop.pad_end == 3
    assert loop.start_point.n == 1 and loop.is_loop()
    np.testing.assert_allclose(loop.at(0.25)[0], np.diag(np.exp(2j * np.pi * 0.25 * np.array([1, -1, 2]))), atol=1e-3)


def test_interpolation_is_linear():
    p = scalar_path([0, 2, 4])
    assert p.at(0.25)[0][0, 0] == pytest.approx(1.0)
    assert p.at(1.0)[0][0, 0] == pytest.approx(4.0)


def test_json_round_trip():
    p = diag_rotation_loop(2, 1, samples=9)
    q = PathSpec.from_json(p.to_json())
    np.testing.assert_array_equal(q.xs, p.xs)
    assert (q.pad_start, q.pad_end, q.tag) == (p.pad_start, p.pad_end, p.tag)


def test_unipotent_loop_endpoints():
    p = unipotent_loop_2x2()
    np.testing.assert_array_equal(p.node(0)[0], [[1, 1], [0, 1]])
    np.testing.assert_array_equal(p.node(0).array, p.node(len(p) - 1).array)


def test_circle_sample_count():
    assert len(circle_loop(samples=256)) == 256


# concatenation and sums

def test_trivial_concatenation():
    x = random_tuple(2, 2, 0)
    c = concatenate(constant_path(x), constant_path(x))
    assert np.allclose(c.xs - c.xs[0], 0)


def test_concatenation_sizes():
    a = diag_rotation_loop(2, 1, samples=5)
    b = diag_rotation_loop(3, 1, samples=7)
    c = concatenate(a, b)
    assert c.n == 6 and c.pad_start == 6
    assert np.allclose(c.at(0.25)[0], np.kron(np.eye(3), a.at(0.5)[0]))
    assert np.allclose(c.at(0.75)[0], np.kron(np.eye(2), b.at(0.5)[0]))


def test_concatenation_endpoint_mismatch():
    with pytest.raises(EndpointMismatchError):
        concatenate(scalar_path([1, 2]), scalar_path([3, 1]))


def test_direct_sum_of_paths():
    s = path_direct_sum(circle_loop(1, samples=9), circle_loop(2, samples=5))
    assert s.n == 2 and s.pad_start == 2
    assert s.is_loop()


# continuation

def test_circle_winding():
    r = continue_germ(LOGDET, circle_loop(), GL)
    assert abs(r.increment - TWO_PI_I) <= 1e-8
    assert r.steps > 0 and r.max_step_error <= 1e-8


def test_unipotent_loop_has_zero_increment():
    assert abs(continue_germ(LOGDET, unipotent_loop_2x2(), GL).increment) <= 1e-8


def test_diag_rotation_normalized():
    r = continue_germ(LOGDET, diag_rotation_loop(2, 1), GL)
    assert abs(r.increment - TWO_PI_I) <= 1e-8
    assert abs(r.normalized_increment - 1j * math.pi) <= 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_random_loop_matches_eigenvalue_winding(seed):
    loop, w = random_gl_loop(int(seed % 3) + 2, seed)
    assert abs(loop_phi(LOGDET, loop, GL) * loop.n - TWO_PI_I * w) <= 1e-6


def test_open_path_tracks_branch():
    # z goes 1 -> -1 through the upper half plane, then on to -1 - 0.5i;
    # the continued log passes the principal cut at -1 without jumping
    z = np.concatenate([np.exp(1j * np.linspace(0, np.pi, 65)), [-1 - 0.5j]])
    r = continue_germ(LOGDET, scalar_path(z), GL)
    ref = np.log(abs(z[-1])) + 1j * (2 * np.pi + np.angle(z[-1]))
    assert abs(r.end_value - ref) <= 1e-8


def test_start_value_of_padded_path():
    p = path_direct_sum(constant_path(MatrixTuple([[[2.0]]])), constant_path(MatrixTuple([[[2.0]]])))
    r = continue_germ(LOGDET, p)
    assert r.start_value == pytest.approx(2 * math.log(2))
    assert r.germ_value == pytest.approx(math.log(2))


def test_refinement_invariance():
    loop, _ = random_gl_loop(3, 5)
    a = continue_germ(LOGDET, loop).increment
    b = continue_germ(LOGDET, loop.refine(2)).increment
    assert abs(a - b) <= 1e-8


def test_reparametrization_invariance():
    loop = diag_rotation_loop(2, [2, -1], samples=64, nilpotent=np.ones((2, 2)))
    a = continue_germ(LOGDET, loop).increment
    b = continue_germ(LOGDET, loop.reparametrize(lambda t: t**3)).increment
    assert abs(a - b) <= 1e-8


def test_domain_exit_reports_t():
    with pytest.raises(DomainExitError) as info:
        continue_germ(LOGDET, scalar_path([1, -1]))
    assert info.value.t == pytest.approx(0.5, abs=1e-6)


def test_forbidden_node_rejected():
    dom = DomainSpec((0j, 2 + 0j))
    with pytest.raises(DomainExitError) as info:
        continue_germ(LOGDET, scalar_path([1, 2, 3]), dom)
    assert info.value.t == pytest.approx(0.5)
    assert dom.contains(MatrixTuple([[[1.0]]]))
    assert not dom.contains(MatrixTuple([np.diag([1.0, 2.0])]))


def test_domain_json():
    dom = DomainSpec((0j, 1 + 1j))
    assert DomainSpec.from_json(dom.to_json()) == dom
    assert DomainSpec.from_json({}).forbidden is None


def test_closedness_refusal():
    p = PathSpec([0, 1], random_tuple(2, 2, 0).array[None].repeat(2, axis=0) * [[[[1]]], [[[1.1]]]])
    germ = GermSpec.closed_form(["x2", "0"])
    with pytest.raises(ClosednessError):
        continue_germ(germ, p)


def test_closed_form_exact_differential(rng):
    # g = div(1 + x1 x2) integrates to the change of log det(1 + x1 x2)
    germ = GermSpec.closed_form(["x2*inv(1 + x1*x2)", "inv(1 + x1*x2)*x1"])
    ts = np.linspace(0, 1, 17)
    a, b = random_tuple(2, 2, rng), random_tuple(2, 2, rng)
    xs = np.array([(1 - t) * a.array + t * b.array for t in ts]) * 0.3
    r = continue_germ(germ, PathSpec(ts, xs))
    ld = lambda x: np.log(np.linalg.det(np.eye(2) + x[0] @ x[1]))  # noqa: E731
    diff = r.increment - (ld(xs[-1]) - ld(xs[0]))
    assert abs(diff - round((diff / TWO_PI_I).real) * TWO_PI_I) <= 1e-8


# loops

def test_trivial_loop_phi_is_zero():
    assert loop_phi(LOGDET, constant_path(MatrixTuple([[[1.0]]]))) == 0


def test_loop_phi_rejects_open_path():
    with pytest.raises(EndpointMismatchError):
        loop_phi(LOGDET, scalar_path([1, 2]))


def test_padding_invariance():
    loop, _ = random_gl_loop(2, 9)
    assert abs(loop_phi(LOGDET, loop.inflate(3)) - loop_phi(LOGDET, loop)) <= 1e-6


def test_homomorphism_and_commutativity():
    l1, _ = random_gl_loop(2, 1)
    l2, _ = random_gl_loop(3, 2)
    a, b = loop_phi(LOGDET, l1), loop_phi(LOGDET, l2)
    assert abs(loop_phi(LOGDET, concatenate(l1, l2)) - (a + b)) <= 1e-6
    assert abs(loop_phi(LOGDET, concatenate(l2, l1)) - (a + b)) <= 1e-6


def test_reversed_loop_negates():
    loop = circle_loop(2)
    assert abs(loop_phi(LOGDET, loop.reversed()) + loop_phi(LOGDET, loop)) <= 1e-8


# checks

def test_quantization_examples():
    rep = quantization_check([(TWO_PI_I, 1)])
    assert rep.passed and rep.entries[0].ratio == 1
    rep = quantization_check([(1j * math.pi, 2)])
    assert rep.passed and rep.entries[0].ratio == Fraction(1, 2)
    rep = quantization_check([(1.0, 1)])
    assert not rep.passed and len(rep.failures) == 1


def test_integrality_examples():
    loop = circle_loop()
    v = integrality_test(GermSpec.closed_form(["inv(x1)"]), [loop], GL)
    assert v.verdict == "divisor-candidate" and abs(v.ratios[0] - 1) <= 1e-6
    v = integrality_test(GermSpec.closed_form([f"{1/3!r}*inv(x1)"]), [loop], GL)
    assert v.verdict == "obstructed" and v.witnesses == (0,) and abs(v.ratios[0] - 1 / 3) <= 1e-6
    assert integrality_test(GermSpec.closed_form(["inv(x1)"]), []).verdict == "divisor-candidate"


def test_trace_equivalence_examples():
    loop = circle_loop(samples=64)
    assert trace_equiv_check(loop, loop.refine(2), [LOGDET]).indistinguishable
    p = unipotent_loop_2x2()
    assert trace_equiv_check(p, constant_path(p.start_point), [LOGDET], GL).indistinguishable
    x = constant_path(loop.start_point)
    v = trace_equiv_check(path_direct_sum(loop, x), path_direct_sum(x, loop), [LOGDET], GL)
    assert v.indistinguishable


def test_trace_equivalence_separates():
    v = trace_equiv_check(circle_loop(1), circle_loop(2), [GermSpec.logdet("x1 + 3"), LOGDET])
    assert v.verdict == "distinguished" and v.separating == 1


def test_trace_equivalence_endpoint_mismatch():
    with pytest.raises(EndpointMismatchError):
        trace_equiv_check(scalar_path([1, 2]), scalar_path([1, 3]), [LOGDET])
