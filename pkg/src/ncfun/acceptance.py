"""The fourteen acceptance criteria, shared by ``nc suite`` and the test suite.

Each criterion is a function of a seed returning a :class:`Criterion`.
Tolerances are the stated ones and are not loosened anywhere.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError
from .evalad import divisor, evaluate, jacobi_pairing, tracial_eval
from .matcore import (
    MatrixTuple,
    expm,
    lu_det,
    random_tuple,
    solve_inv,
)
from .ncexpr import Prod, nvars, parse, random_expr
from .realize import block_inverse, det_ratio, divisor_split, linearize, realization_eval
from .tracial import (
    DomainSpec,
    GermSpec,
    circle_loop,
    concatenate,
    constant_path,
    continue_germ,
    diag_rotation_loop,
    increment_matrix,
    integrality_test,
    loop_phi,
    unipotent_loop_2x2,
    path_direct_sum,
    quantization_check,
    random_gl_loop,
    trace_equiv_check,
)

__all__ = ["Criterion", "RATIONAL_CORPUS", "CRITERIA", "run_all", "sample_points"]

RATIONAL_CORPUS = (
    "inv(x1)",
    "x1 + inv(x2)",
    "inv(1 - x1*x2)",
    "inv(x1*x2 - x2*x1 + 3)",
    "x1*inv(2 + x2)*x1",
    "inv(1 + inv(3 + x1))",
    "(1 + x1*x2)*inv(2 - x2*x3)",
    "inv(inv(x1) + inv(x2))",
    "1 + x1*x2 + x3*x3",
    "inv(x1)*x2*inv(x3) + 1",
)

# sample points whose inverses are worse conditioned than this are redrawn
MAX_POINT_COND = 1e6


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d}. {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max(initial=0.0)) / (1.0 + float(np.abs(b).max(initial=0.0)))


def _dist_2pii(z):
    r = z / (2j * math.pi)
    return abs(r - round(r.real))


def sample_points(e, count, rng, sizes=(1, 2, 3, 4), realization=None):
    """Random points of definition for ``e`` with bounded inverse conditioning."""
    d = max(nvars(e), 1)
    points = []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 50 * count:
            raise RuntimeError(f"could not find {count} well-conditioned points")
        n = sizes[len(points) % len(sizes)]
        x = random_tuple(n, d, rng)
        try:
            res = evaluate(e, x)
            _, cond = solve_inv(res.value, return_cond=True)
            if realization is not None:
                _, pcond = solve_inv(realization.pencil(x), return_cond=True)
                cond = max(cond, pcond)
        except SingularMatrixError:
            continue
        if max(cond, res.condition) > MAX_POINT_COND:
            continue
        points.append(x)
    return points


def _rand_dir(rng, d, n):
    return MatrixTuple((rng.standard_normal((d, n, n)) + 1j * rng.standard_normal((d, n, n))) / math.sqrt(2))


# --------------------------------------------------------------------------

def weinstein_aronszajn(seed=0):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = 0.0
    for j in range(100):
        n = 1 + j % 8
        x, y = random_tuple(n, 2, rng)
        eye = np.eye(n)
        d1, d2 = lu_det(eye + x @ y), lu_det(eye + y @ x)
        worst = max(worst, abs(d1 - d2) / max(abs(d1), abs(d2), 1e-300))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 5.0
    return 1, "det(1+XY) = det(1+YX)", ok, f"max rel err {worst:.2e}, runtime {dt:.2f}s"


def divisor_closed_form(seed=0):
    rng = np.random.default_rng(seed)
    f, fs = parse("1+x1*x2"), parse("1+x2*x1")
    worst = 0.0
    for j in range(100):
        n = 1 + j % 6
        x = random_tuple(n, 2, rng)
        a, b = x
        w = solve_inv(np.eye(n) + a @ b)
        expected = (b @ w, w @ a)
        g, gs = divisor(f, x), divisor(fs, x)
        for i in range(2):
            worst = max(worst, _rel(g[i], expected[i]), _rel(gs[i], g[i]))
    return 2, "div(1+x1*x2) closed form", worst <= 1e-8, f"max err {worst:.2e}"


def oracle_equivalence(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < 50:
        d = int(rng.integers(1, 4))
        e = random_expr(rng, d, 4, inv=True, exp=bool(rng.random() < 0.3))
        n = int(rng.integers(1, 5))
        try:
            x = sample_points(e, 1, rng, sizes=(n,))[0]
        except RuntimeError:
            continue
        g1 = divisor(e, x, method="reverse")
        g2 = divisor(e, x, method="forward")
        for a, b in zip(g1, g2):
            worst = max(worst, _rel(a, b))
        done += 1
    return 3, "reverse divisor = forward divisor", worst <= 1e-9, f"50 expressions, max err {worst:.2e}"


def _pairing_scale(h, g):
    return 1.0 + sum(np.linalg.norm(hi) * np.linalg.norm(gi) for hi, gi in zip(h, g))


def jacobi_pairing_check(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for text in RATIONAL_CORPUS + ("exp(x1)*(2 + x2)", "1 + x1*x2"):
        e = parse(text)
        for x in sample_points(e, 3, rng):
            g = divisor(e, x)
            for _ in range(20):
                h = _rand_dir(rng, x.d, x.n)
                defect = abs(g.pairing(h) - jacobi_pairing(e, x, h))
                worst = max(worst, defect / _pairing_scale(h, g))
    return 4, "tr(sum H_i g_i) = tr(Df[H] f^-1)", worst <= 1e-8, f"max scaled defect {worst:.2e}"


def divisor_additivity(seed=0):
    rng = np.random.default_rng(seed)
    pairs = [
        ("1 + x1*x2", "inv(2 - x2)"),
        ("x1", "x2"),
        ("exp(x1)", "1 + x2*x1"),
        ("inv(1 - x1*x2)", "x1*inv(2 + x2)*x1"),
        ("x1*x2 - x2*x1 + 3", "x1 + inv(x2)"),
    ]
    worst = 0.0
    for s1, s2 in pairs:
        f, g = parse(s1), parse(s2)
        fg = Prod((f, g))
        for x in sample_points(fg, 4, rng):
            df, dg, dfg = divisor(f, x), divisor(g, x), divisor(fg, x)
            for _ in range(20):
                h = _rand_dir(rng, x.d, x.n)
                defect = abs(dfg.pairing(h) - df.pairing(h) - dg.pairing(h))
                worst = max(worst, defect / (_pairing_scale(h, df) + _pairing_scale(h, dg)))
    return 5, "div fg = div f + div g", worst <= 1e-8, f"max scaled defect {worst:.2e}"


def _unit_ball(rng, n):
    m = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    return m * (rng.random() / np.linalg.norm(m, 2))


def exponential_identities(seed=0):
    rng = np.random.default_rng(seed)
    e = parse("exp(x1)*exp(x2)")
    worst_det, worst_log = 0.0, 0.0
    for j in range(50):
        n = 1 + j % 5
        a, b = _unit_ball(rng, n), _unit_ball(rng, n)
        lhs, rhs = lu_det(expm(a)), np.exp(np.trace(a))
        worst_det = max(worst_det, abs(lhs - rhs) / abs(rhs))
        ld = tracial_eval(e, MatrixTuple([a, b]), kind="logdet")
        worst_log = max(worst_log, _dist_2pii(ld - np.trace(a) - np.trace(b)))
    ok = worst_det <= 1e-8 and worst_log <= 1e-8
    return 6, "det e^A = e^tr A, logdet e^X e^Y", ok, f"det err {worst_det:.2e}, log err {worst_log:.2e}"


def _corpus_points(rng):
    for text in RATIONAL_CORPUS:
        e = parse(text)
        r = linearize(e)
        yield e, r, sample_points(e, 50, rng, realization=r)


def linearization(seed=0):
    rng = np.random.default_rng(seed)
    worst_val, worst_det = 0.0, 0.0
    for e, r, pts in _corpus_points(rng):
        for x in pts:
            v = evaluate(e, x).value
            worst_val = max(worst_val, _rel(realization_eval(r, x), v))
            dv = lu_det(v)
            worst_det = max(worst_det, abs(det_ratio(r, x).ratio - dv) / (1.0 + abs(dv)))
    ok = worst_val <= 1e-9 and worst_det <= 1e-8
    return 7, "b* L^-1 c = r and det ratio = det r", ok, f"value err {worst_val:.2e}, det err {worst_det:.2e}"


def divisor_split_check(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for e, r, pts in _corpus_points(rng):
        for x in pts:
            p, q = divisor_split(r, x)
            for a, b in zip(p - q, divisor(e, x)):
                worst = max(worst, _rel(a, b))
    return 8, "div p - div q = div r", worst <= 1e-8, f"max err {worst:.2e}"


def schur_block_inverse(seed=0):
    rng = np.random.default_rng(seed)
    worst_det, worst_inv = 0.0, 0.0

    def rnd(p, q):
        return (rng.standard_normal((p, q)) + 1j * rng.standard_normal((p, q))) / math.sqrt(2)

    done = 0
    while done < 50:
        p, q = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        a, b, c, d = rnd(p, p), rnd(p, q), rnd(q, p), rnd(q, q)
        full = np.block([[a, b], [c, d]])
        try:
            ref, cond = solve_inv(full, return_cond=True)
            _, acond = solve_inv(a, return_cond=True)
        except SingularMatrixError:
            continue
        if max(cond, acond) > MAX_POINT_COND:
            continue
        s = d - c @ solve_inv(a) @ b
        lhs, rhs = lu_det(full), lu_det(a) * lu_det(s)
        worst_det = max(worst_det, abs(lhs - rhs) / max(abs(lhs), 1e-300))
        worst_inv = max(worst_inv, float(np.abs(block_inverse(a, b, c, d) - ref).max() / np.abs(ref).max()))
        done += 1
    ok = worst_det <= 1e-9 and worst_inv <= 1e-9
    return 9, "Schur determinant and block inverse", ok, f"det err {worst_det:.2e}, inverse err {worst_inv:.2e}"


def monodromy_quantization(seed=0):
    rng = np.random.default_rng(seed)
    germ = GermSpec.logdet("x1")
    dom = DomainSpec.gl()
    values = []
    for w in range(-3, 4):
        values.append((loop_phi(germ, circle_loop(w), dom), 1))
    for n in range(2, 5):
        for _ in range(2):
            loop, _w = random_gl_loop(n, rng, max_winding=3)
            values.append((loop_phi(germ, loop, dom), n))
    half = loop_phi(germ, diag_rotation_loop(2, 1), dom)
    values.append((half, 2))
    report = quantization_check(values, tol=1e-6)
    half_ratio = half / (2j * math.pi)
    ok = report.passed and report.entries[-1].ratio == 0.5 and abs(half_ratio - 0.5) <= 1e-6
    worst = max(e.residual for e in report.entries)
    return 10, "n c in 2 pi i Z", ok, f"{len(values)} loops, max residual {worst:.2e}, diag ratio {report.entries[-1].ratio}"


def unipotent_loop(seed=0):
    germ = GermSpec.logdet("x1")
    loop = unipotent_loop_2x2()
    inc = continue_germ(germ, loop, DomainSpec.gl()).increment
    verdict = trace_equiv_check(loop, constant_path(loop.start_point), [germ], DomainSpec.gl())
    ok = abs(inc) <= 1e-8 and verdict.indistinguishable
    return 11, "2x2 unipotent loop is trivial", ok, f"|increment| {abs(inc):.2e}, trace-equiv {verdict.verdict}"


def homomorphism_padding(seed=0):
    rng = np.random.default_rng(seed)
    germ = GermSpec.logdet("x1")
    dom = DomainSpec.gl()
    worst = 0.0
    for _ in range(3):
        l1, _ = random_gl_loop(int(rng.integers(1, 4)), rng)
        l2, _ = random_gl_loop(int(rng.integers(1, 4)), rng)
        a, b = loop_phi(germ, l1, dom), loop_phi(germ, l2, dom)
        ab = loop_phi(germ, concatenate(l1, l2), dom)
        ba = loop_phi(germ, concatenate(l2, l1), dom)
        pad = loop_phi(germ, l1.inflate(int(rng.integers(2, 4))), dom)
        # divisibility: with gamma of size n and k = j n, the loop
        # delta = gamma_X^(+k) (+) gamma is a (j+1)-th root of gamma
        j = int(rng.integers(1, 3))
        delta = path_direct_sum(constant_path(l1.start_point, j * l1.n), l1)
        power = delta
        for _ in range(j):
            power = concatenate(power, delta)
        root = loop_phi(germ, power, dom)
        worst = max(worst, abs(ab - (a + b)), abs(ba - ab), abs(pad - a), abs(root - a))
    return 12, "homomorphism, commutativity, padding", worst <= 1e-6, f"max err {worst:.2e}"


def integrality(seed=0):
    loop = circle_loop(1)
    dom = DomainSpec.gl()
    good = integrality_test(GermSpec.closed_form(["inv(x1)"]), [loop], dom)
    third = integrality_test(GermSpec.closed_form([f"{1 / 3!r}*inv(x1)"]), [loop], dom)
    ok = (
        good.verdict == "divisor-candidate"
        and abs(good.ratios[0] - 1) <= 1e-6
        and third.verdict == "obstructed"
        and abs(third.ratios[0] - 1 / 3) <= 1e-6
    )
    return 13, "integrality of n phi / 2 pi i", ok, (
        f"inv(x1): {good.verdict} ratio {good.ratios[0].real:.9f}; "
        f"inv(x1)/3: {third.verdict} ratio {third.ratios[0].real:.9f}"
    )


def g_lambda_separation(seed=0):
    dom = DomainSpec((0j, 1 + 0j))
    around0 = circle_loop(1, radius=0.5, center=0.0)
    around1 = circle_loop(1, radius=0.5, center=1.0, phase=0.5)
    germs = [GermSpec.logdet("x1"), GermSpec.logdet("x1 - 1")]
    m = increment_matrix(germs, [around0, around1], dom)
    smin = float(np.linalg.svd(m, compute_uv=False).min())
    return 14, "G_Lambda increments independent", smin >= 0.1, f"smallest singular value {smin:.4f}"


CRITERIA = (
    weinstein_aronszajn,
    divisor_closed_form,
    oracle_equivalence,
    jacobi_pairing_check,
    divisor_additivity,
    exponential_identities,
    linearization,
    divisor_split_check,
    schur_block_inverse,
    monodromy_quantization,
    unipotent_loop,
    homomorphism_padding,
    integrality,
    g_lambda_separation,
)


def run_criterion(fn, seed=0):
    t0 = time.perf_counter()
    try:
        number, name, ok, detail = fn(seed)
    except Exception as exc:  # a crash is a failure, reported not raised
        number = CRITERIA.index(fn) + 1
        name, ok, detail = fn.__name__, False, f"raised {type(exc).__name__}: {exc}"
    return Criterion(number, name, bool(ok), detail, time.perf_counter() - t0)


def run_all(seed=0, only=None):
    """Run the criteria (all, or the 1-based numbers in ``only``) in order."""
    picked = [fn for i, fn in enumerate(CRITERIA, 1) if only is None or i in only]
    return [run_criterion(fn, seed) for fn in picked]
