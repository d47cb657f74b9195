"""Paths in matrix-tuple space and continuation of tracial germs.

A path is piecewise linear between nodes ``(t_j, X_j)`` on ``[0, 1]``. It
*essentially takes* ``X`` to ``Y`` when ``gamma(0) = X^(+k)`` and
``gamma(1) = Y^(+l)``; ``k`` and ``l`` are stored as ``pad_start`` and
``pad_end``.

Germs are continued by integrating their exact differential along the
path, so the increment never passes through a principal-branch logarithm:

* ``logdet(e)`` integrates ``tr(De(gamma)[gamma'] e(gamma)^-1) dt``;
* ``closed_form(g_1, ..., g_d)`` integrates ``tr(sum_i gamma_i' g_i(gamma)) dt``.

The quadrature is trapezoidal with step doubling; two levels of Richardson
extrapolation are applied to the accepted panels and the difference between
the last two levels is the error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional, Tuple

import numpy as np

from .errors import (
    ClosednessError,
    DimensionError,
    DomainExitError,
    EndpointMismatchError,
    SingularMatrixError,
    UnsupportedError,
)
from .evalad import _Evaluator, as_tuple
from .matcore import MatrixTuple, as_matrix, direct_power, random_unitary, slogdet, solve_inv
from .ncexpr import NcExpr, nvars, parse, to_string

__all__ = [
    "PathSpec",
    "DomainSpec",
    "GermSpec",
    "ContinuationResult",
    "QuantizationReport",
    "IntegralityVerdict",
    "TraceEquivVerdict",
    "constant_path",
    "concatenate",
    "path_direct_sum",
    "continue_germ",
    "loop_phi",
    "increment_matrix",
    "quantization_check",
    "integrality_test",
    "trace_equiv_check",
    "circle_loop",
    "diag_rotation_loop",
    "unipotent_loop_2x2",
    "random_gl_loop",
    "builtin_path",
]

TWO_PI_I = 2j * math.pi


def _close(a, b, rtol=1e-10):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    scale = 1.0 + max(float(np.abs(a).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    return bool(np.abs(a - b).max(initial=0.0) <= rtol * scale)


# --------------------------------------------------------------------------
# paths

class PathSpec:
    """A piecewise-linear path in ``M_n(C)^d``.

    Parameters
    ----------
    ts : sequence of float
        Strictly increasing node times, from 0 to 1.
    xs : array_like, shape (N, d, n, n)
        Node values (or a sequence of :class:`MatrixTuple`).
    pad_start, pad_end : int
        ``gamma(0)`` is ``pad_start`` copies of the essential start point,
        ``gamma(1)`` is ``pad_end`` copies of the essential end point.
    tag : str, optional
        Free-form label (e.g. the name of the base point).
    """

    def __init__(self, ts, xs, pad_start=1, pad_end=1, tag=None):
        ts = np.asarray(ts, dtype=float)
        if not isinstance(xs, np.ndarray):
            xs = np.stack([as_tuple(x).array for x in xs])
        xs = np.array(xs, dtype=np.complex128)
        if ts.ndim != 1 or len(ts) < 2:
            raise DimensionError("a path needs at least two nodes")
        if xs.ndim != 4 or xs.shape[0] != len(ts) or xs.shape[2] != xs.shape[3]:
            raise DimensionError(f"node array has shape {xs.shape} for {len(ts)} times")
        if ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) <= 0):
            raise DimensionError("node times must increase strictly from 0 to 1")
        if not np.all(np.isfinite(xs)):
            raise DimensionError("path nodes must be finite")
        n = xs.shape[2]
        for name, k in (("pad_start", pad_start), ("pad_end", pad_end)):
            if k < 1 or n % k:
                raise DimensionError(f"{name}={k} does not divide the path size n={n}")
        ts.flags.writeable = False
        xs.flags.writeable = False
        self.ts = ts
        self.xs = xs
        self.pad_start = int(pad_start)
        self.pad_end = int(pad_end)
        self.tag = tag
        if not _close(direct_power(self.start_point, self.pad_start).array, xs[0]):
            raise DimensionError(f"gamma(0) is not {pad_start} copies of a point")
        if not _close(direct_power(self.end_point, self.pad_end).array, xs[-1]):
            raise DimensionError(f"gamma(1) is not {pad_end} copies of a point")

    @property
    def n(self):
        return self.xs.shape[2]

    @property
    def d(self):
        return self.xs.shape[1]

    def __len__(self):
        return len(self.ts)

    def __repr__(self):
        return (
            f"PathSpec(n={self.n}, d={self.d}, nodes={len(self.ts)}, "
            f"pad_start={self.pad_start}, pad_end={self.pad_end})"
        )

    @property
    def start_point(self):
        """The essential start point ``X`` (``gamma(0) = X^(+k)``)."""
        s = self.n // self.pad_start
        return MatrixTuple(self.xs[0][:, :s, :s])

    @property
    def end_point(self):
        s = self.n // self.pad_end
        return MatrixTuple(self.xs[-1][:, :s, :s])

    def node(self, j):
        return MatrixTuple(self.xs[j])

    def at(self, t):
        """``gamma(t)`` by linear interpolation."""
        j = int(np.clip(np.searchsorted(self.ts, t, side="right") - 1, 0, len(self.ts) - 2))
        t0, t1 = self.ts[j], self.ts[j + 1]
        s = (t - t0) / (t1 - t0)
        return MatrixTuple((1 - s) * self.xs[j] + s * self.xs[j + 1])

    def is_loop(self):
        a, b = self.start_point, self.end_point
        return a.n == b.n and _close(a.array, b.array)

    def resample(self, ts):
        """Same path with nodes at ``ts`` (must include every corner to keep the polygon)."""
        ts = np.asarray(ts, dtype=float)
        xs = np.stack([self.at(t).array for t in ts])
        xs[0], xs[-1] = self.xs[0], self.xs[-1]
        return PathSpec(ts, xs, self.pad_start, self.pad_end, self.tag)

    def refine(self, factor=2):
        """Insert ``factor - 1`` equally spaced nodes in every segment."""
        pieces = [
            np.linspace(a, b, factor, endpoint=False) for a, b in zip(self.ts[:-1], self.ts[1:])
        ]
        return self.resample(np.concatenate(pieces + [[1.0]]))

    def reparametrize(self, phi):
        """Keep the nodes, move their times by an increasing ``phi: [0,1] -> [0,1]``."""
        ts = np.array([phi(t) for t in self.ts], dtype=float)
        ts[0], ts[-1] = 0.0, 1.0
        return PathSpec(ts, self.xs, self.pad_start, self.pad_end, self.tag)

    def inflate(self, m):
        """The path ``gamma^(+m)``."""
        eye = np.eye(m, dtype=np.complex128)
        xs = np.einsum("ab,Nkij->Nkaibj", eye, self.xs).reshape(
            len(self.ts), self.d, m * self.n, m * self.n
        )
        return PathSpec(self.ts, xs, self.pad_start * m, self.pad_end * m, self.tag)

    def reversed(self):
        return PathSpec(
            1.0 - self.ts[::-1], self.xs[::-1], self.pad_end, self.pad_start, self.tag
        )

    def conj_by(self, u):
        """``U* gamma U`` at every node; pads are kept, so ``U`` should fix the endpoints."""
        u = as_matrix(u, square=True)
        xs = u.conj().T @ self.xs @ u
        return PathSpec(self.ts, xs, self.pad_start, self.pad_end, self.tag)

    def to_json(self):
        obj = {
            "d": self.d,
            "n": self.n,
            "pad_start": self.pad_start,
            "pad_end": self.pad_end,
            "nodes": [
                {"t": float(t), "X": MatrixTuple(x).to_json()} for t, x in zip(self.ts, self.xs)
            ],
        }
        if self.tag is not None:
            obj["tag"] = self.tag
        return obj

    @classmethod
    def from_json(cls, obj):
        try:
            nodes = obj["nodes"]
            ts = [float(nd["t"]) for nd in nodes]
            xs = np.stack([MatrixTuple.from_json(nd["X"]).array for nd in nodes])
            d, n = int(obj["d"]), int(obj["n"])
            k, l = int(obj.get("pad_start", 1)), int(obj.get("pad_end", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise DimensionError(f"malformed path JSON: {exc}") from None
        if xs.shape[1:3] != (d, n):
            raise DimensionError(f"path JSON declares d={d}, n={n} but nodes are {xs.shape[1:]}")
        return cls(ts, xs, k, l, obj.get("tag"))


def constant_path(x, k=1, tag=None):
    """The trivial path ``gamma_X`` (taken ``k`` times)."""
    x = as_tuple(x)
    xs = direct_power(x, k).array
    return PathSpec([0.0, 1.0], np.stack([xs, xs]), k, k, tag)


def _lcm(a, b):
    return a * b // gcd(a, b)


def concatenate(g1, g2):
    """Concatenation product: first ``g1``, then ``g2``.

    Both paths are inflated by direct-sum powers so their sizes agree, and
    time is rescaled to ``[0, 1/2]`` and ``[1/2, 1]``.

    Raises
    ------
    EndpointMismatchError
        If ``g1`` does not essentially end where ``g2`` essentially starts.
    """
    if g1.d != g2.d:
        raise EndpointMismatchError(f"variable counts differ: {g1.d} vs {g2.d}")
    y1, y2 = g1.end_point, g2.start_point
    if y1.n != y2.n or not _close(y1.array, y2.array):
        raise EndpointMismatchError("end point of the first path is not the start of the second")
    size = _lcm(g1.n, g2.n)
    a, b = g1.inflate(size // g1.n), g2.inflate(size // g2.n)
    ts = np.concatenate([a.ts / 2, 0.5 + b.ts[1:] / 2])
    xs = np.concatenate([a.xs, b.xs[1:]])
    return PathSpec(ts, xs, a.pad_start, b.pad_end, g1.tag)


def path_direct_sum(g1, g2):
    """Pointwise direct sum ``g1 (+) g2`` of two paths with the same essential endpoints."""
    if g1.d != g2.d:
        raise EndpointMismatchError(f"variable counts differ: {g1.d} vs {g2.d}")
    for p, q in ((g1.start_point, g2.start_point), (g1.end_point, g2.end_point)):
        if p.n != q.n or not _close(p.array, q.array):
            raise EndpointMismatchError("direct sum needs paths with equal essential endpoints")
    ts = np.union1d(g1.ts, g2.ts)
    a, b = g1.resample(ts), g2.resample(ts)
    n1, n2 = g1.n, g2.n
    xs = np.zeros((len(ts), g1.d, n1 + n2, n1 + n2), dtype=np.complex128)
    xs[:, :, :n1, :n1] = a.xs
    xs[:, :, n1:, n1:] = b.xs
    return PathSpec(ts, xs, g1.pad_start + g2.pad_start, g1.pad_end + g2.pad_end, g1.tag)


# --------------------------------------------------------------------------
# domains and germs

@dataclass(frozen=True)
class DomainSpec:
    """Points whose first variable avoids the forbidden spectral values.

    ``X`` belongs to the domain when ``det(X_1 - lam I) != 0`` for every
    ``lam`` in ``forbidden``. ``forbidden=None`` means no restriction;
    ``(0,)`` is the invertible group.
    """

    forbidden: Optional[Tuple[complex, ...]] = None
    variable: int = 1

    @classmethod
    def gl(cls):
        return cls((0j,))

    def contains(self, x):
        try:
            self.check(x)
        except DomainExitError:
            return False
        return True

    def check(self, x, t=None):
        if not self.forbidden:
            return
        x1 = as_tuple(x)[self.variable - 1]
        eye = np.eye(x1.shape[0], dtype=np.complex128)
        for lam in self.forbidden:
            try:
                solve_inv(x1 - lam * eye)
            except SingularMatrixError:
                raise DomainExitError(f"path leaves the domain (det(X1 - {lam}) = 0)", t) from None

    def to_json(self):
        if self.forbidden is None:
            return {"forbidden_dets": None}
        return {"forbidden_dets": [[z.real, z.imag] for z in self.forbidden]}

    @classmethod
    def from_json(cls, obj):
        vals = obj.get("forbidden_dets") if obj else None
        if vals is None:
            return cls(None)
        return cls(tuple(complex(re, im) for re, im in vals))


@dataclass(frozen=True)
class GermSpec:
    """A tracial germ: ``logdet`` of an expression, or a closed 1-form.

    Use :meth:`logdet` and :meth:`closed_form` to build one.
    """

    kind: str
    exprs: Tuple[NcExpr, ...]

    def __post_init__(self):
        if self.kind not in ("logdet", "closed_form"):
            raise UnsupportedError(f"unknown germ kind {self.kind!r}")
        if self.kind == "logdet" and len(self.exprs) != 1:
            raise UnsupportedError("a logdet germ has exactly one expression")

    @classmethod
    def logdet(cls, e):
        return cls("logdet", (parse(e) if isinstance(e, str) else e,))

    @classmethod
    def closed_form(cls, gs):
        return cls("closed_form", tuple(parse(g) if isinstance(g, str) else g for g in gs))

    @property
    def nvars(self):
        if self.kind == "closed_form":
            return max(len(self.exprs), max(nvars(g) for g in self.exprs))
        return nvars(self.exprs[0])

    def __str__(self):
        if self.kind == "logdet":
            return f"logdet({to_string(self.exprs[0])})"
        return "closed(" + "; ".join(to_string(g) for g in self.exprs) + ")"

    def to_json(self):
        return {"kind": self.kind, "exprs": [to_string(g) for g in self.exprs]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["kind"], tuple(parse(s) for s in obj["exprs"]))


@dataclass(frozen=True)
class ContinuationResult:
    start_value: complex
    end_value: complex
    increment: complex
    normalized_increment: complex
    steps: int
    max_step_error: float
    pad_end: int = 1

    @property
    def germ_value(self):
        """The continued value with the ``1/l`` normalizing factor applied."""
        return self.end_value / self.pad_end


def _closedness_check(germ, path, tol, seed=0):
    rng = np.random.default_rng(seed)
    d, n = path.d, path.n
    for j in range(len(path)):
        x = path.node(j)
        h = MatrixTuple(rng.standard_normal((d, n, n)) + 1j * rng.standard_normal((d, n, n)))
        k = MatrixTuple(rng.standard_normal((d, n, n)) + 1j * rng.standard_normal((d, n, n)))
        dgh = [_Evaluator(x, h).run(g).tangent for g in germ.exprs]
        dgk = [_Evaluator(x, k).run(g).tangent for g in germ.exprs]
        lhs = sum(np.trace(ki @ gi) for ki, gi in zip(k, dgh))
        rhs = sum(np.trace(hi @ gi) for hi, gi in zip(h, dgk))
        scale = (
            1.0
            + k.norm() * sum(np.linalg.norm(g) for g in dgh)
            + h.norm() * sum(np.linalg.norm(g) for g in dgk)
        )
        if abs(lhs - rhs) > tol * scale:
            raise ClosednessError(
                f"{germ} is not closed at node {j} (defect {abs(lhs - rhs):.3e}, scale {scale:.3e})"
            )


class _Integrand:
    """Evaluates the germ's differential at ``gamma(t)`` for a fixed velocity."""

    def __init__(self, germ, dom):
        self.germ = germ
        self.dom = dom

    def __call__(self, x, v, t):
        if self.dom is not None:
            self.dom.check(x, t)
        if self.germ.kind == "closed_form":
            val = 0j
            for g, vi in zip(self.germ.exprs, v):
                try:
                    gx = _Evaluator(x).run(g).value
                except SingularMatrixError as exc:
                    raise DomainExitError(f"closed form undefined: {exc}", t) from None
                val += np.trace(vi @ gx)
            return complex(val), None
        e = self.germ.exprs[0]
        try:
            rec = _Evaluator(x, v).run(e)
            finv = solve_inv(rec.value, scale=rec.mag)
        except SingularMatrixError as exc:
            raise DomainExitError(f"{self.germ} hits the zero set: {exc}", t) from None
        sign, _ = slogdet(rec.value)
        return complex(np.trace(rec.tangent @ finv)), sign


_MAX_ARG_STEP = math.pi / 2
_MIN_PANEL = 1e-12


def _integrate_segment(fn, x0, x1, t0, t1, tol, stats):
    """Adaptive quadrature of ``fn`` along the straight segment ``x0 -> x1``."""
    v = (x1 - x0) * (1.0 / (t1 - t0))

    def point(t):
        s = (t - t0) / (t1 - t0)
        x = MatrixTuple((1 - s) * x0.array + s * x1.array)
        return fn(x, v, t)

    def panel(a, b, fa, fm, fb):
        m = 0.5 * (a + b)
        f1, f3 = point(0.5 * (a + m)), point(0.5 * (m + b))
        h = b - a
        t1_ = h / 2 * (fa[0] + fb[0])
        t2_ = h / 4 * (fa[0] + 2 * fm[0] + fb[0])
        t4_ = h / 8 * (fa[0] + 2 * f1[0] + 2 * fm[0] + 2 * f3[0] + fb[0])
        s2 = t2_ + (t2_ - t1_) / 3
        s4 = t4_ + (t4_ - t2_) / 3
        return s4 + (s4 - s2) / 15, abs(s4 - s2) / 15, (fa, f1, fm, f3, fb)

    def guard_ok(samples, value):
        if samples[0][1] is None:
            return True
        for p, q in zip(samples[:-1], samples[1:]):
            if abs(np.angle(q[1] / p[1])) > _MAX_ARG_STEP:
                return False
        return abs(value.imag) <= 2 * _MAX_ARG_STEP

    total = 0j
    stack = [(t0, t1, point(t0), point(0.5 * (t0 + t1)), point(t1))]
    while stack:
        a, b, fa, fm, fb = stack.pop()
        val, err, samples = panel(a, b, fa, fm, fb)
        if err <= tol * (b - a) and guard_ok(samples, val):
            total += val
            stats["steps"] += 1
            stats["max_err"] = max(stats["max_err"], err)
            continue
        if b - a < _MIN_PANEL:
            raise DomainExitError("step size underflow (near-singular integrand)", 0.5 * (a + b))
        m = 0.5 * (a + b)
        _, f1, _, f3, _ = samples
        stack.append((m, b, fm, f3, fb))
        stack.append((a, m, fa, f1, fm))
    return total


def continue_germ(germ, path, dom=None, tol=1e-8, closed_tol=1e-5):
    """Continue ``germ`` along ``path`` and report the increment.

    The germ's starting value is ``pad_start`` times its principal value at
    the essential start point for ``logdet`` germs, and zero for closed
    forms. ``normalized_increment`` divides the increment by the path size.

    Raises
    ------
    DomainExitError
        If the path leaves ``dom`` or the germ becomes singular; carries ``t``.
    ClosednessError
        If a closed-form germ fails the symmetry test at some node.
    """
    if germ.nvars > path.d:
        raise DimensionError(f"germ uses {germ.nvars} variables, path has d={path.d}")
    if germ.kind == "closed_form":
        if len(germ.exprs) != path.d:
            raise DimensionError(f"closed form has {len(germ.exprs)} components, path has d={path.d}")
        _closedness_check(germ, path, closed_tol)
    fn = _Integrand(germ, dom)
    if dom is not None:
        for j in range(len(path)):
            dom.check(path.node(j), float(path.ts[j]))
    if germ.kind == "logdet":
        x0 = path.start_point
        try:
            rec = _Evaluator(x0).run(germ.exprs[0])
            solve_inv(rec.value, scale=rec.mag)
        except SingularMatrixError as exc:
            raise DomainExitError(f"germ undefined at the start point: {exc}", 0.0) from None
        sign, logabs = slogdet(rec.value)
        start = path.pad_start * complex(logabs, np.angle(sign))
    else:
        start = 0j
    stats = {"steps": 0, "max_err": 0.0}
    inc = 0j
    for j in range(len(path) - 1):
        x0, x1 = path.node(j), path.node(j + 1)
        t0, t1 = float(path.ts[j]), float(path.ts[j + 1])
        if np.array_equal(x0.array, x1.array):
            continue
        inc += _integrate_segment(fn, x0, x1, t0, t1, tol, stats)
    return ContinuationResult(
        start_value=start,
        end_value=start + inc,
        increment=inc,
        normalized_increment=inc / path.n,
        steps=stats["steps"],
        max_step_error=stats["max_err"],
        pad_end=path.pad_end,
    )


def loop_phi(germ, loop, dom=None, tol=1e-8):
    """Monodromy increment of ``germ`` around ``loop``, divided by the loop's size."""
    if not loop.is_loop():
        raise EndpointMismatchError("loop_phi needs a path that essentially returns to its start")
    return continue_germ(germ, loop, dom, tol).normalized_increment


def increment_matrix(germs, loops, dom=None, tol=1e-8):
    """The matrix ``[phi_{g_i}(gamma_j)]``."""
    return np.array([[loop_phi(g, c, dom, tol) for c in loops] for g in germs], dtype=np.complex128)


# --------------------------------------------------------------------------
# checks

@dataclass(frozen=True)
class QuantizationEntry:
    value: complex
    n: int
    ratio: Fraction
    residual: float
    ok: bool


@dataclass(frozen=True)
class QuantizationReport:
    entries: Tuple[QuantizationEntry, ...]
    tol: float

    @property
    def passed(self):
        return all(e.ok for e in self.entries)

    @property
    def failures(self):
        return [e for e in self.entries if not e.ok]


def _nearest_integer(z):
    w = int(round(z.real))
    return w, abs(z - w)


def quantization_check(values, tol=1e-6):
    """Check that ``n c`` lies in ``2 pi i Z`` for every ``(c, n)``.

    Each entry reports the winding ratio ``c / (2 pi i) = w / n``.
    """
    entries = []
    for c, n in values:
        c, n = complex(c), int(n)
        w, res = _nearest_integer(n * c / TWO_PI_I)
        entries.append(QuantizationEntry(c, n, Fraction(w, n), float(res), res <= tol))
    return QuantizationReport(tuple(entries), tol)


@dataclass(frozen=True)
class IntegralityVerdict:
    verdict: str  # "divisor-candidate" or "obstructed"
    ratios: Tuple[complex, ...]
    witnesses: Tuple[int, ...] = field(default=())

    @property
    def passed(self):
        return self.verdict == "divisor-candidate"


def integrality_test(germ, loops, dom=None, tol=1e-6):
    """Necessary condition for ``germ`` (a closed form) to be a principal divisor.

    For each loop of size ``n`` computes ``n phi_g(gamma) / (2 pi i)`` and
    asks that it be an integer within ``tol``. Failing loops are returned
    as witnesses (indices into ``loops``).
    """
    if germ.kind != "closed_form":
        raise UnsupportedError("integrality is tested for closed-form germs")
    ratios, witnesses = [], []
    for j, loop in enumerate(loops):
        c = loop_phi(germ, loop, dom)
        r = loop.n * c / TWO_PI_I
        ratios.append(complex(r))
        if _nearest_integer(r)[1] > tol:
            witnesses.append(j)
    verdict = "obstructed" if witnesses else "divisor-candidate"
    return IntegralityVerdict(verdict, tuple(ratios), tuple(witnesses))


@dataclass(frozen=True)
class TraceEquivVerdict:
    verdict: str  # "indistinguishable" or "distinguished"
    values: Tuple[Tuple[complex, complex], ...]
    separating: Optional[int] = None

    @property
    def indistinguishable(self):
        return self.verdict == "indistinguishable"


def trace_equiv_check(g1, g2, germs, dom=None, tol=1e-6):
    """Compare two paths through the continued values of a finite germ family.

    The verdict is relative to ``germs`` only: "indistinguishable" means no
    supplied germ separates the paths.
    """
    for p, q in ((g1.start_point, g2.start_point), (g1.end_point, g2.end_point)):
        if p.n != q.n or not _close(p.array, q.array):
            raise EndpointMismatchError("paths do not share essential endpoints")
    values = []
    separating = None
    for i, germ in enumerate(germs):
        v1 = continue_germ(germ, g1, dom).germ_value
        v2 = continue_germ(germ, g2, dom).germ_value
        values.append((v1, v2))
        if separating is None and abs(v1 - v2) > tol * (1.0 + abs(v1) + abs(v2)):
            separating = i
    verdict = "indistinguishable" if separating is None else "distinguished"
    return TraceEquivVerdict(verdict, tuple(values), separating)


# --------------------------------------------------------------------------
# built-in paths

def _scalar_nodes(values, d, fill=0.0):
    values = np.asarray(values, dtype=np.complex128)
    xs = np.full((len(values), d, 1, 1), fill, dtype=np.complex128)
    xs[:, 0, 0, 0] = values
    return xs


def circle_loop(winding=1, radius=1.0, center=0.0, samples=256, d=1, phase=0.0):
    """``center + radius e^{2 pi i (w t + phase)}`` as a loop in ``M_1``.

    Variables other than the first are held at zero.
    """
    if samples < 3:
        raise ValueError("a loop needs at least 3 samples")
    ts = np.linspace(0.0, 1.0, samples)
    z = center + radius * np.exp(2j * np.pi * (winding * ts + phase))
    z[-1] = z[0]
    return PathSpec(ts, _scalar_nodes(z, d), 1, 1, tag="circle")


def diag_rotation_loop(n, windings=1, samples=256, unitary=None, nilpotent=None, d=1):
    """Loop at the identity of ``GL_n`` winding the eigenvalues.

    ``X(t) = U* (diag(e^{2 pi i w_j t}) + sin(pi t) N) U`` with ``N`` strictly
    upper triangular, so ``det X(t) = e^{2 pi i (sum w_j) t}``. The default is
    ``diag(e^{2 pi i w t}, 1, ..., 1)``. The base point is ``1`` taken ``n`` times.
    """
    if np.isscalar(windings):
        windings = [windings] + [0] * (n - 1)
    windings = np.asarray(windings, dtype=float)
    if windings.shape != (n,):
        raise ValueError(f"need {n} windings")
    ts = np.linspace(0.0, 1.0, samples)
    diag = np.exp(2j * np.pi * np.outer(ts, windings))
    mats = np.zeros((samples, n, n), dtype=np.complex128)
    mats[:, np.arange(n), np.arange(n)] = diag
    if nilpotent is not None:
        nil = np.triu(np.asarray(nilpotent, dtype=np.complex128), 1)
        mats += np.sin(np.pi * ts)[:, None, None] * nil
    if unitary is not None:
        u = as_matrix(unitary, square=True)
        mats = u.conj().T @ mats @ u
    mats[0] = np.eye(n)
    mats[-1] = np.eye(n)
    xs = np.zeros((samples, d, n, n), dtype=np.complex128)
    xs[:, 0] = mats
    return PathSpec(ts, xs, n, n, tag="identity")


def unipotent_loop_2x2(samples=256, d=1):
    """The loop ``[[e^{2 pi i t}, 1], [0, e^{-2 pi i t}]]`` based at ``[[1, 1], [0, 1]]``."""
    ts = np.linspace(0.0, 1.0, samples)
    a = np.exp(2j * np.pi * ts)
    a[-1] = a[0]
    mats = np.zeros((samples, d, 2, 2), dtype=np.complex128)
    mats[:, 0, 0, 0] = a
    mats[:, 0, 1, 1] = a.conj()
    mats[:, 0, 0, 1] = 1.0
    return PathSpec(ts, mats, 1, 1, tag="unipotent")


def random_gl_loop(n, seed, max_winding=3, samples=256):
    """Random loop at the identity of ``GL_n`` with known total winding.

    Returns ``(loop, total_winding)``.
    """
    rng = np.random.default_rng(seed)
    w = rng.integers(-max_winding, max_winding + 1, size=n)
    nil = 0.5 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    u = random_unitary(n, rng)
    return diag_rotation_loop(n, w, samples, unitary=u, nilpotent=nil), int(w.sum())


def builtin_path(kind, n=1, winding=1, samples=256, radius=1.0, center=0.0, d=1):
    """Generator behind ``nc gen-path``."""
    if kind == "circle-det":
        if n == 1:
            return circle_loop(winding, radius, center, samples, d)
        return diag_rotation_loop(n, winding, samples, d=d)
    if kind == "diag-rotation":
        return diag_rotation_loop(n, winding, samples, d=d)
    if kind == "unipotent-2x2":
        return unipotent_loop_2x2(samples, d)
    raise UnsupportedError(f"unknown path kind {kind!r}")
