"""Evaluation and differentiation of expressions on matrix tuples.

Values of matricial expressions are block matrices of ``n x n`` blocks. A
scalar-shaped value that meets a ``k x k`` block value is promoted to
``I_k (x) value`` (the block diagonal of ``k`` copies).

Reverse mode uses the trace pairing: a cotangent ``W`` of a node with
value ``C`` encodes the sensitivity ``tr(W dC)``. With this convention
``C = AB`` sends ``W`` to ``B W`` (for ``A``) and ``W A`` (for ``B``), and
``C = A^-1`` sends ``W`` to ``-C W C``. Seeding the root with ``f(X)^-1``
and collecting the cotangents that reach each variable gives the principal
divisor in a single pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DimensionError, SingularMatrixError, StructureError, UnsupportedError, ZeroSetError
from .matcore import MatrixTuple, expm, expm_frechet, slogdet, solve_inv
from .ncexpr import (
    Const,
    Exp,
    Inv,
    MatExpr,
    Neg,
    Prod,
    Sum,
    Var,
    _matexpr_layout,
    _prod_promotions,
    _sum_target,
    nvars,
    to_string,
)

__all__ = [
    "EvalResult",
    "DivisorValue",
    "as_tuple",
    "evaluate",
    "dir_deriv",
    "divisor",
    "jacobi_pairing",
    "tracial_eval",
    "closedness_defect",
    "scale_of",
]


def as_tuple(x, d=None):
    """Coerce ``x`` (a MatrixTuple or a sequence of matrices) to a MatrixTuple."""
    if isinstance(x, MatrixTuple):
        t = x
    else:
        t = MatrixTuple(list(x) if not isinstance(x, np.ndarray) else x)
    if d is not None and t.d < d:
        raise DimensionError(f"expression uses {d} variables but the point has {t.d}")
    return t


def scale_of(*arrays):
    """``1 +`` the sum of Frobenius norms of the operands."""
    return 1.0 + sum(float(np.linalg.norm(np.asarray(a).ravel())) for a in arrays)


@dataclass(frozen=True)
class EvalResult:
    """Value of an expression at a point.

    ``condition`` is the worst 1-norm condition estimate over all inverses
    taken during evaluation (1.0 when there were none).
    """

    value: np.ndarray
    condition: float
    block_dims: Tuple[int, int]


@dataclass(frozen=True)
class DivisorValue:
    """Value of a principal divisor: one ``n x n`` matrix per variable."""

    components: Tuple[np.ndarray, ...]

    @property
    def n(self):
        return self.components[0].shape[0]

    @property
    def d(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __add__(self, other):
        return DivisorValue(tuple(a + b for a, b in zip(self, other, strict=True)))

    def __sub__(self, other):
        return DivisorValue(tuple(a - b for a, b in zip(self, other, strict=True)))

    def pairing(self, h):
        """``tr(sum_i H_i g_i)``."""
        h = as_tuple(h)
        return complex(sum(np.trace(hi @ gi) for hi, gi in zip(h, self.components, strict=True)))

    def as_tuple(self):
        return MatrixTuple(np.stack(self.components))

    def max_abs_diff(self, other):
        return max(float(np.abs(a - b).max()) for a, b in zip(self, other, strict=True))


# --------------------------------------------------------------------------
# internals

class _Rec:
    """Per-node evaluation record."""

    __slots__ = ("value", "shape", "mag", "tangent", "promote")

    def __init__(self, value, shape, mag, tangent=None, promote=None):
        self.value = value
        self.shape = shape
        self.mag = mag
        self.tangent = tangent
        self.promote = promote  # promotion factors of the children


def _promote(v, k):
    return v if k == 1 else np.kron(np.eye(k, dtype=np.complex128), v)


def _unpromote(w, k, n):
    """Adjoint of :func:`_promote`: sum of the ``k`` diagonal blocks."""
    if k == 1:
        return w
    return sum(w[b * n:(b + 1) * n, b * n:(b + 1) * n] for b in range(k))


def _fro(a):
    return float(np.linalg.norm(a.ravel()))


class _Evaluator:
    """Forward evaluation, optionally carrying a tangent direction."""

    def __init__(self, x, h=None):
        self.x = x
        self.h = h
        self.n = x.n
        self.cond = 1.0
        self.memo = {}

    def run(self, e):
        rec = self.memo.get(id(e))
        if rec is None:
            rec = self._node(e)
            self.memo[id(e)] = rec
        return rec

    def _inverse(self, a, mag, where):
        try:
            inv, cond = solve_inv(a, scale=mag, return_cond=True)
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                f"singular argument of inverse at {where}: {exc}",
                pivot=exc.pivot,
                threshold=exc.threshold,
                where=where,
            ) from None
        self.cond = max(self.cond, cond)
        return inv

    def _node(self, e):
        n = self.n
        tangents = self.h is not None
        if isinstance(e, Var):
            if e.index > self.x.d:
                raise DimensionError(f"x{e.index} used but the point has d={self.x.d}")
            v = self.x[e.index - 1]
            t = self.h[e.index - 1] if tangents else None
            return _Rec(v, (1, 1), _fro(v), t)
        if isinstance(e, Const):
            v = e.value * np.eye(n, dtype=np.complex128)
            t = np.zeros((n, n), dtype=np.complex128) if tangents else None
            return _Rec(v, (1, 1), abs(e.value) * np.sqrt(n), t)
        if isinstance(e, Neg):
            c = self.run(e.child)
            return _Rec(-c.value, c.shape, c.mag, None if c.tangent is None else -c.tangent)
        if isinstance(e, Sum):
            recs = [self.run(c) for c in e.children]
            target = _sum_target([r.shape for r in recs])
            ks = [target[0] if r.shape != target else 1 for r in recs]
            v = sum(_promote(r.value, k) for r, k in zip(recs, ks))
            mag = sum(r.mag * np.sqrt(k) for r, k in zip(recs, ks))
            t = None
            if tangents:
                t = sum(_promote(r.tangent, k) for r, k in zip(recs, ks))
            return _Rec(v, target, mag, t, ks)
        if isinstance(e, Prod):
            recs = [self.run(c) for c in e.children]
            ks, shape = _prod_promotions([r.shape for r in recs])
            vals = [_promote(r.value, k) for r, k in zip(recs, ks)]
            v = vals[0]
            for m in vals[1:]:
                v = v @ m
            mag = float(np.prod([r.mag * np.sqrt(k) for r, k in zip(recs, ks)]))
            t = None
            if tangents:
                t = np.zeros_like(v)
                left = None
                suffix = [None] * (len(vals) + 1)
                for j in range(len(vals) - 1, -1, -1):
                    suffix[j] = vals[j] if suffix[j + 1] is None else vals[j] @ suffix[j + 1]
                for j, (r, k) in enumerate(zip(recs, ks)):
                    if r.tangent is not None:
                        term = _promote(r.tangent, k)
                        if left is not None:
                            term = left @ term
                        if suffix[j + 1] is not None:
                            term = term @ suffix[j + 1]
                        t = t + term
                    left = vals[j] if left is None else left @ vals[j]
            return _Rec(v, shape, mag, t, ks)
        if isinstance(e, Inv):
            c = self.run(e.child)
            if c.shape[0] != c.shape[1]:
                raise StructureError("inverse of a non-square block")
            v = self._inverse(c.value, c.mag, to_string(e))
            t = None if c.tangent is None else -v @ c.tangent @ v
            return _Rec(v, c.shape, _fro(v), t)
        if isinstance(e, Exp):
            c = self.run(e.child)
            if c.shape[0] != c.shape[1]:
                raise StructureError("exponential of a non-square block")
            if c.tangent is None:
                v, t = expm(c.value), None
            else:
                v, t = expm_frechet(c.value, c.tangent)
            return _Rec(v, c.shape, _fro(v), t)
        if isinstance(e, MatExpr):
            e.shape
            grid = [[self.run(c) for c in row] for row in e.rows]
            heights, widths = _matexpr_layout([[r.shape for r in row] for row in grid])
            v = np.block([[r.value for r in row] for row in grid])
            t = None
            if tangents:
                t = np.block([[r.tangent for r in row] for row in grid])
            mag = float(np.sqrt(sum(r.mag ** 2 for row in grid for r in row)))
            return _Rec(v, (sum(heights), sum(widths)), mag, t)
        raise StructureError(f"unknown node {e!r}")


def _prepare(e, x):
    x = as_tuple(x, nvars(e))
    return x


def evaluate(e, x):
    """Value of ``e`` at the point ``x``.

    Raises
    ------
    SingularMatrixError
        If an inverse meets a singular argument; ``where`` names the
        offending subexpression.
    """
    x = _prepare(e, x)
    ev = _Evaluator(x)
    rec = ev.run(e)
    return EvalResult(rec.value, ev.cond, rec.shape)


def dir_deriv(e, x, h):
    """Directional derivative ``De(X)[H]`` by forward propagation."""
    x = _prepare(e, x)
    h = as_tuple(h)
    if h.array.shape != x.array.shape:
        raise DimensionError(f"direction shape {h.array.shape} != point shape {x.array.shape}")
    ev = _Evaluator(x, h)
    rec = ev.run(e)
    return rec.tangent


def _root_inverse(rec, e):
    if rec.shape[0] != rec.shape[1]:
        raise StructureError("divisor needs a square expression")
    try:
        return solve_inv(rec.value, scale=rec.mag)
    except SingularMatrixError as exc:
        raise ZeroSetError(
            f"point lies on the zero set of {to_string(e)}: {exc}",
            pivot=exc.pivot,
            threshold=exc.threshold,
            where=to_string(e),
        ) from None


def _backprop(e, w, memo, grads, n):
    """Push the cotangent ``w`` of node ``e`` down to the variables."""
    rec = memo[id(e)]
    if isinstance(e, Var):
        grads[e.index - 1] += w
    elif isinstance(e, Const):
        pass
    elif isinstance(e, Neg):
        _backprop(e.child, -w, memo, grads, n)
    elif isinstance(e, Sum):
        for c, k in zip(e.children, rec.promote):
            _backprop(c, _unpromote(w, k, n), memo, grads, n)
    elif isinstance(e, Prod):
        vals = [_promote(memo[id(c)].value, k) for c, k in zip(e.children, rec.promote)]
        m = len(vals)
        prefix = [None] * m  # prefix[j] = vals[0] ... vals[j-1]
        acc = None
        for j in range(m):
            prefix[j] = acc
            acc = vals[j] if acc is None else acc @ vals[j]
        suffix = None  # vals[j+1] ... vals[m-1]
        for j in range(m - 1, -1, -1):
            wj = w if suffix is None else suffix @ w
            if prefix[j] is not None:
                wj = wj @ prefix[j]
            _backprop(e.children[j], _unpromote(wj, rec.promote[j], n), memo, grads, n)
            suffix = vals[j] if suffix is None else vals[j] @ suffix
    elif isinstance(e, Inv):
        c = rec.value
        _backprop(e.child, -c @ w @ c, memo, grads, n)
    elif isinstance(e, Exp):
        a = memo[id(e.child)].value
        _, wa = expm_frechet(a, w)
        _backprop(e.child, wa, memo, grads, n)
    elif isinstance(e, MatExpr):
        grid = [[memo[id(c)] for c in row] for row in e.rows]
        heights, widths = _matexpr_layout([[r.shape for r in row] for row in grid])
        r0 = np.concatenate([[0], np.cumsum(heights)]) * n
        c0 = np.concatenate([[0], np.cumsum(widths)]) * n
        for i, row in enumerate(e.rows):
            for j, c in enumerate(row):
                # tr(W dV) pairs block (i, j) of dV with block (j, i) of W
                wij = w[c0[j]:c0[j + 1], r0[i]:r0[i + 1]]
                _backprop(c, wij, memo, grads, n)
    else:
        raise StructureError(f"unknown node {e!r}")


def divisor(e, x, method="reverse"):
    """Principal divisor of (the determinant of) ``e`` at ``x``.

    Returns the tuple ``g`` with ``tr(sum_i H_i g_i) = tr(De(X)[H] e(X)^-1)``
    for every direction ``H``.

    Parameters
    ----------
    e : NcExpr
        Scalar or square matricial expression.
    x : MatrixTuple
    method : {"reverse", "forward"}
        ``reverse`` does one adjoint pass seeded with ``e(X)^-1``.
        ``forward`` extracts every entry with a directional derivative
        along a matrix unit (``d n^2`` passes) and serves as an oracle.

    Raises
    ------
    ZeroSetError
        If ``e(X)`` is singular.
    """
    x = _prepare(e, x)
    n, d = x.n, x.d
    if method == "reverse":
        ev = _Evaluator(x)
        root = ev.run(e)
        finv = _root_inverse(root, e)
        grads = [np.zeros((n, n), dtype=np.complex128) for _ in range(d)]
        _backprop(e, finv, ev.memo, grads, n)
        return DivisorValue(tuple(grads))
    if method == "forward":
        root = _Evaluator(x).run(e)
        finv = _root_inverse(root, e)
        comps = []
        zero = np.zeros((d, n, n), dtype=np.complex128)
        for i in range(d):
            g = np.zeros((n, n), dtype=np.complex128)
            for k in range(n):
                for l in range(n):
                    hh = zero.copy()
                    hh[i, k, l] = 1.0
                    df = _Evaluator(x, MatrixTuple(hh)).run(e).tangent
                    g[l, k] = np.trace(df @ finv)
            comps.append(g)
        return DivisorValue(tuple(comps))
    raise UnsupportedError(f"unknown divisor method {method!r}")


def jacobi_pairing(e, x, h):
    """``tr(De(X)[H] e(X)^-1)``, the derivative of ``log det e`` along ``H``."""
    x = _prepare(e, x)
    ev = _Evaluator(x, as_tuple(h))
    rec = ev.run(e)
    finv = _root_inverse(rec, e)
    return complex(np.trace(rec.tangent @ finv))


def tracial_eval(e, x, kind="trace"):
    """Trace or principal-branch log-determinant of ``e(X)``."""
    res = evaluate(e, x)
    v = res.value
    if v.shape[0] != v.shape[1]:
        raise StructureError("tracial evaluation needs a square expression")
    if kind == "trace":
        return complex(np.trace(v))
    if kind == "logdet":
        try:
            solve_inv(v)
        except SingularMatrixError as exc:
            raise ZeroSetError(f"log det undefined: {exc}", pivot=exc.pivot) from None
        sign, logabs = slogdet(v)
        return complex(logabs, np.angle(sign))
    raise UnsupportedError(f"unknown tracial kind {kind!r}")


def closedness_defect(gmap, x, h, k, step=1e-5):
    """Finite-difference symmetry defect of a map ``g: M^d -> M^d``.

    Returns ``(defect, scale)`` with
    ``defect = |tr K.Dg(X)[H] - tr H.Dg(X)[K]|`` estimated by central
    differences, and ``scale = 1 + |H||K| |Dg|`` estimate.
    """
    x, h, k = as_tuple(x), as_tuple(h), as_tuple(k)

    def dg(direction):
        plus = gmap(x + step * direction)
        minus = gmap(x - step * direction)
        return [(p - m) / (2 * step) for p, m in zip(plus, minus)]

    dgh, dgk = dg(h), dg(k)
    lhs = sum(np.trace(ki @ gi) for ki, gi in zip(k, dgh))
    rhs = sum(np.trace(hi @ gi) for hi, gi in zip(h, dgk))
    scale = 1.0 + k.norm() * sum(_fro(g) for g in dgh) + h.norm() * sum(_fro(g) for g in dgk)
    return float(abs(lhs - rhs)), scale
