"""Linear pencil realizations ``r = b* L^-1 c`` of rational expressions.

A realization stores the coefficients of an affine pencil
``L(x) = A_0 + sum_i A_i x_i`` and two constant ``m x k`` matrices ``b``,
``c``. At a point ``X`` of size ``n`` the pencil is the ``mn x mn`` matrix
``A_0 (x) I_n + sum_i A_i (x) X_i``.

The constructors follow the usual composition rules:

* a variable ``x`` is realized by ``[[1, -x], [0, 1]]`` with ``b = e_1``,
  ``c = e_2``;
* a constant ``a`` by the ``1 x 1`` pencil ``[1]`` with ``b = 1``, ``c = a``;
* a sum by the direct sum of pencils with stacked ``b`` and ``c``;
* a product ``r1 r2`` by ``[[L1, -c1 b2*], [0, L2]]``;
* an inverse by bordering, ``[[L, c], [-b*, 0]]`` with ``b = c = e_{m+1}``;
  the inverse of an affine expression directly uses that expression as a
  ``1 x 1`` pencil.

No minimization is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateError,
    DimensionError,
    PencilSingularError,
    SingularMatrixError,
    UnsupportedError,
)
from .evalad import as_tuple, divisor
from .matcore import as_matrix, lu_det, matrix_from_json, matrix_to_json, solve, solve_inv
from .ncexpr import (
    Const,
    Exp,
    Inv,
    MatExpr,
    Neg,
    Prod,
    Sum,
    Var,
    nvars,
    probe_nondegenerate,
    walk,
)

__all__ = [
    "Realization",
    "DetRatio",
    "linearize",
    "realization_eval",
    "det_ratio",
    "divisor_split",
    "pencil_expr",
    "bordered_expr",
    "block_inverse",
]


@dataclass(frozen=True)
class Realization:
    """Pencil data for ``r = b* L^-1 c``.

    Attributes
    ----------
    coeffs : ndarray, shape (d + 1, m, m)
        ``coeffs[0]`` is the constant term, ``coeffs[i]`` multiplies ``x_i``.
    b, c : ndarray, shape (m, k)
    """

    coeffs: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        b = as_matrix(self.b)
        c = as_matrix(self.c)
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2] or coeffs.shape[0] < 2:
            raise DimensionError(f"bad pencil coefficient array of shape {coeffs.shape}")
        m = coeffs.shape[1]
        if b.shape[0] != m or c.shape != b.shape:
            raise DimensionError(f"b {b.shape} and c {c.shape} must both be {m} x k")
        for a in (coeffs, b, c):
            a.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self):
        return self.coeffs.shape[1]

    @property
    def d(self):
        return self.coeffs.shape[0] - 1

    @property
    def k(self):
        return self.b.shape[1]

    def pencil(self, x):
        """``L(X)`` as a dense ``mn x mn`` matrix."""
        x = as_tuple(x)
        if x.d != self.d:
            raise DimensionError(f"realization has d={self.d}, point has d={x.d}")
        eye = np.eye(x.n, dtype=np.complex128)
        out = np.kron(self.coeffs[0], eye)
        for a, xi in zip(self.coeffs[1:], x):
            if np.any(a):
                out = out + np.kron(a, xi)
        return out

    def to_json(self):
        return {
            "m": self.m,
            "d": self.d,
            "k": self.k,
            "A": [matrix_to_json(a) for a in self.coeffs],
            "b": matrix_to_json(self.b),
            "c": matrix_to_json(self.c),
        }

    @classmethod
    def from_json(cls, obj):
        try:
            coeffs = np.stack([matrix_from_json(a) for a in obj["A"]])
            r = cls(coeffs, matrix_from_json(obj["b"]), matrix_from_json(obj["c"]))
            declared = (int(obj["m"]), int(obj["d"]), int(obj["k"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DimensionError(f"malformed realization JSON: {exc}") from None
        if declared != (r.m, r.d, r.k):
            raise DimensionError(f"declared (m, d, k) = {declared} but data is {(r.m, r.d, r.k)}")
        return r


# --------------------------------------------------------------------------
# construction

def _unit(m, i):
    v = np.zeros((m, 1), dtype=np.complex128)
    v[i, 0] = 1.0
    return v


def _affine(e, d):
    """Coefficients ``(a_0, ..., a_d)`` if ``e`` is affine, else None."""
    if isinstance(e, Var):
        v = np.zeros(d + 1, dtype=np.complex128)
        v[e.index] = 1.0
        return v
    if isinstance(e, Const):
        v = np.zeros(d + 1, dtype=np.complex128)
        v[0] = e.value
        return v
    if isinstance(e, Neg):
        v = _affine(e.child, d)
        return None if v is None else -v
    if isinstance(e, Sum):
        parts = [_affine(c, d) for c in e.children]
        return None if any(p is None for p in parts) else sum(parts)
    if isinstance(e, Prod):
        parts = [_affine(c, d) for c in e.children]
        if any(p is None for p in parts):
            return None
        linear = [p for p in parts if np.any(p[1:])]
        if len(linear) > 1:
            return None
        scalar = np.prod([p[0] for p in parts if not np.any(p[1:])])
        base = linear[0] if linear else np.eye(1, d + 1, 0, dtype=np.complex128)[0]
        return scalar * base
    return None


def _lin(e, d):
    if isinstance(e, Var):
        coeffs = np.zeros((d + 1, 2, 2), dtype=np.complex128)
        coeffs[0] = np.eye(2)
        coeffs[e.index, 0, 1] = -1.0
        return coeffs, _unit(2, 0), _unit(2, 1)
    if isinstance(e, Const):
        coeffs = np.zeros((d + 1, 1, 1), dtype=np.complex128)
        coeffs[0, 0, 0] = 1.0
        return coeffs, _unit(1, 0), np.full((1, 1), e.value, dtype=np.complex128)
    if isinstance(e, Neg):
        coeffs, b, c = _lin(e.child, d)
        return coeffs, b, -c
    if isinstance(e, Sum):
        parts = [_lin(ch, d) for ch in e.children]
        m = sum(p[0].shape[1] for p in parts)
        coeffs = np.zeros((d + 1, m, m), dtype=np.complex128)
        off = 0
        for a, _, _ in parts:
            s = a.shape[1]
            coeffs[:, off:off + s, off:off + s] = a
            off += s
        b = np.vstack([p[1] for p in parts])
        c = np.vstack([p[2] for p in parts])
        return coeffs, b, c
    if isinstance(e, Prod):
        coeffs, b, c = _lin(e.children[0], d)
        for ch in e.children[1:]:
            a2, b2, c2 = _lin(ch, d)
            m1, m2 = coeffs.shape[1], a2.shape[1]
            new = np.zeros((d + 1, m1 + m2, m1 + m2), dtype=np.complex128)
            new[:, :m1, :m1] = coeffs
            new[:, m1:, m1:] = a2
            new[0, :m1, m1:] = -c @ b2.conj().T
            b = np.vstack([b, np.zeros_like(b2)])
            c = np.vstack([np.zeros_like(c), c2])
            coeffs = new
        return coeffs, b, c
    if isinstance(e, Inv):
        aff = _affine(e.child, d)
        if aff is not None:
            return aff.reshape(d + 1, 1, 1), _unit(1, 0), _unit(1, 0)
        coeffs, b, c = _lin(e.child, d)
        m, k = coeffs.shape[1], b.shape[1]
        new = np.zeros((d + 1, m + k, m + k), dtype=np.complex128)
        new[:, :m, :m] = coeffs
        new[0, :m, m:] = c
        new[0, m:, :m] = -b.conj().T
        unit = np.zeros((m + k, k), dtype=np.complex128)
        unit[m:, :] = np.eye(k)
        return new, unit, unit.copy()
    if isinstance(e, Exp):
        raise UnsupportedError("exp is not rational and cannot be linearized")
    if isinstance(e, MatExpr):
        raise UnsupportedError("only scalar rational expressions can be linearized")
    raise UnsupportedError(f"cannot linearize {e!r}")


def linearize(e, d=None, probe=True, seed=0):
    """Build a realization of the scalar rational expression ``e``.

    Parameters
    ----------
    e : NcExpr
    d : int, optional
        Number of variables of the pencil (defaults to the largest index in ``e``).
    probe : bool
        Refuse expressions that fail :func:`probe_nondegenerate`.

    Raises
    ------
    UnsupportedError
        For expressions containing ``exp`` or matricial blocks.
    DegenerateError
        If the nondegeneracy probe finds no point of definition.
    """
    for node in walk(e):
        if isinstance(node, Exp):
            raise UnsupportedError("exp is not rational and cannot be linearized")
        if isinstance(node, MatExpr):
            raise UnsupportedError("only scalar rational expressions can be linearized")
    d = max(d or 0, nvars(e), 1)
    if probe:
        report = probe_nondegenerate(e, seed=seed, d=d)
        if not report.ok:
            raise DegenerateError("expression looks degenerate (no point of definition found)", report)
    coeffs, b, c = _lin(e, d)
    return Realization(coeffs, b, c)


# --------------------------------------------------------------------------
# evaluation

def _expand(v, n):
    return np.kron(v, np.eye(n, dtype=np.complex128))


def realization_eval(r, x):
    """``(b (x) I)* L(X)^-1 (c (x) I)``.

    Raises
    ------
    PencilSingularError
        If ``L(X)`` is singular, i.e. ``X`` is outside the realization's domain.
    """
    x = as_tuple(x)
    lx = r.pencil(x)
    try:
        z = solve(lx, _expand(r.c, x.n))
    except SingularMatrixError as exc:
        raise PencilSingularError(f"pencil singular at this point: {exc}", pivot=exc.pivot) from None
    return _expand(r.b, x.n).conj().T @ z


def _bordered(r, x):
    n = x.n
    lx = r.pencil(x)
    bb, cc = _expand(r.b, n), _expand(r.c, n)
    kn = bb.shape[1]
    return np.block([[lx, cc], [-bb.conj().T, np.zeros((kn, kn), dtype=np.complex128)]])


@dataclass(frozen=True)
class DetRatio:
    bordered: complex
    pencil: complex
    ratio: complex


def det_ratio(r, x):
    """Determinants of the bordered pencil and of the pencil, and their ratio.

    The ratio equals ``det r(X)`` by the Schur complement formula.
    """
    x = as_tuple(x)
    lx = r.pencil(x)
    try:
        solve_inv(lx)
    except SingularMatrixError as exc:
        raise PencilSingularError(f"pencil singular at this point: {exc}", pivot=exc.pivot) from None
    dp = lu_det(_bordered(r, x))
    dq = lu_det(lx)
    return DetRatio(dp, dq, dp / dq)


def _entry(coeffs, a, b):
    terms = []
    if coeffs[0, a, b] != 0:
        terms.append(Const(coeffs[0, a, b]))
    for i in range(1, coeffs.shape[0]):
        z = coeffs[i, a, b]
        if z == 1:
            terms.append(Var(i))
        elif z != 0:
            terms.append(Prod((Const(z), Var(i))))
    if not terms:
        return Const(0.0)
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def pencil_expr(r):
    """The pencil ``L`` as a square matricial affine expression."""
    m = r.m
    return MatExpr(tuple(tuple(_entry(r.coeffs, a, b) for b in range(m)) for a in range(m)))


def bordered_expr(r):
    """The bordered pencil ``[[L, c], [-b*, 0]]`` as a matricial expression."""
    m, k = r.m, r.k
    rows = []
    for a in range(m):
        rows.append(
            tuple(_entry(r.coeffs, a, b) for b in range(m))
            + tuple(Const(r.c[a, j]) for j in range(k))
        )
    bstar = -r.b.conj().T
    for j in range(k):
        rows.append(tuple(Const(bstar[j, a]) for a in range(m)) + tuple(Const(0.0) for _ in range(k)))
    return MatExpr(tuple(rows))


def divisor_split(r, x):
    """``(div p(X), div q(X))`` for the bordered pencil ``p`` and the pencil ``q``.

    Their difference is the divisor of the realized rational function.
    """
    x = as_tuple(x)
    return divisor(bordered_expr(r), x), divisor(pencil_expr(r), x)


def block_inverse(a, b, c, d):
    """Inverse of ``[[A, B], [C, D]]`` assembled from the Schur complement of ``A``.

    ``S = D - C A^-1 B`` and the inverse is
    ``[[A^-1 + A^-1 B S^-1 C A^-1, -A^-1 B S^-1], [-S^-1 C A^-1, S^-1]]``.
    """
    ai = solve_inv(a)
    s = d - c @ ai @ b
    si = solve_inv(s)
    return np.block([
        [ai + ai @ b @ si @ c @ ai, -ai @ b @ si],
        [-si @ c @ ai, si],
    ])
