"""Noncommutative polynomial and rational expressions.

Grammar (whitespace is insignificant except inside complex literals)::

    expr    := term (('+' | '-') term)*
    term    := unary ('*' unary)*
    unary   := '-' unary | atom
    atom    := NUMBER | IMAG | '(' NUMBER ('+'|'-') IMAG ')'
             | 'x' INDEX | 'inv' '(' expr ')' | 'exp' '(' expr ')'
             | '(' expr ')' | '[' row (',' row)* ']'
    row     := '[' expr (',' expr)* ']'

``IMAG`` is a number immediately followed by ``i`` (``3.5i``), or a bare
``i``. A parenthesised ``(1+2i)`` written without internal whitespace is a
single complex literal; ``1 + 2i`` is a sum of two literals. Both denote
the same value. A minus sign directly in front of a literal is folded into
the literal. Binary ``a - b`` becomes ``Sum(a, Neg(b))``.

Products are never reordered. Scalars combined with matricial blocks act as
scalar multiples of the identity, so ``1 + x1*x2`` means ``I + X1 X2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ParseError, StructureError

__all__ = [
    "NcExpr",
    "Var",
    "Const",
    "Sum",
    "Prod",
    "Neg",
    "Inv",
    "Exp",
    "MatExpr",
    "ExprClass",
    "ProbeVerdict",
    "parse",
    "to_string",
    "classify",
    "block_shape",
    "nvars",
    "depth",
    "is_polynomial",
    "to_json",
    "from_json",
    "probe_nondegenerate",
    "random_expr",
]


class NcExpr:
    """Base class of expression nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def __add__(self, other):
        return Sum((self, _lift(other)))

    def __radd__(self, other):
        return Sum((_lift(other), self))

    def __sub__(self, other):
        return Sum((self, Neg(_lift(other))))

    def __rsub__(self, other):
        return Sum((_lift(other), Neg(self)))

    def __mul__(self, other):
        return Prod((self, _lift(other)))

    def __rmul__(self, other):
        return Prod((_lift(other), self))

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return to_string(self)


def _lift(x):
    if isinstance(x, NcExpr):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return Const(complex(x))
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


@dataclass(frozen=True, eq=True, repr=True)
class Var(NcExpr):
    index: int  # 1-based

    def __post_init__(self):
        if int(self.index) < 1:
            raise StructureError("variable indices start at 1")


@dataclass(frozen=True, eq=True, repr=True)
class Const(NcExpr):
    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise StructureError("constants must be finite")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True, eq=True, repr=True)
class Sum(NcExpr):
    children: Tuple[NcExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise StructureError("Sum needs at least two terms")


@dataclass(frozen=True, eq=True, repr=True)
class Prod(NcExpr):
    children: Tuple[NcExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise StructureError("Prod needs at least two factors")


@dataclass(frozen=True, eq=True, repr=True)
class Neg(NcExpr):
    child: NcExpr


@dataclass(frozen=True, eq=True, repr=True)
class Inv(NcExpr):
    child: NcExpr


@dataclass(frozen=True, eq=True, repr=True)
class Exp(NcExpr):
    child: NcExpr


@dataclass(frozen=True, eq=True, repr=True)
class MatExpr(NcExpr):
    """A grid of expressions. Ragged grids can be built but fail :func:`classify`."""

    rows: Tuple[Tuple[NcExpr, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        if not self.rows or any(not r for r in self.rows):
            raise StructureError("matricial expressions need nonempty rows")

    @property
    def shape(self):
        if len({len(r) for r in self.rows}) != 1:
            raise StructureError("ragged matricial grid")
        return len(self.rows), len(self.rows[0])


def children(e):
    """Direct subexpressions of ``e`` in order."""
    if isinstance(e, (Sum, Prod)):
        return e.children
    if isinstance(e, (Neg, Inv, Exp)):
        return (e.child,)
    if isinstance(e, MatExpr):
        return tuple(c for row in e.rows for c in row)
    return ()


def walk(e):
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def nvars(e):
    """Largest variable index occurring in ``e`` (0 for constant expressions)."""
    return max((n.index for n in walk(e) if isinstance(n, Var)), default=0)


def depth(e):
    """Syntactic depth; leaves have depth 1."""
    kids = children(e)
    return 1 + max((depth(c) for c in kids), default=0)


def is_polynomial(e):
    return not any(isinstance(n, (Inv, Exp)) for n in walk(e))


# --------------------------------------------------------------------------
# lexer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*(),\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'num', 'imag', 'ident', 'op', 'end'
    text: str
    pos: int
    line: int
    col: int


def _tokenize(text):
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        if m.group("ws"):
            chunk = m.group("ws")
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
        elif m.group("num"):
            kind = "imag" if m.group("imag") else "num"
            toks.append(_Tok(kind, m.group("num"), pos, line, col))
        elif m.group("ident"):
            word = m.group("ident")
            if word == "i":
                toks.append(_Tok("imag", "1", pos, line, col))
            else:
                toks.append(_Tok("ident", word, pos, line, col))
        else:
            toks.append(_Tok("op", m.group("op"), pos, line, col))
        pos = m.end()
    toks.append(_Tok("end", "", pos, line, pos - line_start + 1))
    return toks


_VAR_RE = re.compile(r"x([1-9][0-9]*)$")


class _Parser:
    def __init__(self, text, d):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.d = d

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, tok.line, tok.col)

    def expect(self, text):
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            found = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def parse(self):
        e = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected {self.peek().text!r}")
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            t = self.term()
            terms.append(Neg(t) if op == "-" else t)
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self):
        factors = [self.unary()]
        while self.peek().kind == "op" and self.peek().text == "*":
            self.next()
            factors.append(self.unary())
        return factors[0] if len(factors) == 1 else Prod(tuple(factors))

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            lit = self._literal()
            if lit is not None:
                return Const(-lit.value)
            return Neg(self.unary())
        return self.atom()

    def _literal(self):
        """Consume a literal atom if one starts here, else return None."""
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return Const(float(tok.text))
        if tok.kind == "imag":
            self.next()
            return Const(1j * float(tok.text))
        if self._complex_literal_ahead():
            self.next()
            re_tok, sign, im_tok = self.next(), self.next(), self.next()
            self.next()
            im = float(im_tok.text) * (1 if sign.text == "+" else -1)
            return Const(complex(float(re_tok.text), im))
        return None

    def _complex_literal_ahead(self):
        t = [self.peek(k) for k in range(5)]
        if not (
            t[0].kind == "op" and t[0].text == "("
            and t[1].kind == "num"
            and t[2].kind == "op" and t[2].text in "+-"
            and t[3].kind == "imag"
            and t[4].kind == "op" and t[4].text == ")"
        ):
            return False
        # the literal must be written without internal whitespace
        start, stop = t[0].pos, t[4].pos
        return not any(ch.isspace() for ch in self.text[start:stop])

    def atom(self):
        lit = self._literal()
        if lit is not None:
            return lit
        tok = self.peek()
        if tok.kind == "ident":
            self.next()
            if tok.text in ("inv", "exp"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Inv(arg) if tok.text == "inv" else Exp(arg)
            m = _VAR_RE.match(tok.text)
            if m is None:
                raise self.error(f"unknown identifier {tok.text!r}", tok)
            idx = int(m.group(1))
            if self.d is not None and idx > self.d:
                raise self.error(f"variable x{idx} out of range for d={self.d}", tok)
            return Var(idx)
        if tok.kind == "op" and tok.text == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "op" and tok.text == "[":
            return self.matrix()
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")

    def matrix(self):
        self.expect("[")
        rows = [self.row()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.next()
            rows.append(self.row())
        self.expect("]")
        return MatExpr(tuple(rows))

    def row(self):
        self.expect("[")
        entries = [self.expr()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.next()
            entries.append(self.expr())
        self.expect("]")
        return tuple(entries)


def parse(text, d=None):
    """Parse an expression string.

    Parameters
    ----------
    text : str
        Expression in the grammar of this module.
    d : int, optional
        Number of variables; indices above ``d`` are rejected.

    Raises
    ------
    ParseError
        On syntax errors and out-of-range variables.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 1, 1)
    return _Parser(text, d).parse()


# --------------------------------------------------------------------------
# printer

_SUM, _TERM, _ATOM = 0, 1, 2


def _fmt_real(x):
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _fmt_const(c):
    re_, im = c.real, c.imag
    if im == 0.0:
        return _fmt_real(re_) if re_ >= 0 else f"(-{_fmt_real(-re_)})"
    if re_ == 0.0:
        return f"{_fmt_real(im)}i" if im > 0 else f"(-{_fmt_real(-im)}i)"
    if re_ < 0:
        return f"(-{_fmt_const(-c)})"
    sign = "+" if im > 0 else "-"
    return f"({_fmt_real(re_)}{sign}{_fmt_real(abs(im))}i)"


def _show(e, prec):
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Neg):
        return f"-({_show(e.child, _SUM)})"
    if isinstance(e, Inv):
        return f"inv({_show(e.child, _SUM)})"
    if isinstance(e, Exp):
        return f"exp({_show(e.child, _SUM)})"
    if isinstance(e, MatExpr):
        return "[" + ", ".join(
            "[" + ", ".join(_show(c, _SUM) for c in row) + "]" for row in e.rows
        ) + "]"
    if isinstance(e, Prod):
        s = "*".join(_show(c, _ATOM) for c in e.children)
        return s if prec <= _TERM else f"({s})"
    if isinstance(e, Sum):
        parts = [_show(e.children[0], _TERM)]
        for c in e.children[1:]:
            if isinstance(c, Neg):
                parts.append(f" - {_show(c.child, _TERM)}")
            else:
                parts.append(f" + {_show(c, _TERM)}")
        s = "".join(parts)
        return s if prec <= _SUM else f"({s})"
    raise StructureError(f"unknown node {e!r}")


def to_string(e):
    """Print ``e`` so that ``parse(to_string(e)) == e`` for parsed ASTs."""
    return _show(e, _SUM)


# --------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class ExprClass:
    is_polynomial: bool
    is_rational: bool
    is_matricial: bool
    block_dims: Tuple[int, int] | None

    @property
    def is_square(self):
        return self.block_dims is None or self.block_dims[0] == self.block_dims[1]


def _prod_promotions(shapes):
    """Promotion factors for a chain of block shapes, and the result shape.

    A ``(1, 1)`` factor next to a ``(p, q)`` factor is promoted to
    ``I_k (x) value`` with ``k`` matching its neighbour.
    """
    first = next((j for j, s in enumerate(shapes) if s != (1, 1)), None)
    if first is None:
        return [1] * len(shapes), (1, 1)
    ks = [1] * len(shapes)
    p0, q = shapes[first]
    for j in range(first):
        ks[j] = p0
    for j in range(first + 1, len(shapes)):
        s = shapes[j]
        if s == (1, 1):
            ks[j] = q
        elif s[0] != q:
            raise StructureError(f"block shapes do not chain: {q} columns vs {s[0]} rows")
        else:
            q = s[1]
    return ks, (p0, q)


def _sum_target(shapes):
    big = {s for s in shapes if s != (1, 1)}
    if len(big) > 1:
        raise StructureError(f"cannot add blocks of shapes {sorted(big)}")
    if not big:
        return (1, 1)
    (target,) = big
    if target[0] != target[1] and (1, 1) in shapes:
        raise StructureError("a scalar can only be added to a square block")
    return target


def _matexpr_layout(row_shapes):
    """Row heights and column widths of a grid of entry shapes."""
    heights = []
    for r in row_shapes:
        hs = {s[0] for s in r}
        if len(hs) != 1:
            raise StructureError("entries in a block row have different heights")
        heights.append(hs.pop())
    widths = []
    for j in range(len(row_shapes[0])):
        ws = {r[j][1] for r in row_shapes}
        if len(ws) != 1:
            raise StructureError("entries in a block column have different widths")
        widths.append(ws.pop())
    return heights, widths


def block_shape(e):
    """Block dimensions ``(p, q)`` of the value of ``e`` (scalars are ``(1, 1)``)."""
    if isinstance(e, (Var, Const)):
        return (1, 1)
    if isinstance(e, Neg):
        return block_shape(e.child)
    if isinstance(e, (Inv, Exp)):
        s = block_shape(e.child)
        if s[0] != s[1]:
            raise StructureError(f"{type(e).__name__.lower()} of a non-square {s} block")
        return s
    if isinstance(e, Sum):
        return _sum_target([block_shape(c) for c in e.children])
    if isinstance(e, Prod):
        return _prod_promotions([block_shape(c) for c in e.children])[1]
    if isinstance(e, MatExpr):
        e.shape  # raises on ragged grids
        grid = [[block_shape(c) for c in row] for row in e.rows]
        heights, widths = _matexpr_layout(grid)
        return (sum(heights), sum(widths))
    raise StructureError(f"unknown node {e!r}")


def classify(e):
    """Syntactic classification of ``e``.

    Raises
    ------
    StructureError
        On ragged grids or incompatible block shapes.
    """
    dims = block_shape(e)
    matricial = any(isinstance(n, MatExpr) for n in walk(e))
    poly = is_polynomial(e)
    rational = not any(isinstance(n, Exp) for n in walk(e))
    return ExprClass(poly, rational, matricial, dims if matricial else None)


# --------------------------------------------------------------------------
# JSON export

def to_json(e):
    """AST as ``{"kind": ..., "children": [...]}`` plus leaf payloads."""
    if isinstance(e, Var):
        return {"kind": "var", "index": e.index, "children": []}
    if isinstance(e, Const):
        return {"kind": "const", "value": [e.value.real, e.value.imag], "children": []}
    if isinstance(e, MatExpr):
        return {
            "kind": "mat",
            "children": [[to_json(c) for c in row] for row in e.rows],
        }
    kind = type(e).__name__.lower()
    return {"kind": kind, "children": [to_json(c) for c in children(e)]}


_UNARY = {"neg": Neg, "inv": Inv, "exp": Exp}


def from_json(obj):
    kind = obj["kind"]
    if kind == "var":
        return Var(int(obj["index"]))
    if kind == "const":
        re_, im = obj["value"]
        return Const(complex(re_, im))
    if kind == "mat":
        return MatExpr(tuple(tuple(from_json(c) for c in row) for row in obj["children"]))
    kids = [from_json(c) for c in obj["children"]]
    if kind in _UNARY:
        if len(kids) != 1:
            raise StructureError(f"{kind} takes one child")
        return _UNARY[kind](kids[0])
    if kind == "sum":
        return Sum(tuple(kids))
    if kind == "prod":
        return Prod(tuple(kids))
    raise StructureError(f"unknown node kind {kind!r}")


# --------------------------------------------------------------------------
# nondegeneracy probe

@dataclass(frozen=True)
class ProbeVerdict:
    ok: bool
    witness: object = None  # MatrixTuple where every inverse was defined
    size: int | None = None
    trial: int | None = None
    attempts: int = 0

    @property
    def verdict(self):
        return "ok" if self.ok else "degenerate-suspect"


def probe_nondegenerate(e, sizes=(1, 2, 3, 4), trials=32, seed=0, d=None):
    """Look for a point where ``e`` is defined.

    Evaluates ``e`` at ``trials`` random tuples of each size. The first
    point at which every inverse has a nonsingular argument is returned as
    a witness. Failing to find one is evidence of degeneracy, never proof.
    """
    from .evalad import evaluate
    from .errors import SingularMatrixError
    from .matcore import random_tuple

    if trials < 1:
        raise ValueError("trials must be at least 1")
    d = max(d or 0, nvars(e), 1)
    rng = np.random.default_rng(seed)
    attempts = 0
    for trial in range(trials):
        for n in sizes:
            x = random_tuple(n, d, rng)
            attempts += 1
            try:
                evaluate(e, x)
            except SingularMatrixError:
                continue
            return ProbeVerdict(True, x, n, trial, attempts)
    return ProbeVerdict(False, None, None, None, attempts)


# --------------------------------------------------------------------------
# random expressions for testing

def random_expr(rng, d, max_depth, inv=True, exp=False):
    """Random scalar expression in ``d`` variables of depth at most ``max_depth``.

    Inverses are only taken of ``c + child`` with ``|c| >= 1`` to keep
    random evaluations away from the zero set; exponentials take a scaled
    argument.
    """
    rng = np.random.default_rng(rng)

    def coef():
        return Const(complex(np.round(rng.normal(), 3), np.round(rng.normal(), 3)))

    def leaf():
        if rng.random() < 0.8:
            return Var(int(rng.integers(1, d + 1)))
        return coef()

    def build(level):
        if level <= 1:
            return leaf()
        ops = ["sum", "prod", "prod", "neg"]
        if inv:
            ops.append("inv")
        if exp:
            ops.append("exp")
        op = ops[int(rng.integers(len(ops)))]
        if op == "sum":
            return Sum((build(level - 1), build(level - 1)))
        if op == "prod":
            return Prod((build(level - 1), build(level - 1)))
        if op == "neg":
            return Neg(build(level - 1))
        if op == "inv":
            shift = Const(complex(2.0 + rng.random(), 0.0))
            return Inv(Sum((shift, build(level - 1))))
        return Exp(Prod((Const(0.3), build(level - 1))))

    return build(max_depth)
