"""
Linear pencil realizations
==========================

Every nondegenerate rational expression r can be written b* L^-1 c with L an
affine pencil. Bordering L gives a second pencil p, and det r = det p / det L,
so the divisor of r splits as div p - div L.
"""

import numpy as np

from ncfun import det_ratio, divisor, divisor_split, evaluate, linearize, parse, random_tuple, realization_eval
from ncfun.matcore import lu_det

r_expr = parse("inv(1 - x1*x2)")
r = linearize(r_expr)
print("pencil size m =", r.m, "with", r.d, "variables")

x = random_tuple(3, 2, seed=5)
value = evaluate(r_expr, x).value
print("L(X) is", r.pencil(x).shape, "; b* L^-1 c == r(X):", np.allclose(realization_eval(r, x), value))

dr = det_ratio(r, x)
print("det p / det L =", dr.ratio)
print("det r(X)      =", lu_det(value))

p, q = divisor_split(r, x)
print("div p - div L vs div r:", (p - q).max_abs_diff(divisor(r_expr, x)))

# degenerate expressions are refused: the argument of inv is identically zero
try:
    linearize(parse("inv(x1*x2 - x1*x2)"))
except ValueError as exc:
    print("refused:", exc)
