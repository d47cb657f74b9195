"""
Principal divisors by reverse-mode differentiation
==================================================

The divisor of a free function f is the tuple g with
tr(sum_i H_i g_i) = tr(Df(X)[H] f(X)^-1) for every direction H. One
adjoint pass seeded with f(X)^-1 computes it; d n^2 forward passes give
an independent check.
"""

import numpy as np

from ncfun import divisor, jacobi_pairing, parse, random_tuple
from ncfun.matcore import solve_inv

f = parse("1 + x1*x2")
x = random_tuple(3, 2, seed=0)
a, b = x

g = divisor(f, x)
w = solve_inv(np.eye(3) + a @ b)
print("g_1 matches Y(1+XY)^-1:", np.allclose(g[0], b @ w))
print("g_2 matches (1+XY)^-1 X:", np.allclose(g[1], w @ a))

# 1 + x2*x1 is a different function with the same divisor
print("div(1+x1*x2) == div(1+x2*x1):", g.max_abs_diff(divisor(parse("1 + x2*x1"), x)) < 1e-12)

# forward basis extraction agrees with the adjoint pass
e = parse("inv(2 - x1*x2) * exp(x2) + x1")
rev, fwd = divisor(e, x), divisor(e, x, method="forward")
print("reverse vs forward:", rev.max_abs_diff(fwd))

# the defining pairing along a random direction
h = random_tuple(3, 2, seed=9)
print("pairing:", rev.pairing(h), "vs", jacobi_pairing(e, x, h))

# products add divisors; exp contributes the identity
print("div exp(x1) =\n", np.round(divisor(parse("exp(x1)"), x)[0], 12))
