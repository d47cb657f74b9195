"""
Determinant identities on random matrices
=========================================

Two classical facts that the rest of the package leans on: det(1 + XY)
equals det(1 + YX) even though XY and YX differ, and det e^A = e^{tr A}.
"""

import numpy as np

from ncfun import lu_det, parse, random_tuple, tracial_eval
from ncfun.matcore import expm

# a random pair of 4x4 complex matrices, reproducible from the seed
x, y = random_tuple(4, 2, seed=1)
eye = np.eye(4)

print("XY == YX ?", np.allclose(x @ y, y @ x))
print("det(1+XY) =", lu_det(eye + x @ y))
print("det(1+YX) =", lu_det(eye + y @ x))

# the same statement through expressions: log det agrees up to 2 pi i
pt = random_tuple(5, 2, seed=2)
l1 = tracial_eval(parse("1 + x1*x2"), pt, kind="logdet")
l2 = tracial_eval(parse("1 + x2*x1"), pt, kind="logdet")
print("logdet difference / 2 pi i:", (l1 - l2) / (2j * np.pi))

# det e^A against e^{tr A}
a = 0.5 * random_tuple(3, 1, seed=3)[0]
print("det e^A   =", lu_det(expm(a)))
print("e^{tr A}  =", np.exp(np.trace(a)))

# e^X e^Y is not e^{X+Y}, but its log det still is tr X + tr Y mod 2 pi i
x, y = 0.5 * random_tuple(3, 2, seed=4)
ld = tracial_eval(parse("exp(x1)*exp(x2)"), [x, y], kind="logdet")
print("logdet(e^X e^Y) - tr X - tr Y =", ld - np.trace(x) - np.trace(y))
