"""
Monodromy of log det along loops
================================

Continuing log det f around a loop of n x n matrices changes it by an
increment; dividing by n gives c, and n c always lies in 2 pi i Z. Loops that
are not direct powers of scalar loops produce fractional windings such as 1/2.
"""

import numpy as np

from ncfun import DomainSpec, GermSpec, continue_germ, loop_phi, quantization_check
from ncfun.tracial import (
    circle_loop,
    concatenate,
    diag_rotation_loop,
    unipotent_loop_2x2,
    random_gl_loop,
)

logdet = GermSpec.logdet("x1")
gl = DomainSpec.gl()

print("unit circle:", continue_germ(logdet, circle_loop(), gl).increment)

half = diag_rotation_loop(2, 1)
c = loop_phi(logdet, half, gl)
print("diag(e^{2 pi i t}, 1): c / 2 pi i =", c / (2j * np.pi))

# the unipotent 2x2 loop is not exp of a loop, yet its increment vanishes
print("[[e^{2 pi i t}, 1], [0, e^{-2 pi i t}]]:", continue_germ(logdet, unipotent_loop_2x2(), gl).increment)

# increments add under concatenation, in either order
l1, w1 = random_gl_loop(2, seed=1)
l2, w2 = random_gl_loop(3, seed=2)
a, b = loop_phi(logdet, l1, gl), loop_phi(logdet, l2, gl)
print("phi(l1 l2) - phi(l1) - phi(l2):", loop_phi(logdet, concatenate(l1, l2), gl) - a - b)

report = quantization_check([(a, l1.n), (b, l2.n), (c, 2)])
for entry in report.entries:
    print(f"n={entry.n}: winding ratio {entry.ratio}, residual {entry.residual:.1e}")
