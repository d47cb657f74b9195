"""
Which closed forms are divisors?
================================

A closed free 1-form g is a divisor only if n phi_g(gamma) / 2 pi i is an
integer on every loop. inv(x1) passes on the unit circle; inv(x1)/3 fails,
and the failing loop is reported as a witness.
"""

from ncfun import DomainSpec, GermSpec, integrality_test
from ncfun.tracial import circle_loop, diag_rotation_loop, increment_matrix

loops = [circle_loop(), diag_rotation_loop(3, [1, 1, -1])]
for text in ("inv(x1)", f"{1 / 3!r}*inv(x1)"):
    v = integrality_test(GermSpec.closed_form([text]), loops, DomainSpec.gl())
    print(f"{text}: {v.verdict}, ratios {[round(r.real, 9) for r in v.ratios]}, witnesses {v.witnesses}")

# with two forbidden values, two germs separate two loops
dom = DomainSpec((0j, 1 + 0j))
loops = [circle_loop(radius=0.5), circle_loop(radius=0.5, center=1.0, phase=0.5)]
germs = [GermSpec.logdet("x1"), GermSpec.logdet("x1 - 1")]
print(increment_matrix(germs, loops, dom).round(12))
