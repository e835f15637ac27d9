"""Geodesic caps and the boundary-form gluing test.
=====================================================

A cap of geodesic radius R inside the round sphere of radius r has boundary
sphere radius rho = r sin(R/r); its boundary second fundamental form is
(1/r) cot(R/r) per unit direction.  Two caps over the same boundary sphere
glue into a positive-Ricci manifold exactly when cos(eps1) + cos(eps2) >= 0.
"""

import math

import numpy as np

from plumbric import (cap_boundary_form, cap_from_angular, cap_from_geodesic,
                      perelman_form_check)

# A quarter cap of the unit 4-sphere and its two parametrizations.
cap = cap_from_geodesic(r=1.0, R=math.pi / 4, p=4)
print(f"quarter cap: rho = {cap.rho:.6f}, eps = {cap.eps:.6f}")
back = cap_from_angular(cap.eps, cap.rho, 4)
print(f"round trip reproduces (r, R) = ({back.r:.12f}, {back.R:.12f})")

form = cap_boundary_form(cap)
print(f"boundary form coefficient {form.blocks[0][0]:.6f} "
      f"on {form.blocks[0][1]} directions (convex: properly inside a hemisphere)")

# Sweep the complementary-pair family: the gluing flips exactly where the
# cosine sum changes sign.
print("\n eps1   eps2    cos-sum   glues?")
rho = 1.0
for eps1 in np.linspace(0.6, 2.6, 9):
    eps2 = 2.2
    c1 = cap_from_angular(eps1, rho, 4)
    c2 = cap_from_angular(eps2, rho, 4)
    ok = perelman_form_check(cap_boundary_form(c1), cap_boundary_form(c2))
    print(f" {eps1:.3f}  {eps2:.3f}  {math.cos(eps1) + math.cos(eps2): .4f}   {ok}")
