"""
Finite-difference check of the Bergman metric
=============================================

The Bergman metric on the Siegel domain (x, y, z, t), z > 0, is a model of
complex hyperbolic 2-space.  We compare finite-difference sectional curvatures
of the six coordinate planes against closed forms.

The tensor as usually printed has holomorphic curvature -1 while the printed
curvature formulas assume -4, and the formula for the (y, z) plane has x and
y swapped.  Both discrepancies show up clearly here.
"""

from carnotcurv import bergman_ch2_field, verify_bergman

for scale, forms in [(1.0, "printed"), (0.25, "printed"), (0.25, "corrected")]:
    rep = verify_bergman(field=bergman_ch2_field(scale), forms=forms)
    print(f"scale {scale:<5} forms {forms:<10} max deviation {rep.max_deviation:.2e}  ok={rep.ok}")

###############################################################################
# Per-plane view at one point with the normalized tensor.

rep = verify_bergman([[0.8, -1.1, 0.7, 0.3]], field=bergman_ch2_field(0.25), forms="printed")
for row in rep.rows:
    print(f"{row['plane']:>6}: numeric {row['K_numeric']:+.6f}  formula {row['K_closed_form']:+.6f}")
