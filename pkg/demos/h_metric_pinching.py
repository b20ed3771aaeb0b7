"""
Pinched metrics on Heintze groups
=================================

Shrinking the upper layers of a Carnot algebra makes its brackets small
(small Gromov value).  Adjoining a derivation A that acts by i on layer i then
gives a negatively curved solvable group whose curvature lies in [-s^2, -1].
"""

import numpy as np

from carnotcurv import build_h_metric, heintze_extension, heis, pinching_report, sc_nilradical

###############################################################################
# Quaternionic Heisenberg algebra, step 2.

hm = build_h_metric(heintze_extension(heis("QU", 1)), eps=1 / 40)
print("layer scales:", hm.scales)
print("certified Gromov value:", hm.gromov.certified_upper)
rep = pinching_report(hm.algebra, hm.gram, samples=100_000, seed=42)
print(f"K in [{rep.min_K:.6f}, {rep.max_K:.6f}]")

###############################################################################
# Upper-triangular 4x4 matrices, step 3.  The vertical planes (A, e) give the
# extreme values -1, -4, -9 exactly.

hm = build_h_metric(heintze_extension(sc_nilradical(3)), eps=1 / 60)
rep = pinching_report(hm.algebra, hm.gram, samples=100_000, seed=42)
for row in rep.vertical:
    print(f"K(A, {row['label']}) = {row['K']:+.12f}")
print(f"K in [{rep.min_K:.6f}, {rep.max_K:.6f}], pinching ratio {rep.max_K / rep.min_K:.4f}")

###############################################################################
# The identity metric happens to stay in [-9, -1] as well, but shrinking the
# first layer (large brackets relative to the vectors) breaks the bound and
# even produces positive curvature.

h = heintze_extension(sc_nilradical(3))
for s1 in (1.0, 0.5, 0.3):
    g = np.diag([s1**2] * 3 + [1.0] * 4)
    rep = pinching_report(h, g, samples=20_000, seed=0)
    print(f"|V1 basis| = {s1}: K in [{rep.min_K:.3f}, {rep.max_K:.3f}]")
