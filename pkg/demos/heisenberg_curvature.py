"""
Curvature of the Heisenberg group
=================================

The complex Heisenberg algebra has basis X, Y, z with [X, Y] = z.  With the
standard metric its sectional curvatures take both signs: horizontal planes
are negatively curved, planes containing the centre are positively curved,
and in between there are flat planes.
"""

import numpy as np

from carnotcurv import heis, milnor_sectional, pinching_report, sectional

alg = heis("C", 1)
g = np.eye(3)
X, Y, z = np.eye(3)

###############################################################################
# The tensor path and Milnor's structure-constant sum agree on basis planes.

for (a, b), name in [((0, 1), "X,Y"), ((0, 2), "X,z"), ((1, 2), "Y,z")]:
    k = sectional(alg, g, np.eye(3)[a], np.eye(3)[b])
    print(f"K({name}) = {k:+.4f}   Milnor: {milnor_sectional(alg, g, a, b):+.4f}")

###############################################################################
# Sampling 10^4 random planes gives the sign census.  The flat plane is found
# by root-finding between the most negative and most positive samples.

rep = pinching_report(alg, g, samples=10_000, seed=42)
print("range:", rep.min_K, rep.max_K)
print("census:", rep.census)
print("flat plane:", np.round(rep.zero_witness["u"], 4), np.round(rep.zero_witness["v"], 4))
