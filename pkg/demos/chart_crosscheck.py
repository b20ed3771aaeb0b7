"""
Algebra versus coordinates
==========================

In exponential coordinates on N x R+ a horocyclic metric reads
``sum_i y^(-2i) g0|V_i + dy^2/y^2``.  Differentiating that tensor numerically
must reproduce the curvature computed from structure constants alone.
"""

import numpy as np

from carnotcurv import build_h_metric, cross_check_base_point, heintze_extension, heis, sc_nilradical
from carnotcurv.chart import chart_sectional, horocyclic_field

###############################################################################
# Real hyperbolic plane: the upper half-plane in disguise.

h = heintze_extension(heis("R", 1))
field = horocyclic_field(h, np.eye(1))
for p in ([0.0, 1.0], [2.0, 0.3]):
    print("RH^2 at", p, "K =", chart_sectional(field, p, [1, 0], [0, 1]))

###############################################################################
# Heisenberg H-metric: every basis plane at the base point.

hm = build_h_metric(heintze_extension(heis("C", 1)))
rep = cross_check_base_point(hm.algebra, hm.gram[:3, :3])
for row in rep.rows:
    print(f"{' '.join(row['plane']):>16}: chart {row['K_chart']:+.8f}  algebra {row['K_algebraic']:+.8f}")

###############################################################################
# A generic layered metric on a 3-step group.

rng = np.random.default_rng(1)
g0 = np.eye(6)
for lay in sc_nilradical(3).strat.layers:
    m = rng.standard_normal((len(lay), len(lay)))
    g0[np.ix_(lay, lay)] = m @ m.T + np.eye(len(lay))
rep = cross_check_base_point(heintze_extension(sc_nilradical(3)), g0)
print("sc(3) generic layered metric, max deviation:", rep.max_deviation)
