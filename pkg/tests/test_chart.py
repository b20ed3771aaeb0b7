import numpy as np
import pytest

from carnotcurv import build_h_metric, heintze_extension
from carnotcurv.catalog import abelian, heis, sc_nilradical
from carnotcurv.chart import (
    BERGMAN_PLANES,
    DomainError,
    MetricField,
    bergman_ch2_field,
    bergman_closed_forms,
    chart_sectional,
    christoffel,
    cross_check_base_point,
    default_bergman_points,
    euclidean_field,
    horocyclic_field,
    maurer_cartan_frame,
    upper_half_plane,
    verify_bergman,
)

from conftest import random_layered_gram


def test_euclidean_christoffels_vanish():
    assert np.all(christoffel(euclidean_field(3), np.zeros(3)) == 0.0)


def test_half_plane_christoffels():
    gam = christoffel(upper_half_plane(), [0.0, 1.0])
    # Gamma[k, i, j] with index 0 = x, 1 = y
    assert gam[0, 0, 1] == pytest.approx(-1, abs=1e-5)
    assert gam[1, 0, 0] == pytest.approx(1, abs=1e-5)
    assert gam[1, 1, 1] == pytest.approx(-1, abs=1e-5)
    assert gam[0, 0, 0] == pytest.approx(0, abs=1e-12)


def test_half_plane_second_order_convergence():
    exact = np.zeros((2, 2, 2))
    exact[0, 0, 1] = exact[0, 1, 0] = -1.0
    exact[1, 0, 0] = 1.0
    exact[1, 1, 1] = -1.0
    err = [np.max(np.abs(christoffel(upper_half_plane(), [0.3, 1.0], h) - exact)) for h in (0.02, 0.01)]
    assert np.log2(err[0] / err[1]) >= 1.8


@pytest.mark.parametrize("p", [[0.0, 1.0], [2.0, 0.5], [-1.0, 3.0]])
def test_half_plane_curvature(p):
    assert chart_sectional(upper_half_plane(), p, [1, 0], [0, 1]) == pytest.approx(-1, abs=1e-6)


def test_domain_checks():
    with pytest.raises(DomainError):
        upper_half_plane()([0.0, -1.0])
    with pytest.raises(DomainError):
        christoffel(bergman_ch2_field(), [0, 0, 1e-3, 0], 1e-3)
    with pytest.raises(DomainError):
        chart_sectional(upper_half_plane(), [0.0, 1.0], [1, 0], [2, 0])


# --- Bergman --------------------------------------------------------------------------------


def test_bergman_at_base_point():
    np.testing.assert_array_equal(bergman_ch2_field()([0, 0, 1, 1]), np.diag([4.0, 4.0, 1.0, 1.0]))


def test_bergman_symmetric_and_positive(rng):
    field = bergman_ch2_field()
    for p in default_bergman_points(20):
        g = field(p)
        np.testing.assert_array_equal(g, g.T)
        np.linalg.cholesky(g)
    g = field([0.3, -0.2, 1e-8, 0.0])
    assert np.all(np.isfinite(g))
    np.linalg.cholesky(g)


def test_default_points_in_box():
    pts = default_bergman_points(20)
    assert pts.shape == (20, 4)
    assert np.all(np.abs(pts[:, :2]) <= 2) and np.all((pts[:, 2:] >= 0.5) & (pts[:, 2:] <= 4))
    np.testing.assert_array_equal(pts, default_bergman_points(20))


def test_printed_tensor_curvatures_are_quarter_of_closed_forms():
    # the tensor as printed has holomorphic curvature -1, a factor 4 off the formulas
    field = bergman_ch2_field()
    p = np.array([0.7, -0.4, 1.3, 0.2])
    closed = bergman_closed_forms(p, "corrected")
    eye = np.eye(4)
    for a, b in BERGMAN_PLANES:
        k = chart_sectional(field, p, eye[a], eye[b], richardson=True)
        assert k == pytest.approx(closed[(a, b)] / 4, abs=1e-7)


@pytest.mark.parametrize("p", [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 1.0, 2.5], [1.2, -0.7, 0.8, -1.0]])
def test_normalized_bergman_constant_planes(p):
    field = bergman_ch2_field(0.25)
    eye = np.eye(4)
    assert chart_sectional(field, p, eye[0], eye[3], richardson=True) == pytest.approx(-1, abs=1e-6)
    assert chart_sectional(field, p, eye[2], eye[3], richardson=True) == pytest.approx(-4, abs=1e-6)


def test_closed_forms_at_axis_point():
    closed = bergman_closed_forms([0, 0, 1, 0.7])
    assert closed[(0, 1)] == -4.0
    assert closed[(0, 2)] == -1.0


def test_printed_and_corrected_forms_differ_only_in_yz():
    p = [0.9, 0.1, 1.0, 0.0]
    printed, corrected = bergman_closed_forms(p), bergman_closed_forms(p, "corrected")
    assert [k for k in printed if printed[k] != corrected[k]] == [(1, 2)]
    with pytest.raises(ValueError):
        bergman_closed_forms(p, "other")


def test_verify_bergman_normalized_corrected():
    rep = verify_bergman(field=bergman_ch2_field(0.25), forms="corrected")
    assert rep.ok and rep.max_deviation <= 1e-5
    assert len(rep.rows) == 20 * 6


def test_verify_bergman_flags_corrupted_field():
    base = bergman_ch2_field(0.25)

    def corrupted(p):
        g = base.eval(p).copy()
        g[0, 0] *= 1.01
        return g

    field = MetricField(4, corrupted, base.domain, "corrupted")
    rep = verify_bergman(field=field, forms="corrected")
    assert not rep.ok


# --- horocyclic field -------------------------------------------------------------------------


def test_maurer_cartan_abelian():
    np.testing.assert_array_equal(maurer_cartan_frame(abelian(3), [1.0, 2.0, 3.0]), np.eye(3))


def test_maurer_cartan_heis():
    h = heis("C", 1)
    x = np.array([1.0, 0.0, 0.0])
    ad = h.constants.ad(x)
    assert np.all(ad @ ad == 0)
    np.testing.assert_array_equal(maurer_cartan_frame(h, x), np.eye(3) - 0.5 * ad)


def test_maurer_cartan_truncation_exact(rng):
    sc = sc_nilradical(3)
    x = rng.standard_normal(6)
    ad = sc.constants.ad(x)
    assert np.max(np.abs(np.linalg.matrix_power(ad, 3))) <= 1e-12


def test_horocyclic_base_point(rng):
    carnot = sc_nilradical(3)
    g0 = random_layered_gram(rng, carnot)
    field = horocyclic_field(heintze_extension(carnot), g0)
    expect = np.zeros((7, 7))
    expect[:6, :6] = g0
    expect[6, 6] = 1.0
    np.testing.assert_allclose(field(np.r_[np.zeros(6), 1.0]), expect, atol=1e-15)


def test_horocyclic_abelian_is_half_plane():
    field = horocyclic_field(heintze_extension(abelian(1)), np.eye(1))
    for p in ([0.0, 1.0], [3.0, 0.25]):
        np.testing.assert_array_equal(field(p), upper_half_plane()(p))
        assert chart_sectional(field, p, [1, 0], [0, 1]) == pytest.approx(-1, abs=1e-6)


def test_horocyclic_heis_center_scaling():
    field = horocyclic_field(heintze_extension(heis("C", 1)), np.eye(3))
    g = field([0.0, 0.0, 0.0, 2.0])
    np.testing.assert_allclose(np.diag(g), [0.25, 0.25, 1 / 16, 0.25])


# --- cross-checks --------------------------------------------------------------------------------


def test_crosscheck_real_hyperbolic_plane():
    rep = cross_check_base_point(heintze_extension(abelian(1)), np.eye(1))
    assert rep.rows[0]["K_chart"] == pytest.approx(-1, abs=1e-6)
    assert rep.rows[0]["K_algebraic"] == pytest.approx(-1, abs=1e-14)


def test_crosscheck_heis_h_metric():
    hm = build_h_metric(heintze_extension(heis("C", 1)))
    rep = cross_check_base_point(hm.algebra, hm.gram[:3, :3])
    assert rep.max_deviation < 1e-4
    by_plane = {tuple(r["plane"]): r for r in rep.rows}
    labels = hm.algebra.labels
    assert by_plane[(labels[0], "A")]["K_chart"] == pytest.approx(-1, abs=1e-4)
    assert by_plane[(labels[2], "A")]["K_chart"] == pytest.approx(-4, abs=1e-4)
    xy = by_plane[(labels[0], labels[1])]
    assert xy["K_chart"] == pytest.approx(xy["K_algebraic"], abs=1e-4)


def test_crosscheck_three_step_generic_layered(rng):
    carnot = sc_nilradical(3)
    rep = cross_check_base_point(heintze_extension(carnot), random_layered_gram(rng, carnot))
    assert rep.max_deviation < 1e-4
