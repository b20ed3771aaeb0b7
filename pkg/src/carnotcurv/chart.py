"""Riemannian curvature in coordinate charts by central finite differences.

Includes the Bergman metric on the Siegel domain model of complex hyperbolic
2-space and the horocyclic (exponential-coordinate) metric of a Heintze group,
used to cross-check the algebraic curvature formulas.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .algebra import CarnotAlgebra, HeintzeAlgebra
from .curvature import sectional

DEFAULT_STEP = 1e-3


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class MetricField:
    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray], bool] = lambda p: True
    name: str = ""

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if not self.domain(p):
            raise DomainError(f"point {p.tolist()} is outside the domain of {self.name or 'the field'}")
        return self.eval(p)


def euclidean_field(dim: int) -> MetricField:
    return MetricField(dim, lambda p: np.eye(dim), name="euclidean")


def upper_half_plane() -> MetricField:
    return MetricField(2, lambda p: np.eye(2) / p[1] ** 2, lambda p: p[1] > 0, "upper half-plane")


def bergman_ch2_field(scale: float = 1.0) -> MetricField:
    """Bergman tensor on coordinates (x, y, z, t), defined for z > 0.

    ``scale = 1`` is the tensor exactly as commonly printed; ``scale = 1/4``
    is the normalization with holomorphic curvature -4.
    """

    def ev(p):
        x, y, z, _ = p
        z2 = z * z
        return scale * np.array(
            [
                [4 * (z + y * y) / z2, -4 * x * y / z2, 0.0, -2 * y / z2],
                [-4 * x * y / z2, 4 * (z + x * x) / z2, 0.0, 2 * x / z2],
                [0.0, 0.0, 1 / z2, 0.0],
                [-2 * y / z2, 2 * x / z2, 0.0, 1 / z2],
            ]
        )

    return MetricField(4, ev, lambda p: p[2] > 0, "bergman")


def maurer_cartan_frame(carnot: CarnotAlgebra, x) -> np.ndarray:
    """``sum_{m<s} (-ad x)^m / (m+1)!``: pulls coordinate velocities at exp(x) back to the algebra."""
    ad = carnot.constants.ad(np.asarray(x, dtype=float))
    out = np.eye(carnot.dim)
    power = np.eye(carnot.dim)
    for m in range(1, carnot.step):
        power = power @ (-ad)
        out = out + power / factorial(m + 1)
    return out


def horocyclic_field(h: HeintzeAlgebra, g0) -> MetricField:
    """Metric ``sum_i y^(-2i) g0|V_i + dy^2/y^2`` on N x R_+ in exponential coordinates.

    Coordinates are the nilradical basis coefficients followed by the height y.
    """
    nil = h.nil
    g0 = np.array(g0, dtype=float)
    n = nil.dim
    psi = nil.layer_of.astype(float)
    expo = psi[:, None] + psi[None, :]

    def ev(p):
        x, y = p[:n], p[n]
        f = maurer_cartan_frame(nil, x)
        out = np.zeros((n + 1, n + 1))
        out[:n, :n] = f.T @ (g0 * y ** (-expo)) @ f
        out[n, n] = 1.0 / (y * y)
        return out

    return MetricField(n + 1, ev, lambda p: p[n] > 0, "horocyclic")


def _check_margin(field: MetricField, p: np.ndarray, reach: float) -> None:
    for i in range(field.dim):
        for sgn in (-1.0, 1.0):
            q = p.copy()
            q[i] += sgn * reach
            if not field.domain(q):
                raise DomainError(
                    f"point {p.tolist()} is within {reach:g} of the domain boundary along axis {i}"
                )


def _metric_derivatives(field: MetricField, p: np.ndarray, h: float) -> np.ndarray:
    """``dg[l, i, j] = d g_ij / d x^l`` by central differences."""
    dim = field.dim
    dg = np.empty((dim, dim, dim))
    for l in range(dim):
        e = np.zeros(dim)
        e[l] = h
        dg[l] = (field.eval(p + e) - field.eval(p - e)) / (2 * h)
    return dg


def _christoffel_raw(field: MetricField, p: np.ndarray, h: float) -> np.ndarray:
    ginv = np.linalg.inv(field.eval(p))
    dg = _metric_derivatives(field, p, h)
    # lowered: Gamma_{l,ij} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    low = 0.5 * (
        np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    )
    gam = np.einsum("kl,lij->kij", ginv, low)
    return 0.5 * (gam + np.transpose(gam, (0, 2, 1)))


def christoffel(field: MetricField, p, h_step: float = DEFAULT_STEP, richardson: bool = False) -> np.ndarray:
    """``Gamma[k, i, j]`` (upper index first), symmetric in (i, j)."""
    p = np.asarray(p, dtype=float)
    if not field.domain(p):
        raise DomainError(f"point {p.tolist()} is outside the domain")
    _check_margin(field, p, 2 * h_step)
    gam = _christoffel_raw(field, p, h_step)
    if richardson:
        gam = (4 * _christoffel_raw(field, p, h_step / 2) - gam) / 3
    return gam


def chart_riemann(field: MetricField, p, h_step: float = DEFAULT_STEP, richardson: bool = True) -> np.ndarray:
    """``R[l, i, j, k]``: the l-component of ``R(d_i, d_j) d_k``.

    With ``richardson`` (default) one extrapolation level combines steps h and
    h/2, cancelling the leading h^2 error term.
    """
    p = np.asarray(p, dtype=float)
    gam = christoffel(field, p, h_step, richardson)
    dim = field.dim
    dgam = np.empty((dim,) + gam.shape)  # dgam[i, l, j, k] = d_i Gamma^l_jk
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h_step
        plus = _christoffel_raw(field, p + e, h_step)
        minus = _christoffel_raw(field, p - e, h_step)
        d = (plus - minus) / (2 * h_step)
        if richardson:
            e2 = e / 2
            plus2 = _christoffel_raw(field, p + e2, h_step / 2)
            minus2 = _christoffel_raw(field, p - e2, h_step / 2)
            d = (4 * (plus2 - minus2) / h_step - d) / 3
        dgam[i] = d
    r = (
        np.einsum("iljk->lijk", dgam)
        - np.einsum("jlik->lijk", dgam)
        + np.einsum("lim,mjk->lijk", gam, gam)
        - np.einsum("ljm,mik->lijk", gam, gam)
    )
    return r


def chart_sectional(field: MetricField, p, u, v, h_step: float = DEFAULT_STEP, richardson: bool = True) -> float:
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = field(p)
    uu, vv, uv = u @ g @ u, v @ g @ v, u @ g @ v
    den = uu * vv - uv * uv
    if den <= 1e-10 * uu * vv:
        raise DomainError("degenerate plane")
    r = chart_riemann(field, p, h_step, richardson)
    # <R(u, v) v, u>
    rvec = np.einsum("lijk,i,j,k->l", r, u, v, v)
    return float(rvec @ g @ u) / den


# --- Bergman closed forms ----------------------------------------------------------

BERGMAN_PLANES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
_AXES = "xyzt"


def bergman_closed_forms(p, forms: str = "printed") -> dict:
    """The six coordinate-plane curvatures of the Bergman metric.

    ``forms="printed"`` uses the formulas as published; ``"corrected"`` swaps y
    for x in K(d_y, d_z), which is what the symmetric x<->y structure of the
    tensor gives.
    """
    x, y, z, _ = p
    r2 = x * x + y * y
    out = {
        (0, 1): -(r2 + 4 * z) / (r2 + z),
        (0, 2): -(4 * y * y + z) / (y * y + z),
        (0, 3): -1.0,
        (1, 2): -(4 * y * y + z) / (y * y + z),
        (1, 3): -1.0,
        (2, 3): -4.0,
    }
    if forms == "corrected":
        out[(1, 2)] = -(4 * x * x + z) / (x * x + z)
    elif forms != "printed":
        raise ValueError("forms must be 'printed' or 'corrected'")
    return out


def default_bergman_points(count: int = 20, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in [-2,2]^2 x [0.5,4] x [0.5,4]."""
    sampler = qmc.Halton(d=4, scramble=True, seed=seed)
    return qmc.scale(sampler.random(count), [-2, -2, 0.5, 0.5], [2, 2, 4, 4])


@dataclass
class BergmanReport:
    max_deviation: float
    tol: float
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tol

    def to_dict(self) -> dict:
        return {"ok": self.ok, "max_deviation": self.max_deviation, "tol": self.tol, "rows": self.rows}


def verify_bergman(
    points=None,
    h_step: float = DEFAULT_STEP,
    tol: float = 1e-5,
    field: MetricField | None = None,
    forms: str = "printed",
    richardson: bool = True,
) -> BergmanReport:
    """Finite-difference curvature of the six coordinate planes against the closed forms."""
    field = bergman_ch2_field() if field is None else field
    points = default_bergman_points() if points is None else np.atleast_2d(np.asarray(points, dtype=float))
    rows = []
    worst = 0.0
    eye = np.eye(4)
    for p in points:
        closed = bergman_closed_forms(p, forms)
        for a, b in BERGMAN_PLANES:
            k_num = chart_sectional(field, p, eye[a], eye[b], h_step, richardson)
            dev = abs(k_num - closed[(a, b)])
            worst = max(worst, dev)
            rows.append(
                {
                    "point": [float(c) for c in p],
                    "plane": f"d{_AXES[a]},d{_AXES[b]}",
                    "K_numeric": k_num,
                    "K_closed_form": closed[(a, b)],
                    "deviation": dev,
                }
            )
    return BergmanReport(worst, tol, rows)


@dataclass
class CrossCheckReport:
    max_deviation: float
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"max_deviation": self.max_deviation, "rows": self.rows}


def cross_check_base_point(
    h: HeintzeAlgebra, g0, h_step: float = DEFAULT_STEP, richardson: bool = True
) -> CrossCheckReport:
    """Compare chart curvature of the horocyclic field at (0, y=1) with algebraic curvature.

    At that point the coordinate frame is the layered algebra frame, with d_y
    corresponding to the unit vertical generator; by homogeneity one point suffices.
    """
    g0 = np.asarray(g0, dtype=float)
    n = h.vertical_index
    field = horocyclic_field(h, g0)
    gram = np.zeros((n + 1, n + 1))
    gram[:n, :n] = g0
    gram[n, n] = 1.0
    p = np.zeros(n + 1)
    p[n] = 1.0
    eye = np.eye(n + 1)
    r = chart_riemann(field, p, h_step, richardson)
    g = field(p)
    rows = []
    worst = 0.0
    labels = h.labels
    for a in range(n + 1):
        for b in range(a + 1, n + 1):
            u, v = eye[a], eye[b]
            den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
            k_chart = float(np.einsum("lijk,i,j,k->l", r, u, v, v) @ g @ u) / den
            k_alg = sectional(h, gram, u, v)
            dev = abs(k_chart - k_alg)
            worst = max(worst, dev)
            rows.append({"plane": [labels[a], labels[b]], "K_chart": k_chart, "K_algebraic": k_alg, "deviation": dev})
    return CrossCheckReport(worst, rows)
