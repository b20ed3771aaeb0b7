"""Curvature of left-invariant metrics from structure constants.

All computations run in a g-orthonormal frame attached to each
(algebra, gram) pair; inputs and outputs are expressed in the algebra's own
basis coordinates.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.optimize import brentq

from ._linalg import is_block_orthogonal, orthonormal_frame, orthonormalize_pair
from .algebra import CarnotAlgebra, HeintzeAlgebra, StructureConstants, _constants

CENSUS_TOL = 1e-10
PLANE_REJECT = 1e-8
CHUNK = 4096


class CurvatureError(ValueError):
    pass


class Geometry:
    """Levi-Civita data of a left-invariant metric.

    ``frame`` columns are g-orthonormal; ``conn[a, b, c]`` is the c-component of
    ``nabla_{f_a} f_b`` and ``riem[a, b, c, d] = <R(f_a, f_b) f_c, f_d>``.
    """

    def __init__(self, constants: StructureConstants, gram, blocks=None):
        self.constants = constants
        self.gram = np.array(gram, dtype=float)
        if self.gram.shape != (constants.dim, constants.dim):
            raise CurvatureError("gram shape does not match algebra dimension")
        self.frame = orthonormal_frame(self.gram, blocks)
        self.frame_inv = np.linalg.inv(self.frame)

    @cached_property
    def frame_constants(self) -> np.ndarray:
        f, finv = self.frame, self.frame_inv
        return np.einsum("ia,jb,ijk,ck->abc", f, f, self.constants.tensor, finv)

    @cached_property
    def conn(self) -> np.ndarray:
        c = self.frame_constants
        # nabla_X Y = 1/2 ([X,Y] - ad_X^T Y - ad_Y^T X)
        return 0.5 * (c - np.transpose(c, (0, 2, 1)) - np.transpose(c, (2, 0, 1)))

    @cached_property
    def riem(self) -> np.ndarray:
        g, c = self.conn, self.frame_constants
        r = (
            np.einsum("jkm,iml->ijkl", g, g)
            - np.einsum("ikm,jml->ijkl", g, g)
            - np.einsum("ijm,mkl->ijkl", c, g)
        )
        return r

    @cached_property
    def _sectional_matrix(self) -> np.ndarray:
        # K numerator = sum R[a,b,c,d] u_a v_b v_c u_d, indexed as (a,d) x (b,c)
        n = self.constants.dim
        return np.transpose(self.riem, (0, 3, 1, 2)).reshape(n * n, n * n)

    def to_frame(self, x) -> np.ndarray:
        return self.frame_inv @ np.asarray(x, dtype=float)

    def from_frame(self, x) -> np.ndarray:
        return self.frame @ x

    def inner(self, x, y) -> float:
        return float(np.asarray(x) @ self.gram @ np.asarray(y))

    def sectional_frame(self, u, v) -> np.ndarray:
        """Vectorized sectional curvature for frame-coordinate rows ``u``, ``v``."""
        u = np.atleast_2d(u)
        v = np.atleast_2d(v)
        uu = np.einsum("na,nd->nad", u, u).reshape(len(u), -1)
        vv = np.einsum("nb,nc->nbc", v, v).reshape(len(v), -1)
        num = np.einsum("ni,ni->n", uu @ self._sectional_matrix, vv)
        den = np.einsum("na,na->n", u, u) * np.einsum("na,na->n", v, v) - np.einsum("na,na->n", u, v) ** 2
        return num / den


@lru_cache(maxsize=64)
def _cached_geometry(constants: StructureConstants, gram_bytes: bytes, layers) -> Geometry:
    n = constants.dim
    gram = np.frombuffer(gram_bytes, dtype=float).reshape(n, n)
    blocks = layers if layers is not None and is_block_orthogonal(gram, layers) else None
    return Geometry(constants, gram, blocks)


def _layers(alg) -> tuple | None:
    if isinstance(alg, HeintzeAlgebra):
        return alg.nil.strat.layers + ((alg.vertical_index,),)
    if isinstance(alg, CarnotAlgebra):
        return alg.strat.layers
    return None


def geometry(alg, gram) -> Geometry:
    """Cached connection and curvature data for ``(alg, gram)``; layer blocks are
    used for the frame when ``gram`` is layered-orthogonal."""
    gram = np.ascontiguousarray(gram, dtype=float)
    return _cached_geometry(_constants(alg), gram.tobytes(), _layers(alg))


def nabla(alg, gram, x, y) -> np.ndarray:
    geo = geometry(alg, gram)
    xf, yf = geo.to_frame(x), geo.to_frame(y)
    return geo.from_frame(np.einsum("a,b,abc->c", xf, yf, geo.conn))


def riemann(alg, gram, x, y, z) -> np.ndarray:
    """``R(x, y) z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z``."""
    geo = geometry(alg, gram)
    xf, yf, zf = (geo.to_frame(w) for w in (x, y, z))
    # riem is fully lowered in the orthonormal frame
    return geo.from_frame(np.einsum("a,b,c,abcd->d", xf, yf, zf, geo.riem))


def sectional(alg, gram, u, v) -> float:
    geo = geometry(alg, gram)
    uf, vf = geo.to_frame(u), geo.to_frame(v)
    den = (uf @ uf) * (vf @ vf) - (uf @ vf) ** 2
    if den <= 1e-10 * (uf @ uf) * (vf @ vf):
        raise CurvatureError("degenerate plane")
    return float(geo.sectional_frame(uf, vf)[0])


def milnor_sectional(alg, gram, a: int, b: int) -> float:
    """Sectional curvature of the basis plane (f_a, f_b) by Milnor's structure-constant sum.

    The basis must be orthonormal for ``gram``.
    """
    gram = np.asarray(gram, dtype=float)
    if not np.allclose(gram, np.eye(len(gram)), rtol=0, atol=1e-12):
        raise CurvatureError("basis is not orthonormal for this metric; orthonormalize first")
    al = _constants(alg).tensor
    total = 0.0
    for k in range(len(gram)):
        abk, bka, kab = al[a, b, k], al[b, k, a], al[k, a, b]
        total += (
            0.5 * abk * (-abk + bka + kab)
            - 0.25 * (abk - bka + kab) * (abk + bka - kab)
            - al[k, a, a] * al[k, b, b]
        )
    return total


def ricci_scalar(alg, gram):
    """Ricci form (in basis coordinates) and scalar curvature."""
    geo = geometry(alg, gram)
    # Ric(x, y) = sum_a <R(f_a, x) y, f_a>
    ric_f = np.einsum("aija->ij", geo.riem)
    ric_f = 0.5 * (ric_f + ric_f.T)
    finv = geo.frame_inv
    ric = finv.T @ ric_f @ finv
    return 0.5 * (ric + ric.T), float(np.trace(ric_f))


# --- Eberlein-Heber decomposition -------------------------------------------------


@dataclass
class EHDecomposition:
    D0: np.ndarray
    S0: np.ndarray
    N0: np.ndarray
    sqrtD0: np.ndarray | None
    frame: np.ndarray  # g-orthonormal frame of the nilradical, basis coordinates
    psd: bool = True


def _nil_gram(h: HeintzeAlgebra, gram) -> np.ndarray:
    gram = np.asarray(gram, dtype=float)
    n = h.vertical_index
    if np.any(gram[:n, n] != 0.0):
        raise CurvatureError("vertical generator is not orthogonal to the nilradical")
    return gram[:n, :n]


def _unit_vertical(h: HeintzeAlgebra, gram) -> tuple[np.ndarray, float]:
    a = h.vertical()
    norm = float(np.sqrt(a @ np.asarray(gram) @ a))
    return a / norm, norm


def _commutes_exactly(ad_a: np.ndarray, frame: np.ndarray) -> bool:
    """True when ad_a is diagonal and constant on every block the frame mixes,
    so that the frame change leaves it unchanged exactly."""
    diag = np.diag(ad_a)
    if np.count_nonzero(ad_a - np.diag(diag)):
        return False
    rows, cols = np.nonzero(frame)
    return bool(np.all(diag[rows] == diag[cols]))


def eh_decomposition(h: HeintzeAlgebra, gram) -> EHDecomposition:
    gram = np.ascontiguousarray(gram, dtype=float)
    return _cached_eh(h, gram.tobytes(), gram.shape[0])


@lru_cache(maxsize=64)
def _cached_eh(h: HeintzeAlgebra, gram_bytes: bytes, dim: int) -> EHDecomposition:
    gram = np.frombuffer(gram_bytes).reshape(dim, dim)
    gn = _nil_gram(h, gram)
    _, anorm = _unit_vertical(h, gram)
    n = h.vertical_index
    blocks = [list(lay) for lay in h.nil.strat.layers]
    frame = orthonormal_frame(gn, blocks if is_block_orthogonal(gn, blocks) else None)
    ad_a = h.constants.ad(h.vertical())[:n, :n] / anorm
    if _commutes_exactly(ad_a, frame):
        m = ad_a.copy()
    else:
        m = np.linalg.solve(frame, ad_a @ frame)
    d0 = 0.5 * (m + m.T)
    s0 = 0.5 * (m - m.T)
    n0 = d0 @ d0 + d0 @ s0 - s0 @ d0
    w, v = np.linalg.eigh(d0)
    psd = bool(w.min() >= -1e-12)
    sqrt_d0 = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T if psd else None
    if psd and np.count_nonzero(d0 - np.diag(np.diag(d0))) == 0:
        sqrt_d0 = np.diag(np.sqrt(np.diag(d0)))
    return EHDecomposition(d0, s0, n0, sqrt_d0, frame, psd)


def _split_nil(h: HeintzeAlgebra, gram, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape == (h.dim,):
        if abs(x[h.vertical_index]) > 1e-12 * max(1.0, np.max(np.abs(x))):
            raise CurvatureError("vector has a vertical component; expected a nilradical vector")
        return x[: h.vertical_index]
    if x.shape == (h.vertical_index,):
        return x
    raise CurvatureError("vector length matches neither the algebra nor its nilradical")


def eh_sectional_horizontal(h: HeintzeAlgebra, gram, u, v) -> float:
    """Curvature of a plane in the nilradical as nilradical curvature minus |sqrt(D0)u ^ sqrt(D0)v|^2."""
    eh = eh_decomposition(h, gram)
    if np.max(np.abs(eh.S0), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(eh.D0))):
        raise CurvatureError("formula requires a symmetric ad A (S0 = 0)")
    gn = _nil_gram(h, gram)
    un, vn = orthonormalize_pair(_split_nil(h, gram, u), _split_nil(h, gram, v), gn)
    k_nil = sectional(h.nil, gn, un, vn)
    return k_nil - _wedge_d0(eh, un, vn)


def _wedge_d0(eh: EHDecomposition, u, v) -> float:
    # |sqrt(D0) u ^ sqrt(D0) v|^2, using <sqrt(D0) x, sqrt(D0) y> = x^T D0 y
    uf, vf = np.linalg.solve(eh.frame, u), np.linalg.solve(eh.frame, v)
    du, dv = eh.D0 @ uf, eh.D0 @ vf
    return float((uf @ du) * (vf @ dv) - (uf @ dv) ** 2)


def phi_norm_sq(h: HeintzeAlgebra, gram, u, v) -> float:
    """``|phi(u, v)|^2 = |sqrt(D0) u ^ sqrt(D0) v|^2`` for nilradical vectors."""
    eh = eh_decomposition(h, gram)
    if not eh.psd:
        raise CurvatureError("D0 is not positive semidefinite")
    return _wedge_d0(eh, _split_nil(h, gram, u), _split_nil(h, gram, v))


def t_value(h: HeintzeAlgebra, gram, u, v) -> float:
    """``<(nabla^N_u ad A) v - (nabla^N_v ad A) u, v>`` with the nilradical connection."""
    gn = _nil_gram(h, gram)
    _, anorm = _unit_vertical(h, gram)
    n = h.vertical_index
    ad_a = h.constants.ad(h.vertical())[:n, :n] / anorm
    un, vn = _split_nil(h, gram, u), _split_nil(h, gram, v)
    nil = h.nil

    def dad(x, y):
        return nabla(nil, gn, x, ad_a @ y) - ad_a @ nabla(nil, gn, x, y)

    return float((dad(un, vn) - dad(vn, un)) @ gn @ vn)


def eh_sectional_mixed(h: HeintzeAlgebra, gram, alpha: float, beta: float, u, v, tol: float = 1e-10):
    """Curvature of the plane spanned by ``alpha*A + beta*u`` and ``v``; returns ``(K, T)``.

    ``u`` and ``v`` must be orthonormal vectors of the nilradical and
    ``alpha**2 + beta**2 = 1`` (A is normalized internally).
    """
    if abs(alpha * alpha + beta * beta - 1.0) > tol:
        raise CurvatureError("alpha**2 + beta**2 must equal 1")
    gn = _nil_gram(h, gram)
    un, vn = _split_nil(h, gram, u), _split_nil(h, gram, v)
    if (
        abs(un @ gn @ un - 1.0) > tol
        or abs(vn @ gn @ vn - 1.0) > tol
        or abs(un @ gn @ vn) > tol
    ):
        raise CurvatureError("u and v must be orthonormal")
    eh = eh_decomposition(h, gram)
    vf = np.linalg.solve(eh.frame, vn)
    t = t_value(h, gram, un, vn)
    k_uv = eh_sectional_horizontal(h, gram, un, vn) if beta != 0.0 else 0.0
    k = -alpha**2 * float(vf @ eh.N0 @ vf) + beta**2 * k_uv + 2.0 * alpha * beta * t
    return k, t


# --- sampling audits ----------------------------------------------------------


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CARNOT_THREADS", "1")))
    except ValueError:
        return 1


def random_frame_pairs(dim: int, count: int, seed: int, chunk: int):
    """Orthonormal Gaussian pairs (frame coordinates) for chunk ``chunk`` of a seeded stream."""
    if dim < 2:
        raise CurvatureError("planes need at least two dimensions")
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, chunk])
    u = rng.standard_normal((count, dim))
    v = rng.standard_normal((count, dim))
    while True:
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        cos = np.einsum("na,na->n", u, v)
        bad = 1.0 - cos**2 < PLANE_REJECT
        if not bad.any():
            break
        u[bad] = rng.standard_normal((bad.sum(), dim))
        v[bad] = rng.standard_normal((bad.sum(), dim))
    v = v - cos[:, None] * u
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return u, v


def sample_sectional(geo: Geometry, samples: int, seed: int, sub=None):
    """Sectional curvatures of ``samples`` random planes, deterministic in ``seed``.

    ``sub`` optionally restricts planes to the span of given frame columns.
    Returns ``(K, u, v)`` with u, v in frame coordinates.
    """
    dim = geo.constants.dim
    sub_dim = dim if sub is None else len(sub)
    chunks = [(c, min(CHUNK, samples - c * CHUNK)) for c in range((samples + CHUNK - 1) // CHUNK)]

    def work(item):
        c, count = item
        u, v = random_frame_pairs(sub_dim, count, seed, c)
        if sub is not None:
            uf = np.zeros((count, dim))
            vf = np.zeros((count, dim))
            uf[:, sub] = u
            vf[:, sub] = v
            u, v = uf, vf
        return geo.sectional_frame(u, v), u, v

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        parts = list(pool.map(work, chunks))
    if not parts:
        return np.zeros(0), np.zeros((0, dim)), np.zeros((0, dim))
    return tuple(np.concatenate(p) for p in zip(*parts))


def _find_zero_plane(geo: Geometry, neg, pos):
    """Intermediate-value search for a flat plane between a negative and a positive plane."""
    (u0, v0), (u1, v1) = neg, pos

    def plane(t):
        u = (1 - t) * u0 + t * u1
        v = (1 - t) * v0 + t * v1
        return u, v

    def k_of(t):
        u, v = plane(t)
        return float(geo.sectional_frame(u, v)[0])

    grid = np.linspace(0.0, 1.0, 65)
    for u, v in map(plane, grid):
        den = (u @ u) * (v @ v) - (u @ v) ** 2
        if den < 1e-6 * (u @ u) * (v @ v):
            return None
    vals = [k_of(t) for t in grid]
    for a, b, ka, kb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if ka < 0 < kb or kb < 0 < ka:
            t = brentq(k_of, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            u, v = plane(t)
            return k_of(t), u, v
    return None


@dataclass
class PinchingReport:
    min_K: float
    max_K: float
    vertical: list = field(default_factory=list)
    census: dict = field(default_factory=dict)
    samples: int = 0
    seed: int = 0
    basis_planes: list = field(default_factory=list)
    zero_witness: dict | None = None
    rows: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "min_K": self.min_K,
            "max_K": self.max_K,
            "vertical": self.vertical,
            "census": self.census,
            "samples": self.samples,
            "seed": self.seed,
            "basis_planes": self.basis_planes,
            "zero_witness": self.zero_witness,
        }


def vertical_table(h: HeintzeAlgebra, gram) -> list[dict]:
    a = h.vertical()
    out = []
    for i in range(h.vertical_index):
        e = np.zeros(h.dim)
        e[i] = 1.0
        out.append({"label": h.labels[i], "layer": int(h.layer_of[i]), "K": sectional(h, gram, a, e)})
    return out


def pinching_report(alg, gram, samples: int = 10000, seed: int = 0, keep_rows: bool = False) -> PinchingReport:
    """Extrema over all basis planes and ``samples`` random planes, vertical table and sign census."""
    gram = np.asarray(gram, dtype=float)
    geo = geometry(alg, gram)
    dim = geo.constants.dim
    labels = list(getattr(alg, "labels", ())) or [f"e{i + 1}" for i in range(dim)]
    basis = []
    eye = np.eye(dim)
    for a in range(dim):
        for b in range(a + 1, dim):
            basis.append({"plane": [labels[a], labels[b]], "K": sectional(alg, gram, eye[a], eye[b])})
    ks, u, v = sample_sectional(geo, samples, seed) if dim > 1 else (np.zeros(0),) * 3
    kb = np.array([row["K"] for row in basis])
    allk = np.concatenate([kb, ks])
    census = {
        "neg": int(np.sum(allk < -CENSUS_TOL)),
        "zero": int(np.sum(np.abs(allk) <= CENSUS_TOL)),
        "pos": int(np.sum(allk > CENSUS_TOL)),
    }
    witness = None
    if census["neg"] and census["pos"] and len(ks):
        i_neg, i_pos = int(np.argmin(ks)), int(np.argmax(ks))
        if ks[i_neg] < 0 < ks[i_pos]:
            found = _find_zero_plane(geo, (u[i_neg], v[i_neg]), (u[i_pos], v[i_pos]))
            if found is not None and abs(found[0]) <= CENSUS_TOL:
                witness = {
                    "K": found[0],
                    "u": geo.from_frame(found[1]).tolist(),
                    "v": geo.from_frame(found[2]).tolist(),
                }
                census["zero"] += 1
    rows = []
    if keep_rows:
        rows = [
            {"u": geo.from_frame(uu).tolist(), "v": geo.from_frame(vv).tolist(), "K": float(k)}
            for k, uu, vv in zip(ks, u, v)
        ]
    return PinchingReport(
        min_K=float(allk.min()),
        max_K=float(allk.max()),
        vertical=vertical_table(alg, gram) if isinstance(alg, HeintzeAlgebra) else [],
        census=census,
        samples=samples,
        seed=seed,
        basis_planes=basis,
        zero_witness=witness,
        rows=rows,
    )


@dataclass
class LemmaPiReport:
    max_abs_T: float
    max_abs_T_meets_V1: float
    max_abs_T_meets_Vs: float
    max_abs_T_u_in_Vs: float  # diagnostic only; not zero in general for s >= 3
    samples: int
    seed: int

    @property
    def ok(self) -> bool:
        return (
            self.max_abs_T < 0.5
            and self.max_abs_T_meets_V1 <= 1e-10
            and self.max_abs_T_meets_Vs <= 1e-10
        )

    def to_dict(self) -> dict:
        return {
            "max_abs_T": self.max_abs_T,
            "max_abs_T_meets_V1": self.max_abs_T_meets_V1,
            "max_abs_T_meets_Vs": self.max_abs_T_meets_Vs,
            "max_abs_T_u_in_Vs": self.max_abs_T_u_in_Vs,
            "samples": self.samples,
            "seed": self.seed,
            "ok": self.ok,
        }


def lemma_pi_audit(h: HeintzeAlgebra, gram, samples: int = 1000, seed: int = 0) -> LemmaPiReport:
    """Sampled bound on T for H-metrics and its vanishing on planes meeting V1 or V_s.

    A plane spanned by ``alpha*A + beta*u`` and ``v`` with ``alpha != 0`` meets
    the nilradical exactly in ``span(v)``, so "meets V1" means ``v`` in V1 and
    likewise for V_s.
    """
    from .metric import gromov_bounds

    gn = _nil_gram(h, gram)
    s = h.step
    bound = gromov_bounds(h.nil, gn, samples=0, seed=seed).certified_upper
    if bound > (1.0 / (20 * s)) * (1 + 1e-12):
        raise CurvatureError(
            f"metric has certified Gromov bound {bound:.3g} > 1/(20s) = {1 / (20 * s):.3g}"
        )
    n = h.vertical_index
    layers = h.nil.strat.layers
    rng = np.random.default_rng(seed)

    def restricted(space):
        x = rng.standard_normal(n)
        if space is not None:
            keep = np.zeros(n, bool)
            keep[list(space)] = True
            x[~keep] = 0.0
        return x

    def t_max(count, u_space=None, v_space=None):
        worst = 0.0
        for _ in range(count):
            u, v = restricted(u_space), restricted(v_space)
            # orthonormalize keeping the constrained vector's direction
            if u_space is not None:
                u, v = orthonormalize_pair(u, v, gn)
            else:
                v, u = orthonormalize_pair(v, u, gn)
            worst = max(worst, abs(t_value(h, gram, u, v)))
        return worst

    per_case = max(1, samples // 10)
    return LemmaPiReport(
        max_abs_T=t_max(samples),
        max_abs_T_meets_V1=t_max(per_case, v_space=layers[0]),
        max_abs_T_meets_Vs=t_max(per_case, v_space=layers[-1]),
        max_abs_T_u_in_Vs=t_max(per_case, u_space=layers[-1]),
        samples=samples,
        seed=seed,
    )
