"""Inner products on Carnot algebras: validation, Gromov-value certificates,
layer rescaling, and H-metrics on Heintze extensions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import is_block_orthogonal, orthonormal_frame
from .algebra import (
    CarnotAlgebra,
    HeintzeAlgebra,
    basis_change,
    heintze_extension,
    rescale_basis,
)
from .curvature import vertical_table


class MetricError(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass
class MetricReport:
    ok: bool
    min_pivot: float
    layered_orthogonal: bool | None = None
    layered_orthonormal: bool | None = None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "min_pivot": self.min_pivot,
            "layered_orthogonal": self.layered_orthogonal,
            "layered_orthonormal": self.layered_orthonormal,
        }


def _layer_blocks(alg):
    if isinstance(alg, HeintzeAlgebra):
        return [list(lay) for lay in alg.nil.strat.layers] + [[alg.vertical_index]]
    if isinstance(alg, CarnotAlgebra):
        return [list(lay) for lay in alg.strat.layers]
    return None


def validate_metric(gram, alg=None, sym_tol: float = 0.0) -> MetricReport:
    """Check that ``gram`` is symmetric positive definite.

    Raises MetricError carrying a witness vector ``w`` with ``w @ gram @ w <= 0``
    (or None for an asymmetric matrix).  With ``alg`` given, the layer flags are
    filled in.
    """
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise MetricError("gram must be square")
    if np.max(np.abs(gram - gram.T), initial=0.0) > sym_tol:
        raise MetricError("gram is not symmetric")
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(gram)
        raise MetricError(
            f"gram is not positive definite (smallest eigenvalue {w[0]:.3g})", witness=v[:, 0]
        ) from None
    min_pivot = float(np.min(np.diag(chol)) ** 2)
    report = MetricReport(ok=True, min_pivot=min_pivot)
    blocks = _layer_blocks(alg) if alg is not None else None
    if blocks is not None:
        report.layered_orthogonal = is_block_orthogonal(gram, blocks)
        report.layered_orthonormal = bool(report.layered_orthogonal and np.array_equal(gram, np.eye(len(gram))))
    return report


@dataclass
class GromovBounds:
    """``certified_upper`` is a valid Gromov value; ``sampled_lower`` is attained by some pair."""

    certified_upper: float
    sampled_lower: float
    per_pair: dict = field(default_factory=dict)
    per_target: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "certified_upper": self.certified_upper,
            "sampled_lower": self.sampled_lower,
            "per_pair": {f"{i},{j}": v for (i, j), v in sorted(self.per_pair.items())},
            "per_target": {str(m): v for m, v in sorted(self.per_target.items())},
        }


def _frame_tensor(carnot: CarnotAlgebra, gram):
    """Bracket tensor in a layer-adapted g-orthonormal frame, with the frame."""
    blocks = [list(lay) for lay in carnot.strat.layers]
    gram = np.asarray(gram, dtype=float)
    frame = orthonormal_frame(gram, blocks if is_block_orthogonal(gram, blocks) else None)
    t = np.einsum("ia,jb,ijk,ck->abc", frame, frame, carnot.constants.tensor, np.linalg.inv(frame))
    return t, frame


def random_unit_pairs(dim: int, count: int, seed: int, chunk: int):
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, chunk])
    x = rng.standard_normal((count, dim))
    y = rng.standard_normal((count, dim))
    return (
        x / np.linalg.norm(x, axis=1, keepdims=True),
        y / np.linalg.norm(y, axis=1, keepdims=True),
    )


def gromov_bounds(carnot: CarnotAlgebra, gram, samples: int = 1000, seed: int = 0) -> GromovBounds:
    """Certified and sampled Gromov values of ``gram`` on a Carnot algebra.

    The certificate is the Frobenius norm of the whole bracket tensor in a
    g-orthonormal frame: ``|[X,Y]|^2 = sum_c (X^T T_c Y)^2 <= sum_c |T_c|_F^2 |X|^2 |Y|^2``.
    ``per_target[m]`` is the part landing in layer m and ``per_pair[(i, j)]`` the
    component map V_i x V_j -> V_{i+j}; both are reported for diagnostics.
    The sampled value is the max ratio over frame basis pairs and ``samples``
    random unit pairs.
    """
    t, _ = _frame_tensor(carnot, gram)
    psi = carnot.layer_of
    s = carnot.step
    per_target = {m: float(np.linalg.norm(t[:, :, psi == m])) for m in range(2, s + 1)}
    per_pair = {}
    for i in range(1, s + 1):
        for j in range(i, s + 1):
            if i + j <= s:
                block = t[np.ix_(psi == i, psi == j, psi == i + j)]
                per_pair[(i, j)] = float(np.linalg.norm(block))
    certified = float(np.linalg.norm(t))
    dim = carnot.dim
    lower = float(np.max(np.linalg.norm(t, axis=2), initial=0.0))
    for chunk, start in enumerate(range(0, samples, 4096)):
        x, y = random_unit_pairs(dim, min(4096, samples - start), seed, chunk)
        vals = np.linalg.norm(np.einsum("na,nb,abc->nc", x, y, t), axis=1)
        lower = max(lower, float(vals.max()))
    return GromovBounds(certified, lower, per_pair, per_target)


def gromov_layer_scales(carnot: CarnotAlgebra, gram, eps: float) -> np.ndarray:
    """Per-layer factors sigma_m <= 1 (index m-1) used by ``scale_to_gromov``.

    Layers are fixed from low to high; brackets into V_m only involve lower
    layers, so one pass suffices.  Each target layer gets budget
    ``eps / sqrt(s - 1)`` so the total Frobenius certificate is at most eps.
    """
    if not eps > 0:
        raise MetricError("eps must be positive")
    gram = np.array(gram, dtype=float)
    s = carnot.step
    scales = np.ones(s)
    if s < 2:
        return scales
    blocks = [list(lay) for lay in carnot.strat.layers]
    if not is_block_orthogonal(gram, blocks):
        raise MetricError("gram must be layered-orthogonal")
    budget = eps / np.sqrt(s - 1)
    psi = carnot.layer_of
    for m in range(2, s + 1):
        t, _ = _frame_tensor(carnot, gram)
        f_m = float(np.linalg.norm(t[:, :, psi == m]))
        if f_m <= budget * (1 + 1e-12):
            continue
        # margin so rounding never leaves the certificate above budget
        sigma = budget / f_m * (1.0 - 1e-15)
        scales[m - 1] = sigma
        idx = blocks[m - 1]
        gram[np.ix_(idx, idx)] *= sigma * sigma
    return scales


def scale_to_gromov(carnot: CarnotAlgebra, gram, eps: float) -> np.ndarray:
    """Shrink layers V_2..V_s so the certified Gromov value is at most ``eps``."""
    scales = gromov_layer_scales(carnot, gram, eps)
    factor = scales[carnot.layer_of - 1]
    return np.asarray(gram, dtype=float) * np.outer(factor, factor)


@dataclass
class HMetric:
    """An H-metric, presented in a relabeled orthonormal layered basis.

    ``algebra`` carries the structure constants in that basis (so ``gram`` is the
    identity); ``basis`` holds the new basis vectors as columns in the original
    coordinates and ``gram_original`` is the same metric in the original basis.
    """

    algebra: HeintzeAlgebra
    gram: np.ndarray
    basis: np.ndarray
    gram_original: np.ndarray
    scales: np.ndarray
    eps: float
    gromov: GromovBounds
    vertical: list

    def report(self) -> dict:
        return {
            "eps": self.eps,
            "layer_scales": self.scales.tolist(),
            "gromov": self.gromov.to_dict(),
            "vertical": self.vertical,
        }


def build_h_metric(h: HeintzeAlgebra, eps: float | None = None, seed: int = 0, g0=None) -> HMetric:
    """H-metric on a Heintze extension: scale layers for Gromov value ``eps``
    (default ``1/(20 s)``), renormalize the layered basis, and set ``|A| = 1``.

    ``g0`` is an optional layered-orthogonal starting metric on the nilradical
    (identity by default).
    """
    if not isinstance(h, HeintzeAlgebra):
        h = heintze_extension(h)
    nil = h.nil
    if eps is None:
        eps = 1.0 / (20 * nil.step)
    if not eps > 0:
        raise MetricError("eps must be positive")
    n = nil.dim
    g0 = np.eye(n) if g0 is None else np.asarray(g0, dtype=float)
    validate_metric(g0)
    scaled = scale_to_gromov(nil, g0, eps)
    scales = gromov_layer_scales(nil, g0, eps)
    blocks = [list(lay) for lay in nil.strat.layers]
    frame = orthonormal_frame(scaled, blocks)
    basis = np.eye(n + 1)
    basis[:n, :n] = frame
    if np.count_nonzero(frame - np.diag(np.diag(frame))) == 0:
        new_nil = rescale_basis(nil, np.diag(frame))
    else:
        new_nil = CarnotAlgebra(basis_change(nil.constants, frame), nil.strat, nil.labels)
    new_h = HeintzeAlgebra(new_nil)
    gram = np.eye(n + 1)
    binv = np.linalg.inv(basis)
    gram_original = binv.T @ binv
    gromov = gromov_bounds(new_nil, np.eye(n), samples=1000, seed=seed)
    return HMetric(
        algebra=new_h,
        gram=gram,
        basis=basis,
        gram_original=gram_original,
        scales=scales,
        eps=float(eps),
        gromov=gromov,
        vertical=vertical_table(new_h, gram),
    )



def sc_spech_gram(k: int, norm=None, with_vertical: bool = False) -> np.ndarray:
    """Diagonal gram on the SC(k) nilradical with ``|E_ij| = norm(k, j - i)``.

    The default is the literal ``1 / (100 k (j - i))``.  Its certified Gromov
    value is large, so for pinching work use ``build_h_metric`` instead.
    """
    from .catalog import sc_nilradical

    norm = (lambda kk, ell: 1.0 / (100 * kk * ell)) if norm is None else norm
    layer = sc_nilradical(k).layer_of
    diag = np.array([norm(k, int(ell)) ** 2 for ell in layer])
    if with_vertical:
        diag = np.append(diag, 1.0)
    return np.diag(diag)
