"""Lie algebras given by structure constants, Carnot stratifications and Heintze extensions.

Basis indices are 0-based throughout the library. A bracket ``[e_i, e_j]`` is
``sum_k C[i, j, k] e_k``; only entries with ``i < j`` are stored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._linalg import RANK_TOL, column_rank, span_basis

JACOBI_TOL = 1e-10


class AlgebraError(ValueError):
    """Invalid algebraic input (dimension mismatch, bad parameters, unstratified data)."""


class NotNilpotentError(AlgebraError):
    def __init__(self, message: str, subspace: np.ndarray):
        super().__init__(message)
        self.subspace = subspace


@dataclass(frozen=True)
class StructureConstants:
    dim: int
    entries: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise AlgebraError("dim must be positive")
        merged: dict[tuple[int, int, int], float] = {}
        for i, j, k, val in self.entries:
            i, j, k, val = int(i), int(j), int(k), float(val)
            if not (0 <= i < self.dim and 0 <= j < self.dim and 0 <= k < self.dim):
                raise AlgebraError(f"index out of range in entry {(i, j, k)}")
            if i == j:
                if val != 0.0:
                    raise AlgebraError(f"[e_{i}, e_{i}] must vanish")
                continue
            if i > j:
                i, j, val = j, i, -val
            merged[(i, j, k)] = merged.get((i, j, k), 0.0) + val
        clean = tuple(sorted((i, j, k, v) for (i, j, k), v in merged.items() if v != 0.0))
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_tensor(cls, tensor) -> "StructureConstants":
        tensor = np.asarray(tensor, dtype=float)
        n = tensor.shape[0]
        ents = [
            (i, j, k, tensor[i, j, k])
            for i in range(n)
            for j in range(i + 1, n)
            for k in range(n)
            if tensor[i, j, k] != 0.0
        ]
        return cls(n, tuple(ents))

    @cached_property
    def tensor(self) -> np.ndarray:
        c = np.zeros((self.dim, self.dim, self.dim))
        for i, j, k, v in self.entries:
            c[i, j, k] = v
            c[j, i, k] = -v
        c.setflags(write=False)
        return c

    def ad(self, x) -> np.ndarray:
        """Matrix of ``ad x`` acting on coefficient columns."""
        x = np.asarray(x, dtype=float)
        return np.einsum("a,abc->cb", x, self.tensor)

    def perturbed(self, i: int, j: int, k: int, delta: float) -> "StructureConstants":
        return StructureConstants(self.dim, self.entries + ((i, j, k, delta),))


@dataclass(frozen=True)
class Stratification:
    layers: tuple  # tuple of tuples of basis indices, layer 1 first

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(int(i) for i in lay) for lay in self.layers))
        seen = [i for lay in self.layers for i in lay]
        if len(seen) != len(set(seen)):
            raise AlgebraError("layers overlap")
        if sorted(seen) != list(range(len(seen))):
            raise AlgebraError("layers must partition the basis")

    @property
    def step(self) -> int:
        return len(self.layers)

    @property
    def layer_dims(self) -> list[int]:
        return [len(lay) for lay in self.layers]

    @cached_property
    def layer_of(self) -> np.ndarray:
        psi = np.zeros(sum(self.layer_dims), dtype=int)
        for m, lay in enumerate(self.layers, start=1):
            psi[list(lay)] = m
        psi.setflags(write=False)
        return psi


@dataclass(frozen=True)
class CarnotAlgebra:
    constants: StructureConstants
    strat: Stratification
    labels: tuple = ()

    def __post_init__(self):
        if sum(self.strat.layer_dims) != self.constants.dim:
            raise AlgebraError("stratification does not cover the basis")
        if not self.labels:
            labels = [""] * self.dim
            for m, lay in enumerate(self.strat.layers, start=1):
                for pos, i in enumerate(lay, start=1):
                    labels[i] = f"e_{{{m},{pos}}}"
            object.__setattr__(self, "labels", tuple(labels))
        elif len(self.labels) != self.dim:
            raise AlgebraError("label count does not match dimension")
        else:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.constants.dim

    @property
    def step(self) -> int:
        return self.strat.step

    @property
    def layer_of(self) -> np.ndarray:
        return self.strat.layer_of


@dataclass(frozen=True)
class HeintzeAlgebra:
    """Carnot algebra extended by a vertical generator A acting by ``ad A = diag(psi)``.

    The vertical generator occupies the last basis slot.
    """

    nil: CarnotAlgebra
    constants: StructureConstants = field(repr=False, default=None)
    lam: float = 1.0

    def __post_init__(self):
        if self.lam != 1.0:
            raise AlgebraError("only the normalized dilation rate lam = 1 is supported")
        if self.constants is None:
            n = self.nil.dim
            ents = list(self.nil.constants.entries)
            ents += [(n, m, m, float(self.nil.layer_of[m])) for m in range(n)]
            object.__setattr__(self, "constants", StructureConstants(n + 1, tuple(ents)))

    @property
    def vertical_index(self) -> int:
        return self.nil.dim

    @property
    def dim(self) -> int:
        return self.nil.dim + 1

    @property
    def step(self) -> int:
        return self.nil.step

    @property
    def labels(self) -> tuple:
        return self.nil.labels + ("A",)

    @property
    def layer_of(self) -> np.ndarray:
        """Layer index per basis slot; the vertical slot gets 0."""
        return np.append(self.nil.layer_of, 0)

    def vertical(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[-1] = 1.0
        return e


def _constants(alg) -> StructureConstants:
    if isinstance(alg, StructureConstants):
        return alg
    return alg.constants


def bracket(alg, u, v) -> np.ndarray:
    """Bracket of coefficient vectors; bilinear and antisymmetric."""
    c = _constants(alg)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (c.dim,) or v.shape != (c.dim,):
        raise AlgebraError(f"expected vectors of length {c.dim}, got {u.shape} and {v.shape}")
    out = np.zeros(c.dim)
    for i, j, k, val in c.entries:
        out[k] += val * (u[i] * v[j] - u[j] * v[i])
    return out


def jacobi_residual(alg) -> float:
    """Max-norm of the Jacobi sum over all basis triples."""
    t = _constants(alg).tensor
    # [[e_i,e_j],e_k] = sum_m C[i,j,m] C[m,k,:]
    dbl = np.einsum("ijm,mkl->ijkl", t, t)
    jac = dbl + np.transpose(dbl, (1, 2, 0, 3)) + np.transpose(dbl, (2, 0, 1, 3))
    return float(np.max(np.abs(jac))) if jac.size else 0.0


def _bracket_span(t: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Columns spanning [span(left), span(right)]."""
    if left.shape[1] == 0 or right.shape[1] == 0:
        return np.zeros((t.shape[0], 0))
    prods = np.einsum("ia,jb,ijk->kab", left, right, t)
    return prods.reshape(t.shape[0], -1)


def lower_central_series(alg, tol: float = RANK_TOL):
    """Bases of g, [g,g], [g,[g,g]], ... down to zero, and the nilpotency step.

    Returns ``(bases, step)`` where ``bases[-1]`` has zero columns and
    ``step == len(bases) - 1``.
    """
    c = _constants(alg)
    t = c.tensor
    full = np.eye(c.dim)
    bases = [full]
    current = full
    while current.shape[1] > 0:
        nxt = span_basis(_bracket_span(t, full, current), tol)
        if nxt.shape[1] == current.shape[1]:
            raise NotNilpotentError(
                f"lower central series stabilizes at dimension {nxt.shape[1]}", nxt
            )
        bases.append(nxt)
        current = nxt
    return bases, len(bases) - 1


@dataclass
class ValidationReport:
    ok: bool
    failures: list = field(default_factory=list)
    off_grade: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "failures": list(self.failures),
            "off_grade": [[i + 1, j + 1, k + 1, v] for i, j, k, v in self.off_grade],
        }


def validate_stratification(carnot: CarnotAlgebra, tol: float = RANK_TOL) -> ValidationReport:
    c = carnot.constants
    t = c.tensor
    psi = carnot.layer_of
    s = carnot.step
    layers = carnot.strat.layers
    failures = []
    off_grade = [(i, j, k, v) for i, j, k, v in c.entries if psi[k] != psi[i] + psi[j]]
    if off_grade:
        failures.append(f"{len(off_grade)} structure constants violate the grading")
    eye = np.eye(c.dim)
    v1 = eye[:, list(layers[0])]
    for j in range(1, s + 1):
        vj = eye[:, list(layers[j - 1])]
        prods = _bracket_span(t, v1, vj)
        if j == s:
            if np.any(np.abs(prods) > tol):
                failures.append(f"[V1,V{s}] != 0")
            continue
        target = list(layers[j])
        outside = np.delete(prods, target, axis=0)
        if np.any(np.abs(outside) > tol):
            failures.append(f"[V1,V{j}] not contained in V{j + 1}")
        if column_rank(prods[target, :], tol) != len(target):
            failures.append(f"[V1,V{j}] does not span V{j + 1}")
    return ValidationReport(ok=not failures, failures=failures, off_grade=off_grade)


def standard_dilation(carnot: CarnotAlgebra, lam: float) -> np.ndarray:
    """Diagonal automorphism scaling layer i by ``lam**i``."""
    if lam == 0:
        raise AlgebraError("lam = 0 is not an automorphism")
    return np.diag(float(lam) ** carnot.layer_of.astype(float))


def heintze_extension(carnot: CarnotAlgebra) -> HeintzeAlgebra:
    report = validate_stratification(carnot)
    if not report.ok:
        raise AlgebraError("unstratified input: " + "; ".join(report.failures))
    return HeintzeAlgebra(carnot)


def rationality_check(alg, max_denominator: int, tol: float):
    """Whether every structure constant is within ``tol`` of a fraction p/q, q <= max_denominator.

    This is only a sufficient, basis-dependent certificate for the existence of a
    lattice; failure says nothing about other bases.  Returns ``(ok, witness)``:
    the approximating fractions on success, else the first offending entry.
    """
    approx = {}
    for i, j, k, v in _constants(alg).entries:
        frac = Fraction(v).limit_denominator(max_denominator)
        if abs(float(frac) - v) > tol:
            return False, {"entry": (i, j, k), "value": v, "best": frac}
        approx[(i, j, k)] = frac
    return True, approx


def basis_change(alg: StructureConstants, p: np.ndarray) -> StructureConstants:
    """Structure constants in the basis whose vectors are the columns of ``p``."""
    t = alg.tensor
    pinv = np.linalg.inv(p)
    new = np.einsum("ia,jb,ijk,ck->abc", p, p, t, pinv)
    new[np.abs(new) < 1e-15 * max(1.0, np.max(np.abs(new), initial=0.0))] = 0.0
    return StructureConstants.from_tensor(new)


def rescale_basis(carnot: CarnotAlgebra, scales) -> CarnotAlgebra:
    """Carnot algebra in the basis ``e_i * scales[i]`` (diagonal change, exact for dyadic scales)."""
    scales = np.asarray(scales, dtype=float)
    ents = tuple(
        (i, j, k, v * scales[i] * scales[j] / scales[k]) for i, j, k, v in carnot.constants.entries
    )
    return CarnotAlgebra(StructureConstants(carnot.dim, ents), carnot.strat, carnot.labels)


def jacobi_violations(alg, tol: float = JACOBI_TOL) -> list[tuple[int, int, int, float]]:
    """Basis triples i < j < k whose Jacobi sum exceeds ``tol`` (max-norm)."""
    t = _constants(alg).tensor
    n = t.shape[0]
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                jac = t[i, j] @ t[:, k] + t[j, k] @ t[:, i] + t[k, i] @ t[:, j]
                worst = float(np.max(np.abs(jac)))
                if worst > tol:
                    out.append((i, j, k, worst))
    return out
