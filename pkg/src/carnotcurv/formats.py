"""JSON file formats shared by the library and the command line.

Algebra spec: ``{"dim", "labels", "layers", "constants"}`` with 1-based indices
and ``i < j`` in each ``[i, j, k, value]`` constant.  Metric file:
``{"gram", "algebra_ref", "flags", ...}``.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

from .algebra import AlgebraError, CarnotAlgebra, HeintzeAlgebra, Stratification, StructureConstants


def algebra_to_dict(alg) -> dict:
    if isinstance(alg, HeintzeAlgebra):
        alg = alg.nil
    if isinstance(alg, CarnotAlgebra):
        consts, labels = alg.constants, list(alg.labels)
        layers = [[i + 1 for i in lay] for lay in alg.strat.layers]
    else:
        consts, labels, layers = alg, [f"e{i + 1}" for i in range(alg.dim)], None
    out = {
        "dim": consts.dim,
        "labels": labels,
        "constants": [[i + 1, j + 1, k + 1, _num(v)] for i, j, k, v in consts.entries],
    }
    if layers is not None:
        out["layers"] = layers
    return out


def _num(v: float):
    return int(v) if float(v).is_integer() else float(v)


def algebra_from_dict(data: dict):
    """CarnotAlgebra when ``layers`` is present, otherwise bare StructureConstants."""
    try:
        dim = int(data["dim"])
        raw = data.get("constants", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise AlgebraError(f"malformed algebra spec: {exc}") from exc
    ents = []
    for row in raw:
        if len(row) != 4:
            raise AlgebraError(f"constant {row} must be [i, j, k, value]")
        i, j, k, v = row
        if not (isinstance(i, int) and isinstance(j, int) and isinstance(k, int)):
            raise AlgebraError(f"constant {row} has non-integer indices")
        if i >= j:
            raise AlgebraError(f"constant {row} must have i < j")
        ents.append((i - 1, j - 1, k - 1, float(v)))
    consts = StructureConstants(dim, tuple(ents))
    layers = data.get("layers")
    if layers is None:
        return consts
    strat = Stratification(tuple(tuple(i - 1 for i in lay) for lay in layers))
    return CarnotAlgebra(consts, strat, tuple(data.get("labels") or ()))


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=_default)


def spec_hash(alg_or_dict) -> str:
    data = alg_or_dict if isinstance(alg_or_dict, dict) else algebra_to_dict(alg_or_dict)
    return "sha256:" + hashlib.sha256(canonical_json(data).encode()).hexdigest()


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, default=_default) + "\n"


def metric_to_dict(gram, algebra_ref: str, flags: dict, **extra) -> dict:
    out = {"gram": np.asarray(gram, dtype=float).tolist(), "algebra_ref": algebra_ref, "flags": flags}
    out.update(extra)
    return out


def metric_from_dict(data: dict) -> np.ndarray:
    try:
        gram = np.array(data["gram"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed metric file: {exc}") from exc
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise ValueError("metric gram must be a square matrix")
    return gram
