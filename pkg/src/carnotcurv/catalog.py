"""Example Carnot algebras: Heisenberg algebras over normed division algebras,
the nilradical of upper-triangular matrices, and abelian algebras.
"""
from __future__ import annotations

import numpy as np

from .algebra import AlgebraError, CarnotAlgebra, Stratification, StructureConstants

FIELD_DIMS = {"R": 1, "C": 2, "QU": 4, "O": 8}

# Oriented triples (a, b, c) of imaginary units with e_a e_b = e_c.
_QUATERNION_TRIPLES = [(1, 2, 3)]
# Fano plane, e_i e_{i+1} = e_{i+3} (indices mod 7 in 1..7).
_OCTONION_TRIPLES = [(1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3)]


def multiplication_table(field: str) -> np.ndarray:
    """``M[a, b, c]``: coefficient of unit ``e_c`` in ``e_a e_b`` (``e_0 = 1``)."""
    if field not in FIELD_DIMS:
        raise AlgebraError(f"unknown field {field!r}; expected one of {sorted(FIELD_DIMS)}")
    d = FIELD_DIMS[field]
    m = np.zeros((d, d, d))
    for a in range(d):
        m[0, a, a] = 1.0
        m[a, 0, a] = 1.0
    for a in range(1, d):
        m[a, a, 0] = -1.0
    triples = {"C": [], "R": [], "QU": _QUATERNION_TRIPLES, "O": _OCTONION_TRIPLES}[field]
    for a, b, c in triples:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            m[x, y, z] = 1.0
            m[y, x, z] = -1.0
    return m


def multiply(field: str, p, q) -> np.ndarray:
    return np.einsum("a,b,abc->c", p, q, multiplication_table(field))


def conjugate(p) -> np.ndarray:
    p = np.array(p, dtype=float)
    p[1:] *= -1
    return p


def abelian(n: int) -> CarnotAlgebra:
    if n < 1:
        raise AlgebraError("n must be >= 1")
    return CarnotAlgebra(
        StructureConstants(n),
        Stratification((tuple(range(n)),)),
        tuple(f"e_{{1,{i + 1}}}" for i in range(n)),
    )


def heis(field: str, n: int = 1) -> CarnotAlgebra:
    """Heisenberg algebra ``K^n + Im(K)`` with ``[V, W] = Im(sum conj(V_i) W_i)``.

    For ``field = "R"`` the imaginary part is trivial and the algebra is abelian.
    """
    if field not in FIELD_DIMS:
        raise AlgebraError(f"unknown field {field!r}")
    if n < 1:
        raise AlgebraError("n must be >= 1")
    if field == "O" and n != 1:
        raise AlgebraError("octonionic Heisenberg algebra requires n = 1")
    d = FIELD_DIMS[field]
    if d == 1:
        return abelian(n)
    table = multiplication_table(field)
    horiz = n * d
    ents = []
    for slot in range(n):
        for a in range(d):
            for b in range(a + 1, d):
                # conj(e_a) e_b
                sign = 1.0 if a == 0 else -1.0
                prod = sign * table[a, b]
                for c in range(1, d):
                    if prod[c] != 0.0:
                        ents.append((slot * d + a, slot * d + b, horiz + c - 1, prod[c]))
    labels = tuple(f"e_{{1,{i + 1}}}" for i in range(horiz)) + tuple(
        f"e_{{2,{i + 1}}}" for i in range(d - 1)
    )
    strat = Stratification((tuple(range(horiz)), tuple(range(horiz, horiz + d - 1))))
    return CarnotAlgebra(StructureConstants(horiz + d - 1, tuple(ents)), strat, labels)


def sc_nilradical(k: int) -> CarnotAlgebra:
    """Strictly upper-triangular (k+1)x(k+1) matrices under the commutator.

    Basis ``E_{ij}`` (j > i) ordered by layer ``j - i`` and then by row.
    """
    if k < 1:
        raise AlgebraError("k must be >= 1")
    size = k + 1
    pairs = [(i, i + ell) for ell in range(1, size) for i in range(1, size - ell + 1)]
    index = {p: n for n, p in enumerate(pairs)}
    ents = []
    for (i, j), a in index.items():
        for (p, q), b in index.items():
            if a < b:
                # [E_ij, E_pq] = d_jp E_iq - d_qi E_pj
                if j == p:
                    ents.append((a, b, index[(i, q)], 1.0))
                if q == i:
                    ents.append((a, b, index[(p, j)], -1.0))
    layers = tuple(tuple(index[(i, i + ell)] for i in range(1, size - ell + 1)) for ell in range(1, size))
    labels = tuple(f"E_{{{i},{j}}}" for i, j in pairs)
    return CarnotAlgebra(StructureConstants(len(pairs), tuple(ents)), Stratification(layers), labels)


def make_catalog(name: str, **params) -> CarnotAlgebra:
    if name == "heis":
        return heis(params.get("field", "C"), int(params.get("n", 1)))
    if name == "sc_nilradical":
        return sc_nilradical(int(params.get("k", 2)))
    if name == "abelian":
        return abelian(int(params.get("n", 1)))
    raise AlgebraError(f"unknown catalog algebra {name!r}")
