"""Small dense linear-algebra helpers shared across modules."""
from __future__ import annotations

import numpy as np
from scipy.linalg import qr

RANK_TOL = 1e-10


def column_rank(mat: np.ndarray, tol: float = RANK_TOL) -> int:
    """Numerical rank via column-pivoted QR; tolerance is relative to the largest pivot."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.size == 0:
        return 0
    _, r, _ = qr(mat, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.sum(diag > tol * max(1.0, diag[0])))


def span_basis(mat: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal (Euclidean) basis for the column span of ``mat``, shape (n, rank)."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.shape[1] == 0:
        return np.zeros((mat.shape[0], 0))
    q, r, _ = qr(mat, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((mat.shape[0], 0))
    rank = int(np.sum(diag > tol * max(1.0, diag[0])))
    return q[:, :rank]


def orthonormal_frame(gram: np.ndarray, blocks=None) -> np.ndarray:
    """Columns form a g-orthonormal frame: ``F.T @ gram @ F = I``.

    With ``blocks`` (a list of index lists) the frame is built block by block,
    so a layered-orthogonal gram yields a frame that respects the layers.
    """
    gram = np.asarray(gram, dtype=float)
    n = gram.shape[0]
    if blocks is None:
        blocks = [list(range(n))]
    frame = np.zeros((n, n))
    for idx in blocks:
        idx = list(idx)
        if not idx:
            continue
        sub = gram[np.ix_(idx, idx)]
        if np.count_nonzero(sub - np.diag(np.diag(sub))) == 0:
            frame[idx, idx] = 1.0 / np.sqrt(np.diag(sub))
        else:
            chol = np.linalg.cholesky(sub)
            frame[np.ix_(idx, idx)] = np.linalg.inv(chol).T
    return _reorthogonalize(frame, gram)


def _reorthogonalize(frame: np.ndarray, gram: np.ndarray) -> np.ndarray:
    # one correction pass F <- F (F^T G F)^{-1/2}; no-op when already exact
    m = frame.T @ gram @ frame
    if np.array_equal(m, np.eye(len(m))):
        return frame
    w, v = np.linalg.eigh(m)
    return frame @ (v * (1.0 / np.sqrt(w))) @ v.T


def is_block_orthogonal(gram: np.ndarray, blocks, tol: float = 0.0) -> bool:
    gram = np.asarray(gram, dtype=float)
    label = np.empty(gram.shape[0], dtype=int)
    for b, idx in enumerate(blocks):
        label[list(idx)] = b
    off = label[:, None] != label[None, :]
    return bool(np.all(np.abs(gram[off]) <= tol))


def orthonormalize_pair(u, v, gram, min_det: float = 1e-10):
    """Gram-Schmidt on (u, v) in the inner product ``gram``; raises on degenerate planes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    uu = u @ gram @ u
    vv = v @ gram @ v
    uv = u @ gram @ v
    det = uu * vv - uv * uv
    if not (uu > 0 and vv > 0) or det <= min_det * uu * vv:
        raise ValueError("degenerate plane: Gram determinant below tolerance")
    e1 = u / np.sqrt(uu)
    w = v - (e1 @ gram @ v) * e1
    # second pass for stability
    w = w - (e1 @ gram @ w) * e1
    e2 = w / np.sqrt(w @ gram @ w)
    return e1, e2
