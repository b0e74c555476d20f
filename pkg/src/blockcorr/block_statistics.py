"""Block correlation matrix, its reduced companion and the Schott type statistic.

Data matrices are ``p x n`` with observations in columns.  Every block is
whitened by the inverse symmetric square root of its Gram matrix,

    W_i = (X_i X_i')^{-1/2} X_i,

so that the block correlation matrix is ``B = W W'`` (``p x p``) and the
reduced matrix is ``W' W`` computed on Helmert-reduced data
(``(n-1) x (n-1)``).  Both share their nonzero spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .blocks import BlockSpec, as_spec
from .errors import BlockSpecError, InsufficientObservationsError, SingularBlockError

__all__ = [
    "BlockCorrelation",
    "ReducedMatrix",
    "SINGULAR_TOL",
    "as_data",
    "center_columns",
    "helmert_matrix",
    "helmert_reduce",
    "whiten_blocks",
    "block_correlation",
    "reduced_matrix",
    "pillai_trace",
    "schott_statistic",
]

SINGULAR_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BlockCorrelation:
    matrix: np.ndarray
    spec: BlockSpec

    def block(self, i: int, j: int) -> np.ndarray:
        sl = self.spec.slices()
        return self.matrix[sl[i], sl[j]]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True, eq=False)
class ReducedMatrix:
    matrix: np.ndarray
    spec: BlockSpec
    n: int

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def as_data(X, spec: BlockSpec | Sequence[int] | None = None) -> np.ndarray:
    """Validate a ``p x n`` data matrix (and its row count against ``spec``)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise BlockSpecError(f"data must be a 2-d p x n array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise BlockSpecError("data contains non-finite entries")
    if spec is not None:
        spec = as_spec(spec)
        if X.shape[0] != spec.p:
            raise BlockSpecError(
                f"blocks {spec} cover p = {spec.p} rows but data has {X.shape[0]}"
            )
    return X


def center_columns(X) -> np.ndarray:
    """Subtract the mean observation from every column."""
    X = as_data(X)
    if X.shape[1] < 2:
        raise InsufficientObservationsError(
            f"need at least 2 observations, got {X.shape[1]}"
        )
    return X - X.mean(axis=1, keepdims=True)


def helmert_matrix(n: int) -> np.ndarray:
    """The ``n x n`` orthogonal Helmert matrix.

    Row 0 is ``1/sqrt(n)``; row ``r >= 1`` holds ``1/sqrt(r(r+1))`` in its
    first ``r`` entries and ``-r/sqrt(r(r+1))`` at position ``r``.
    """
    A = np.zeros((n, n))
    A[0] = 1.0 / np.sqrt(n)
    for r in range(1, n):
        c = 1.0 / np.sqrt(r * (r + 1.0))
        A[r, :r] = c
        A[r, r] = -r * c
    return A


def helmert_reduce(Xc) -> np.ndarray:
    """Rotate centered data by the Helmert matrix and drop the zero column.

    Returns ``Z`` of shape ``p x (n-1)`` with ``Z Z' = Xc Xc'``.  Column
    ``r - 1`` of ``Z`` is ``(x_0 + ... + x_{r-1} - r x_r) / sqrt(r(r+1))``,
    evaluated with cumulative sums instead of forming the matrix.
    """
    Xc = as_data(Xc)
    n = Xc.shape[1]
    if n < 2:
        raise InsufficientObservationsError(f"need at least 2 observations, got {n}")
    r = np.arange(1, n, dtype=float)
    head = np.cumsum(Xc, axis=1)[:, :-1]
    return (head - r * Xc[:, 1:]) / np.sqrt(r * (r + 1.0))


def _inv_sqrt_psd(G: np.ndarray, block: int) -> np.ndarray:
    w, v = np.linalg.eigh(G)
    top = w[-1]
    if not top > 0 or w[0] <= SINGULAR_TOL * top:
        ratio = w[0] / top if top > 0 else 0.0
        raise SingularBlockError(block, ratio)
    return (v / np.sqrt(w)) @ v.T


def whiten_blocks(Y: np.ndarray, spec: BlockSpec) -> np.ndarray:
    """Stack of ``(Y_i Y_i')^{-1/2} Y_i`` over the blocks of centered data ``Y``."""
    W = np.empty_like(Y)
    for b, sl in enumerate(spec.slices()):
        Yi = Y[sl]
        W[sl] = _inv_sqrt_psd(Yi @ Yi.T, b) @ Yi
    return W


def _prepare(X, spec):
    spec = as_spec(spec)
    Xc = center_columns(as_data(X, spec))
    return Xc, spec


def block_correlation(X, spec) -> BlockCorrelation:
    """Block correlation matrix ``B`` of the (uncentered) data ``X``.

    Raises
    ------
    SingularBlockError
        If some block Gram matrix has eigenvalue ratio below ``1e-10``;
        this always happens when a block has more rows than ``n - 1``.
    """
    Xc, spec = _prepare(X, spec)
    W = whiten_blocks(Xc, spec)
    B = W @ W.T
    return BlockCorrelation(0.5 * (B + B.T), spec)


def reduced_matrix(X, spec) -> ReducedMatrix:
    """The ``(n-1) x (n-1)`` sum of block projections on Helmert-reduced data."""
    Xc, spec = _prepare(X, spec)
    Z = helmert_reduce(Xc)
    W = whiten_blocks(Z, spec)
    R = W.T @ W
    return ReducedMatrix(0.5 * (R + R.T), spec, Xc.shape[1])


def pillai_trace(X, spec, i: int, j: int) -> float:
    """Pillai trace ``tr C(i, j)``: the sum of squared canonical correlations
    between blocks ``i`` and ``j`` (0-based)."""
    Xc, spec = _prepare(X, spec)
    if i == j:
        raise BlockSpecError("Pillai trace needs two distinct blocks")
    sl = spec.slices()
    for b in (i, j):
        if not 0 <= b < spec.k:
            raise BlockSpecError(f"block index {b} out of range for k = {spec.k}")
    Wi = _inv_sqrt_psd(Xc[sl[i]] @ Xc[sl[i]].T, i) @ Xc[sl[i]]
    Wj = _inv_sqrt_psd(Xc[sl[j]] @ Xc[sl[j]].T, j) @ Xc[sl[j]]
    return float(np.sum((Wi @ Wj.T) ** 2))


def schott_statistic(X, spec, route: str = "auto") -> float:
    """Schott type statistic ``s = tr(B^2)/2 - p/2``.

    Parameters
    ----------
    X : array_like, shape (p, n)
    spec : BlockSpec or sequence of int
    route : {"auto", "B", "reduced"}
        ``"auto"`` uses the reduced ``(n-1) x (n-1)`` matrix when ``n - 1 < p``
        and ``B`` otherwise.

    Returns
    -------
    float
        Equal to the sum of the Pillai traces over block pairs ``i < j``.
    """
    Xc, spec = _prepare(X, spec)
    n = Xc.shape[1]
    if route == "auto":
        route = "reduced" if n - 1 < spec.p else "B"
    if route == "B":
        W = whiten_blocks(Xc, spec)
        M = W @ W.T
    elif route == "reduced":
        W = whiten_blocks(helmert_reduce(Xc), spec)
        M = W.T @ W
    else:
        raise ValueError(f"unknown route {route!r}")
    return 0.5 * float(np.sum(M * M)) - 0.5 * spec.p
