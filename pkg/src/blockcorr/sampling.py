"""Seedable random generation: Haar orthogonal matrices, Gaussian data and
the four simulation populations (two null, two alternative).

Every routine takes either an :class:`RngStream` or a ready
``numpy.random.Generator``.  A stream is a pure value: building its
generator twice gives the same draws, so replicate ``r`` of an experiment
with seed ``s`` is always ``RngStream(s, r)`` whatever the execution order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.linalg import lapack

from .blocks import BlockSpec, as_spec
from .errors import InvalidCovarianceError, ScenarioError

__all__ = [
    "RngStream",
    "Population",
    "as_generator",
    "haar_orthogonal",
    "haar_orthogonal_batch",
    "haar_frame",
    "gaussian_sample",
    "covariance_factor",
    "scenario_population",
    "SCENARIOS",
]

SCENARIOS = ("I", "II", "III", "IV")

_UINT64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """Counter-keyed random stream ``(seed, stream_index)``.

    Streams are derived with :class:`numpy.random.SeedSequence` using the
    index as spawn key, so distinct indices give independent PCG64 streams.
    """

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_index"):
            v = int(getattr(self, name))
            if not 0 <= v < _UINT64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")
            object.__setattr__(self, name, v)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, index)


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _sign_corrected_qr(g: np.ndarray) -> np.ndarray:
    # Works on stacks; column j of Q is multiplied by sign(R_jj).
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    s = np.where(d < 0, -1.0, 1.0)
    return q * s[..., None, :]


def haar_orthogonal(N: int, rng: RngLike) -> np.ndarray:
    """Draw an ``N x N`` orthogonal matrix from the Haar measure.

    Uses the QR factorisation of a standard Gaussian matrix with the
    columns of ``Q`` re-signed so that ``diag(R) > 0``.  Without that
    correction the result is not Haar distributed.

    Parameters
    ----------
    N : int
        Dimension, ``N >= 1``.
    rng : RngStream or numpy.random.Generator

    Returns
    -------
    ndarray of shape (N, N)
    """
    N = _check_dim(N)
    g = as_generator(rng).standard_normal((N, N))
    return _sign_corrected_qr(g)


def haar_orthogonal_batch(N: int, count: int, rng: RngLike) -> np.ndarray:
    """``count`` independent Haar matrices stacked as ``(count, N, N)``."""
    N = _check_dim(N)
    if count < 1:
        raise ValueError("count must be positive")
    g = as_generator(rng).standard_normal((count, N, N))
    return _sign_corrected_qr(g)


def haar_frame(N: int, r: int, rng: RngLike, count: int | None = None) -> np.ndarray:
    """First ``r`` columns of a Haar orthogonal ``N x N`` matrix.

    The first ``r`` columns of ``Q`` in a QR factorisation only depend on
    the first ``r`` columns of the Gaussian input, so the reduced QR of an
    ``N x r`` Gaussian matrix has exactly the law of those columns.  With
    ``count`` set, returns a stack ``(count, N, r)``.
    """
    N = _check_dim(N)
    if not 1 <= r <= N:
        raise ValueError(f"frame width must be in [1, {N}], got {r}")
    shape = (N, r) if count is None else (count, N, r)
    g = as_generator(rng).standard_normal(shape)
    return _sign_corrected_qr(g)


def _check_dim(N) -> int:
    N = int(N)
    if N < 1:
        raise ValueError(f"dimension must be positive, got {N}")
    return N


@dataclass(frozen=True, eq=False)
class Population:
    """Gaussian population ``N(mu, sigma)`` for a ``p``-vector."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        sigma = np.asarray(self.sigma, dtype=float)
        p = mu.size
        if sigma.shape != (p, p):
            raise InvalidCovarianceError(
                f"covariance shape {sigma.shape} does not match mean length {p}"
            )
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise InvalidCovarianceError("population parameters must be finite")
        scale = max(np.abs(sigma).max(initial=0.0), np.finfo(float).tiny)
        if np.abs(sigma - sigma.T).max(initial=0.0) > 1e-12 * scale:
            raise InvalidCovarianceError("covariance is not symmetric")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def p(self) -> int:
        return self.mu.size


def covariance_factor(sigma: np.ndarray) -> np.ndarray:
    """Factor ``L`` with ``L @ L.T == sigma`` for a PSD covariance.

    Pivoted Cholesky handles rank deficiency; if its reconstruction is off
    the factor falls back to the clipped eigen-decomposition.  Eigenvalues
    below ``-1e-8 * ||sigma||`` are an error.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    norm = np.linalg.norm(sigma, 2) if p else 0.0
    if norm == 0.0:
        return np.zeros_like(sigma)
    w, v = np.linalg.eigh(sigma)
    if w[0] < -1e-8 * norm:
        raise InvalidCovarianceError(
            f"covariance has eigenvalue {w[0]:.3e} < -1e-8 * ||Sigma||"
        )
    c, piv, rank, info = lapack.dpstrf(sigma, lower=1)
    if info >= 0:
        L = np.tril(c)
        L[:, rank:] = 0.0
        factor = np.empty_like(L)
        factor[piv - 1, :] = L
        if np.abs(factor @ factor.T - sigma).max() <= 1e-10 * norm:
            return factor
    return v * np.sqrt(np.clip(w, 0.0, None))


def gaussian_sample(pop: Population, n: int, rng: RngLike, factor=None) -> np.ndarray:
    """Draw ``n`` i.i.d. observations of ``N(mu, sigma)`` as a ``p x n`` matrix.

    ``factor`` may carry a precomputed :func:`covariance_factor` of
    ``pop.sigma`` to skip the factorisation in tight loops.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    L = covariance_factor(pop.sigma) if factor is None else factor
    g = as_generator(rng).standard_normal((pop.p, n))
    return pop.mu[:, None] + L @ g


def _partial_identity(rows: int, cols: int) -> np.ndarray:
    return np.eye(rows, cols)


def scenario_population(
    scenario: str,
    spec: BlockSpec | Sequence[int],
    rng: RngLike | None = None,
    *,
    equicorrelation: float = 0.15,
) -> Population:
    """Population of one of the four simulation scenarios.

    ``I``   zero mean, identity covariance (null).
    ``II``  means ``U(-1, 1)``, diagonal covariance with ``chi2_8`` entries
            (null; consumes ``rng``).
    ``III`` zero mean, ``c * ones + (1 - c) * I`` with ``c = 0.15``.
    ``IV``  three blocks only: ``Sigma_ii = 26/25 I``, ``Sigma_12 = 1/25 J``,
            ``Sigma_13 = Sigma_23 = 6/25 J`` where ``J`` is the rectangular
            partial identity.

    ``equicorrelation`` changes ``c`` in scenario III (used for monotonicity
    checks); the default is the published value.
    """
    spec = as_spec(spec)
    scenario = str(scenario).upper()
    p = spec.p
    if scenario == "I":
        return Population(np.zeros(p), np.eye(p))
    if scenario == "II":
        if rng is None:
            raise ScenarioError("scenario II needs a random stream")
        gen = as_generator(rng)
        mu = gen.uniform(-1.0, 1.0, size=p)
        d = gen.chisquare(8, size=p)
        return Population(mu, np.diag(d))
    if scenario == "III":
        c = float(equicorrelation)
        return Population(np.zeros(p), c * np.ones((p, p)) + (1.0 - c) * np.eye(p))
    if scenario == "IV":
        if spec.k != 3:
            raise ScenarioError(f"scenario IV is defined for k = 3 blocks, got k = {spec.k}")
        sigma = (26.0 / 25.0) * np.eye(p)
        sl = spec.slices()
        for (i, j), w in {(0, 1): 1.0 / 25.0, (0, 2): 6.0 / 25.0, (1, 2): 6.0 / 25.0}.items():
            block = w * _partial_identity(spec.sizes[i], spec.sizes[j])
            sigma[sl[i], sl[j]] = block
            sigma[sl[j], sl[i]] = block.T
        return Population(np.zeros(p), sigma)
    raise ScenarioError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
