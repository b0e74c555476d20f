"""Haar projection-sum model and Monte Carlo checks of its moments.

The model is ``Q = sum_i O_i' P_i O_i`` with independent Haar orthogonal
``O_i`` of size ``N`` and diagonal rank-``p_i`` projections ``P_i``.  Under
independence the reduced block correlation matrix built from ``n = N + 1``
Gaussian observations has the same law as ``Q``.

Since ``O_i' P_i O_i = U_i U_i'`` where ``U_i`` holds the first ``p_i``
columns of the Haar matrix ``O_i'``, sampling only needs Haar frames
(:func:`blockcorr.sampling.haar_frame`).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np
from scipy import stats

from .blocks import as_spec
from .block_statistics import schott_statistic
from .sampling import (
    RngLike,
    as_generator,
    covariance_factor,
    gaussian_sample,
    haar_frame,
    haar_orthogonal_batch,
    scenario_population,
)

__all__ = [
    "ProjectionSumModel",
    "MomentReport",
    "WEINGARTEN_PATTERNS",
    "sample_Q",
    "sample_trQ2",
    "null_trB2",
    "trq2_mean",
    "trq2_leading_var",
    "weingarten_moment",
    "mc_weingarten",
    "cross_term_mean",
    "mc_cross_term",
    "mc_moments",
]

_CHUNK_FLOATS = 4_000_000


@dataclass(frozen=True)
class ProjectionSumModel:
    """Ambient dimension ``N`` and projection ranks ``(p_1, ..., p_k)``."""

    N: int
    ranks: tuple[int, ...]

    def __post_init__(self):
        N = int(self.N)
        ranks = tuple(int(r) for r in self.ranks)
        if N < 1:
            raise ValueError(f"N must be positive, got {N}")
        if not ranks:
            raise ValueError("need at least one projection")
        bad = [r for r in ranks if not 1 <= r <= N]
        if bad:
            raise ValueError(f"ranks must lie in [1, N={N}], got {bad[0]}")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "ranks", ranks)

    @property
    def p(self) -> int:
        return sum(self.ranks)

    @property
    def k(self) -> int:
        return len(self.ranks)


def sample_Q(model: ProjectionSumModel, rng: RngLike) -> np.ndarray:
    """One draw of the ``N x N`` matrix ``Q``."""
    gen = as_generator(rng)
    U = np.concatenate([haar_frame(model.N, r, gen) for r in model.ranks], axis=1)
    Q = U @ U.T
    return 0.5 * (Q + Q.T)


def sample_trQ2(model: ProjectionSumModel, reps: int, rng: RngLike) -> np.ndarray:
    """``reps`` independent draws of ``tr Q^2``.

    Evaluated as the squared Frobenius norm of ``Q`` (never ``Q @ Q``).
    Draws are taken in fixed-size chunks from a single generator, so the
    output depends only on ``rng``.
    """
    gen = as_generator(rng)
    reps = int(reps)
    N, p = model.N, model.p
    chunk = max(1, min(reps, _CHUNK_FLOATS // (N * max(N, p))))
    out = np.empty(reps)
    for start in range(0, reps, chunk):
        c = min(chunk, reps - start)
        U = np.concatenate([haar_frame(N, r, gen, count=c) for r in model.ranks], axis=2)
        if p < N:
            # ||U U'||_F = ||U' U||_F; the p x p Gram is cheaper
            G = np.matmul(np.swapaxes(U, 1, 2), U)
        else:
            G = np.matmul(U, np.swapaxes(U, 1, 2))
        out[start:start + c] = np.einsum("bij,bij->b", G, G)
    return out


def null_trB2(spec, n: int, reps: int, rng: RngLike) -> np.ndarray:
    """``reps`` draws of ``tr(B^2)`` from independent standard Gaussian blocks."""
    spec = as_spec(spec)
    gen = as_generator(rng)
    pop = scenario_population("I", spec)
    L = covariance_factor(pop.sigma)
    out = np.empty(int(reps))
    for r in range(out.size):
        X = gaussian_sample(pop, n, gen, factor=L)
        out[r] = 2.0 * schott_statistic(X, spec) + spec.p
    return out


def _ordered_pair_sum(values: Sequence) -> Fraction:
    s = sum(values, Fraction(0))
    return s * s - sum((Fraction(v) ** 2 for v in values), Fraction(0))


def trq2_mean(model: ProjectionSumModel, exact: bool = False):
    """Exact ``E tr Q^2 = p + sum_{i != j} p_i p_j / N``."""
    val = model.p + _ordered_pair_sum(model.ranks) / model.N
    return val if exact else float(val)


def trq2_leading_var(model: ProjectionSumModel, exact: bool = False):
    """Leading term ``4 sum_{i != j} p_i p_j (N-p_i)(N-p_j) / N^4`` of ``Var tr Q^2``."""
    N = model.N
    val = 4 * _ordered_pair_sum([r * (N - r) for r in model.ranks]) / Fraction(N) ** 4
    return val if exact else float(val)


# Canonical 1-based index assignments (rows i, columns j) for each monomial.
WEINGARTEN_PATTERNS = {
    "m2": ((1, 1), (1, 1)),
    "m4_i": ((1, 1, 1, 1), (1, 1, 1, 1)),
    "m4_ii": ((1, 1, 1, 1), (1, 1, 2, 2)),
    "m4_iii": ((1, 1, 2, 2), (1, 1, 2, 2)),
    "m4_iv": ((1, 2, 1, 2), (1, 1, 2, 2)),
}


def weingarten_moment(pattern: str, N: int) -> Fraction:
    """Closed-form Haar expectation of the monomial named by ``pattern``.

    ====== ==================================== ==========================
    name   monomial                             value
    ====== ==================================== ==========================
    m2     O_11^2                               1/N
    m4_i   O_11^4                               3/(N(N+2))
    m4_ii  O_11^2 O_12^2                        1/(N(N+2))
    m4_iii O_11^2 O_22^2                        (N+1)/(N(N-1)(N+2))
    m4_iv  O_11 O_21 O_12 O_22                  -1/(N(N-1)(N+2))
    ====== ==================================== ==========================
    """
    N = int(N)
    if pattern not in WEINGARTEN_PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}; expected one of {sorted(WEINGARTEN_PATTERNS)}")
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    if pattern == "m2":
        return Fraction(1, N)
    if pattern == "m4_i":
        return Fraction(3, N * (N + 2))
    if pattern == "m4_ii":
        return Fraction(1, N * (N + 2))
    if pattern == "m4_iii":
        return Fraction(N + 1, N * (N - 1) * (N + 2))
    return Fraction(-1, N * (N - 1) * (N + 2))


PatternLike = Union[str, tuple]


def mc_weingarten(pattern: PatternLike, N: int, reps: int, rng: RngLike, chunk: int = 20_000):
    """Monte Carlo estimate of a Haar monomial expectation.

    ``pattern`` is a name from :data:`WEINGARTEN_PATTERNS` or an explicit
    pair ``(rows, cols)`` of 1-based index tuples, e.g. ``((1, 1), (1, 2))``.

    Returns
    -------
    (estimate, standard_error)
    """
    if isinstance(pattern, str):
        rows, cols = WEINGARTEN_PATTERNS[pattern]
    else:
        rows, cols = pattern
    if len(rows) != len(cols) or not rows:
        raise ValueError("row and column index tuples must have equal nonzero length")
    if max(rows + cols) > N or min(rows + cols) < 1:
        raise ValueError(f"indices must lie in [1, {N}]")
    reps = int(reps)
    if reps < 100:
        raise ValueError("need at least 100 replicates")
    gen = as_generator(rng)
    ri = np.array(rows) - 1
    ci = np.array(cols) - 1
    vals = np.empty(reps)
    for start in range(0, reps, chunk):
        c = min(chunk, reps - start)
        O = haar_orthogonal_batch(N, c, gen)
        vals[start:start + c] = np.prod(O[:, ri, ci], axis=1)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(reps))


def cross_term_mean(p_i: int, p_j: int, N: int) -> float:
    """Exact ``E tr(O_i'P_iO_i O_j'P_jO_j) = p_i p_j / N``."""
    if not (1 <= p_i <= N and 1 <= p_j <= N):
        raise ValueError("ranks must lie in [1, N]")
    return p_i * p_j / N


def mc_cross_term(p_i: int, p_j: int, N: int, reps: int, rng: RngLike):
    """Monte Carlo mean and standard error of the cross trace ``||U_i' U_j||_F^2``."""
    cross_term_mean(p_i, p_j, N)
    gen = as_generator(rng)
    vals = np.empty(int(reps))
    for r in range(vals.size):
        Ui = haar_frame(N, p_i, gen)
        Uj = haar_frame(N, p_j, gen)
        vals[r] = np.sum((Ui.T @ Uj) ** 2)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size))


@dataclass(frozen=True)
class MomentReport:
    mc_mean: float
    mc_var: float
    mc_k3: float
    se_mean: float
    se_var: float
    se_k3: float
    exact_mean: float
    leading_var: float
    reps: int

    @property
    def mean_z(self) -> float:
        return (self.mc_mean - self.exact_mean) / self.se_mean if self.se_mean > 0 else 0.0

    def skewness(self) -> float:
        return self.mc_k3 / self.mc_var**1.5 if self.mc_var > 0 else 0.0

    def rows(self) -> list[tuple[str, float, float, float]]:
        """``(quantity, monte_carlo, standard_error, closed_form)`` table rows."""
        return [
            ("mean tr Q^2", self.mc_mean, self.se_mean, self.exact_mean),
            ("var tr Q^2", self.mc_var, self.se_var, self.leading_var),
            ("k3 tr Q^2", self.mc_k3, self.se_k3, 0.0),
        ]


def _batch_se(x: np.ndarray, fn, batches: int = 20) -> float:
    parts = np.array_split(x, batches)
    vals = np.array([fn(b) for b in parts])
    return float(vals.std(ddof=1) / np.sqrt(batches))


def mc_moments(model: ProjectionSumModel, reps: int, rng: RngLike) -> MomentReport:
    """Mean, unbiased variance and third k-statistic of ``tr Q^2``.

    The mean's standard error is the usual ``sd / sqrt(reps)``; variance and
    third cumulant use batch standard errors over 20 batches.
    """
    reps = int(reps)
    if reps < 100:
        raise ValueError("need at least 100 replicates")
    x = sample_trQ2(model, reps, rng)

    def var(b):
        return float(np.var(b, ddof=1))

    def k3(b):
        return float(stats.kstat(b, 3))

    return MomentReport(
        mc_mean=float(np.mean(x)),
        mc_var=var(x),
        mc_k3=k3(x),
        se_mean=float(np.std(x, ddof=1) / np.sqrt(reps)),
        se_var=_batch_se(x, var),
        se_k3=_batch_se(x, k3),
        exact_mean=trq2_mean(model),
        leading_var=trq2_leading_var(model),
        reps=reps,
    )
