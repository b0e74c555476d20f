"""Independence test based on the Schott type statistic, and the classical
Wilks likelihood-ratio baseline.

Under independence of the ``k`` blocks,

    (s(B) - a_n) / sqrt(b_n)  ->  N(0, 1)

with ``a_n = 1/2 sum_{i != j} p_i p_j / (n-1)`` and
``b_n = sum_{i != j} p_i p_j (n-1-p_i)(n-1-p_j) / (n-1)^4`` (ordered pairs).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from .block_statistics import as_data, center_columns, schott_statistic
from .blocks import BlockSpec, as_spec
from .errors import (
    BlockSpecError,
    DegenerateTestError,
    InsufficientObservationsError,
    SingularBlockError,
    WilksInapplicableError,
)

__all__ = [
    "NullParams",
    "TestResult",
    "WilksResult",
    "ALTERNATIVES",
    "null_params",
    "null_params_exact",
    "p_value",
    "schott_test",
    "wilks_test",
    "groupwise_scan",
]

ALTERNATIVES = ("upper", "two_sided")


@dataclass(frozen=True)
class NullParams:
    a_n: float
    b_n: float
    n: int
    spec: BlockSpec


def null_params_exact(spec, n: int) -> tuple[Fraction, Fraction]:
    """Centering and variance as exact rationals.

    Uses ``sum_{i != j} u_i u_j = (sum u)^2 - sum u^2`` for both sums.
    """
    spec = as_spec(spec)
    n = int(n)
    if n < 3:
        raise InsufficientObservationsError(f"need n >= 3, got {n}")
    N = n - 1
    big = [s for s in spec.sizes if s > N]
    if big:
        raise BlockSpecError(
            f"block size {big[0]} exceeds the effective sample size n - 1 = {N}"
        )
    p = spec.p
    sq = sum(s * s for s in spec.sizes)
    a_n = Fraction(p * p - sq, 2 * N)
    u = [s * (N - s) for s in spec.sizes]
    b_n = Fraction(sum(u) ** 2 - sum(v * v for v in u), N**4)
    return a_n, b_n


def null_params(spec, n: int) -> NullParams:
    """Null centering ``a_n`` and variance ``b_n`` for blocks ``spec`` and ``n`` observations."""
    spec = as_spec(spec)
    a_n, b_n = null_params_exact(spec, n)
    return NullParams(float(a_n), float(b_n), int(n), spec)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    a_n: float
    b_n: float
    z: float
    p_value: float
    alternative: str
    alpha: float
    reject: bool
    ratios: tuple[float, ...]
    n: int
    spec: BlockSpec

    __test__ = False  # not a pytest class

    def summary(self) -> str:
        lines = [
            f"blocks       {self.spec}",
            f"n            {self.n}",
            f"statistic    {self.statistic:.6g}",
            f"a_n          {self.a_n:.6g}",
            f"b_n          {self.b_n:.6g}",
            f"z            {self.z:.6g}",
            f"p-value      {self.p_value:.6g}  ({self.alternative})",
            f"decision     {'reject' if self.reject else 'do not reject'} at alpha={self.alpha:g}",
        ]
        return "\n".join(lines)


def p_value(z: float, alternative: str = "upper") -> float:
    if alternative == "upper":
        return float(stats.norm.sf(z))
    if alternative in ("two_sided", "two-sided"):
        return float(2.0 * stats.norm.sf(abs(z)))
    raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha


def schott_test(X, spec, alpha: float = 0.05, alternative: str = "upper") -> TestResult:
    """Test mutual independence of the blocks of ``X`` (``p x n``).

    The default upper-tailed alternative reflects that the statistic is a sum
    of squared canonical correlations and grows under dependence.  The null
    hypothesis is rejected when the p-value is at most ``alpha``.
    """
    spec = as_spec(spec)
    X = as_data(X, spec)
    alpha = _check_alpha(alpha)
    if alternative == "two-sided":
        alternative = "two_sided"
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    if spec.k < 2:
        raise DegenerateTestError("a single block has zero null variance; need k >= 2")
    n = X.shape[1]
    params = null_params(spec, n)
    if params.b_n <= 0:
        raise DegenerateTestError(f"null variance b_n = 0 for blocks {spec} and n = {n}")
    s = schott_statistic(X, spec)
    z = (s - params.a_n) / np.sqrt(params.b_n)
    pv = p_value(z, alternative)
    return TestResult(
        statistic=s,
        a_n=params.a_n,
        b_n=params.b_n,
        z=float(z),
        p_value=pv,
        alternative=alternative,
        alpha=alpha,
        reject=bool(pv <= alpha),
        ratios=tuple(s_ / n for s_ in spec.sizes),
        n=n,
        spec=spec,
    )


@dataclass(frozen=True)
class WilksResult:
    W_n: float
    Lambda_log: float
    kappa: float
    rho: float
    statistic: float
    p_value: float
    alpha: float
    reject: bool


def _logdet_chol(S: np.ndarray, block: int | None) -> float:
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        if block is None:
            raise WilksInapplicableError("sample covariance is not positive definite") from None
        raise SingularBlockError(block, 0.0) from None
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def wilks_test(X, spec, alpha: float = 0.05) -> WilksResult:
    """Classical fixed-dimension likelihood-ratio test with the Bartlett-type
    correction ``kappa`` and ``chi2_rho`` reference distribution.

    Requires ``n - 1 > p``.
    """
    spec = as_spec(spec)
    X = as_data(X, spec)
    alpha = _check_alpha(alpha)
    if spec.k < 2:
        raise DegenerateTestError("need k >= 2 blocks")
    p, n = X.shape
    if n - 1 <= p:
        raise WilksInapplicableError(f"Wilks test needs n - 1 > p (n = {n}, p = {p})")
    Xc = center_columns(X)
    S = Xc @ Xc.T / (n - 1)
    log_w = _logdet_chol(S, None)
    for b, sl in enumerate(spec.slices()):
        log_w -= _logdet_chol(S[sl, sl], b)
    log_w = min(log_w, 0.0)
    sizes = np.array(spec.sizes, dtype=float)
    d2 = p**2 - np.sum(sizes**2)
    d3 = p**3 - np.sum(sizes**3)
    kappa = 1.0 - (2.0 * d3 + 9.0 * d2) / (6.0 * n * d2)
    rho = 0.5 * d2
    log_lambda = 0.5 * n * log_w
    statistic = -2.0 * kappa * log_lambda + 0.0
    pv = float(stats.chi2.sf(statistic, rho))
    return WilksResult(
        W_n=float(np.exp(log_w)),
        Lambda_log=log_lambda,
        kappa=float(kappa),
        rho=float(rho),
        statistic=float(statistic),
        p_value=pv,
        alpha=alpha,
        reject=bool(pv <= alpha),
    )


def groupwise_scan(
    X,
    spec,
    subset_size: int,
    alpha: float = 0.05,
    alternative: str = "upper",
    return_results: bool = False,
) -> list:
    """Run :func:`schott_test` on every ``subset_size``-subset of the blocks.

    Each subset is tested with its own restricted spec (``a_n``, ``b_n``
    recomputed).  Subsets are 0-based block index tuples in lexicographic
    order.  Returns ``[(subset, p_value), ...]``, or
    ``[(subset, TestResult), ...]`` with ``return_results=True``.
    """
    spec = as_spec(spec)
    X = as_data(X, spec)
    m = int(subset_size)
    if not 2 <= m <= spec.k:
        raise BlockSpecError(f"subset size must lie in [2, {spec.k}], got {m}")
    out = []
    for subset in itertools.combinations(range(spec.k), m):
        sub_spec, rows = spec.subset(subset)
        res = schott_test(X[rows], sub_spec, alpha=alpha, alternative=alternative)
        out.append((subset, res if return_results else res.p_value))
    return out
