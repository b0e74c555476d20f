from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from blockcorr.errors import (
    BlockSpecError,
    DegenerateTestError,
    InsufficientObservationsError,
    WilksInapplicableError,
)
from blockcorr.sampling import RngStream, gaussian_sample, scenario_population
from blockcorr.schott import (
    groupwise_scan,
    null_params,
    null_params_exact,
    p_value,
    schott_test,
    wilks_test,
)


def pair_oracle(sizes, n):
    """Term-by-term sum over ordered pairs i != j."""
    N = n - 1
    a = Fraction(0)
    b = Fraction(0)
    for i, pi in enumerate(sizes):
        for j, pj in enumerate(sizes):
            if i != j:
                a += Fraction(pi * pj, N) / 2
                b += Fraction(pi * pj * (N - pi) * (N - pj), N**4)
    return a, b


def _scenario_data(scenario, sizes, n, seed, idx=0):
    return gaussian_sample(scenario_population(scenario, sizes), n, RngStream(seed, idx))


def test_null_params_small_case():
    a, b = null_params_exact((2, 2, 3), 10)
    assert a == Fraction(16, 9) and b == Fraction(1400, 6561)
    np_ = null_params((2, 2, 3), 10)
    assert np_.a_n == pytest.approx(1.777778, abs=1e-6)
    assert np_.b_n == pytest.approx(0.213382, abs=1e-6)


def test_null_params_medium_case():
    assert null_params_exact((10, 10, 15), 50)[0] == Fraction(400, 49)


def test_null_params_single_block():
    assert null_params_exact((4,), 12) == (0, 0)


def test_null_params_preconditions():
    with pytest.raises(BlockSpecError):
        null_params((5, 2), 5)
    with pytest.raises(InsufficientObservationsError):
        null_params((1, 1), 2)


@settings(max_examples=100, deadline=None)
@given(sizes=st.lists(st.integers(1, 40), min_size=1, max_size=8), extra=st.integers(0, 200))
def test_null_params_match_pair_oracle(sizes, extra):
    n = max(3, max(sizes) + 1 + extra)
    assert null_params_exact(sizes, n) == pair_oracle(sizes, n)


def test_centered_statistic_gives_half():
    assert p_value(0.0) == 0.5
    assert p_value(0.0, "two_sided") == 1.0
    with pytest.raises(ValueError):
        p_value(0.0, "lower")


def test_p_value_tails():
    assert p_value(1.959963984540054, "two_sided") == pytest.approx(0.05, abs=1e-12)
    assert p_value(1.6448536269514722) == pytest.approx(0.05, abs=1e-12)


def test_schott_test_fields():
    X = _scenario_data("I", (2, 2, 3), 30, 1)
    res = schott_test(X, (2, 2, 3))
    a, b = null_params_exact((2, 2, 3), 30)
    assert res.a_n == float(a) and res.b_n == float(b)
    assert res.z == pytest.approx((res.statistic - res.a_n) / np.sqrt(res.b_n), rel=1e-14)
    assert res.p_value == pytest.approx(stats.norm.sf(res.z), rel=1e-14)
    assert res.reject == (res.p_value <= 0.05)
    assert res.ratios == (2 / 30, 2 / 30, 3 / 30)
    two = schott_test(X, (2, 2, 3), alternative="two-sided")
    assert two.p_value == pytest.approx(2 * stats.norm.sf(abs(res.z)), rel=1e-14)
    assert "decision" in res.summary()


def test_schott_test_rejects_single_block_and_bad_alpha():
    X = _scenario_data("I", (4,), 20, 1)
    with pytest.raises(DegenerateTestError):
        schott_test(X, (4,))
    X = _scenario_data("I", (2, 2), 20, 1)
    with pytest.raises(ValueError):
        schott_test(X, (2, 2), alpha=0.0)


def test_schott_test_detects_strong_dependence():
    rng = RngStream(3).generator()
    x = rng.standard_normal((3, 60))
    X = np.vstack([x, x + 0.1 * rng.standard_normal((3, 60))])
    assert schott_test(X, (3, 3)).p_value < 1e-10


def test_wilks_degrees_of_freedom():
    res = wilks_test(_scenario_data("I", (2, 2, 3), 50, 2), (2, 2, 3))
    assert res.rho == 16
    assert 0 <= res.W_n <= 1 + 1e-10


def test_wilks_matches_determinant_oracle():
    sizes = (2, 2, 3)
    X = _scenario_data("III", sizes, 40, 4)
    S = np.cov(X)
    W = np.linalg.det(S) / (np.linalg.det(S[:2, :2]) * np.linalg.det(S[2:4, 2:4]) * np.linalg.det(S[4:, 4:]))
    res = wilks_test(X, sizes)
    n, d2, d3 = 40, 49 - 17, 343 - 43
    kappa = 1 - (2 * d3 + 9 * d2) / (6 * n * d2)
    stat = -2 * kappa * (n / 2) * np.log(W)
    assert res.W_n == pytest.approx(W, rel=1e-10)
    assert res.kappa == pytest.approx(kappa, rel=1e-14)
    assert res.statistic == pytest.approx(stat, rel=1e-9)
    assert res.p_value == pytest.approx(stats.chi2.sf(stat, 16), rel=1e-9)


def test_wilks_block_diagonal_sample_covariance():
    # rows of distinct blocks are built orthogonal after centering
    rng = RngStream(5).generator()
    n = 20
    M = rng.standard_normal((n, 4))
    M -= M.mean(axis=0)
    Q, _ = np.linalg.qr(M)
    X = Q.T * 3.0 + 1.0
    res = wilks_test(X, (2, 2))
    assert res.W_n == pytest.approx(1.0, abs=1e-12)
    assert abs(res.statistic) < 1e-10
    assert res.p_value == pytest.approx(1.0, abs=1e-10)


def test_wilks_inapplicable():
    with pytest.raises(WilksInapplicableError):
        wilks_test(_scenario_data("I", (3, 4), 8, 1), (3, 4))


def test_scan_full_subset_equals_full_test():
    X = _scenario_data("III", (2, 3, 2), 25, 6)
    scan = groupwise_scan(X, (2, 3, 2), 3)
    assert len(scan) == 1 and scan[0][0] == (0, 1, 2)
    assert scan[0][1] == schott_test(X, (2, 3, 2)).p_value


def test_scan_counts_and_order():
    sizes = (1,) * 11
    X = _scenario_data("I", sizes, 30, 7)
    scan = groupwise_scan(X, sizes, 2)
    assert len(scan) == 55
    assert [s for s, _ in scan] == sorted(s for s, _ in scan)
    assert scan[0][1] == schott_test(X[:2], (1, 1)).p_value


def test_scan_finds_copied_blocks():
    rng = RngStream(8).generator()
    x = rng.standard_normal((3, 80))
    X = np.vstack([x, 2 * x + 0.01 * rng.standard_normal((3, 80)),
                   rng.standard_normal((5, 80))])
    pv = dict(groupwise_scan(X, (3, 3, 2, 3), 2))
    assert pv[(0, 1)] < 1e-6
    assert pv[(2, 3)] > 1e-3


def test_scan_rejects_bad_subset_size():
    X = _scenario_data("I", (2, 2), 20, 1)
    with pytest.raises(BlockSpecError):
        groupwise_scan(X, (2, 2), 3)


def test_null_z_is_standard_normal_small():
    z = [schott_test(_scenario_data("I", (3, 3, 4), 60, 9, r), (3, 3, 4)).z for r in range(2000)]
    assert stats.kstest(z, "norm").pvalue > 0.01


def test_mean_z_monotone_in_correlation():
    sizes, n, reps = (3, 3, 4), 30, 1000
    means = []
    for c in (0.15, 0.30):
        pop = scenario_population("III", sizes, equicorrelation=c)
        zs = [schott_test(gaussian_sample(pop, n, RngStream(10, r)), sizes).z for r in range(reps)]
        means.append(np.mean(zs))
    assert means[1] >= means[0]


@pytest.mark.parametrize("scenario", ["I", "III"])
def test_wilks_and_schott_agree(scenario):
    sizes, n, reps = (2, 2, 3), 500, 1000
    agree = 0
    for r in range(reps):
        X = _scenario_data(scenario, sizes, n, 11, r)
        agree += schott_test(X, sizes).reject == wilks_test(X, sizes).reject
    assert agree / reps >= 0.9
