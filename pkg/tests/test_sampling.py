import numpy as np
import pytest

from blockcorr.blocks import BlockSpec
from blockcorr.errors import InvalidCovarianceError, ScenarioError
from blockcorr.sampling import (
    Population,
    RngStream,
    covariance_factor,
    gaussian_sample,
    haar_frame,
    haar_orthogonal,
    haar_orthogonal_batch,
    scenario_population,
)


def test_stream_is_a_pure_value():
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    c = RngStream(7, 4).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_stream_rejects_out_of_range_seed():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(0, 2**64)


def test_distinct_streams_uncorrelated():
    x = np.array([RngStream(1, i).generator().standard_normal() for i in range(4000)])
    y = np.array([RngStream(1, i).generator().standard_normal(2)[1] for i in range(4000)])
    z = np.array([RngStream(2, i).generator().standard_normal() for i in range(4000)])
    assert abs(np.corrcoef(x, z)[0, 1]) < 4 / np.sqrt(4000)
    assert abs(np.corrcoef(x, y)[0, 1]) < 4 / np.sqrt(4000)


@pytest.mark.parametrize("N", [1, 2, 5, 17, 60])
def test_haar_is_orthogonal(N):
    O = haar_orthogonal(N, RngStream(3, N))
    assert np.abs(O.T @ O - np.eye(N)).max() <= 1e-10


def test_haar_n1_is_plus_minus_one():
    vals = haar_orthogonal_batch(1, 20_000, RngStream(5)).ravel()
    assert set(np.unique(vals)) == {-1.0, 1.0}
    frac = np.mean(vals > 0)
    assert abs(frac - 0.5) < 3 * 0.5 / np.sqrt(vals.size)


def test_haar_second_and_fourth_moments():
    O = haar_orthogonal_batch(8, 100_000, RngStream(11))
    x2 = O[:, 0, 0] ** 2
    x4 = O[:, 0, 0] ** 4
    assert abs(x2.mean() - 1 / 8) <= 3 * x2.std(ddof=1) / np.sqrt(x2.size)
    assert abs(x4.mean() - 3 / 80) <= 3 * x4.std(ddof=1) / np.sqrt(x4.size)


def test_unsigned_qr_is_not_haar():
    # Without the sign fix numpy's QR gives diag(R) <= 0 conventions that bias O_11.
    g = RngStream(2).generator().standard_normal((50_000, 4, 4))
    q, _ = np.linalg.qr(g)
    fixed = haar_orthogonal_batch(4, 50_000, RngStream(2))
    se = 1 / np.sqrt(50_000)
    assert abs(fixed[:, 0, 0].mean()) < 4 * se
    assert abs(q[:, 0, 0].mean()) > 20 * se


def test_haar_left_invariance():
    N, reps = 4, 100_000
    F = haar_orthogonal(N, RngStream(99))
    O = haar_orthogonal_batch(N, reps, RngStream(100))
    FO = np.matmul(F, O)
    for M in (O, FO):
        row = M[:, 0, :]
        prods = row[:, :, None] * row[:, None, :]
        mean = prods.mean(axis=0)
        se = prods.std(axis=0, ddof=1) / np.sqrt(reps)
        target = np.eye(N) / N
        off = ~np.eye(N, dtype=bool)
        assert np.all(np.abs(mean - target)[~off] <= 4 * se[~off])
        assert np.all(np.abs(mean - target)[off] <= 4 * se[off])


def test_haar_frame_matches_full_matrix_columns():
    gen_a = RngStream(4).generator()
    gen_b = RngStream(4).generator()
    frame = haar_frame(6, 6, gen_a)
    full = haar_orthogonal(6, gen_b)
    np.testing.assert_allclose(frame, full, atol=1e-12)
    U = haar_frame(30, 7, RngStream(8))
    assert np.abs(U.T @ U - np.eye(7)).max() < 1e-12


def test_degenerate_covariance_returns_mean():
    pop = Population(np.array([1.0, 2.0, 3.0]), np.zeros((3, 3)))
    X = gaussian_sample(pop, 10, RngStream(1))
    assert np.array_equal(X, np.repeat(pop.mu[:, None], 10, axis=1))


def test_gaussian_sample_bit_identical():
    pop = scenario_population("III", (2, 2, 3))
    a = gaussian_sample(pop, 20, RngStream(9, 2))
    b = gaussian_sample(pop, 20, RngStream(9, 2))
    assert np.array_equal(a, b)


def test_scenario_I_sample_covariance():
    n = 10_000
    X = gaussian_sample(scenario_population("I", (2, 2, 3)), n, RngStream(6))
    S = np.cov(X)
    assert np.abs(S - np.eye(7)).max() <= 5 / np.sqrt(n)


def test_scenario_III_sample_correlation():
    X = gaussian_sample(scenario_population("III", (2, 2, 3)), 20_000, RngStream(6))
    R = np.corrcoef(X)
    off = R[~np.eye(7, dtype=bool)]
    assert np.abs(off - 0.15).max() < 0.04


def test_covariance_factor_semidefinite():
    v = np.array([[1.0], [2.0], [-1.0]])
    sigma = v @ v.T
    L = covariance_factor(sigma)
    np.testing.assert_allclose(L @ L.T, sigma, atol=1e-12)


def test_covariance_factor_rejects_indefinite():
    with pytest.raises(InvalidCovarianceError):
        covariance_factor(np.diag([1.0, -0.1]))


def test_population_rejects_asymmetric():
    with pytest.raises(InvalidCovarianceError):
        Population(np.zeros(2), np.array([[1.0, 0.2], [0.1, 1.0]]))


def test_scenarios_published_structure():
    pop = scenario_population("I", (2, 2, 3))
    assert np.array_equal(pop.mu, np.zeros(7)) and np.array_equal(pop.sigma, np.eye(7))

    pop = scenario_population("IV", (2, 2, 3))
    s12 = pop.sigma[0:2, 2:4]
    np.testing.assert_array_equal(s12, np.diag([0.04, 0.04]))
    s13 = pop.sigma[0:2, 4:7]
    np.testing.assert_array_equal(s13, np.eye(2, 3) * 6 / 25)
    np.testing.assert_array_equal(np.diag(pop.sigma), np.full(7, 26 / 25))

    pop = scenario_population("III", (1, 1, 1))
    np.testing.assert_allclose(pop.sigma, [[1, .15, .15], [.15, 1, .15], [.15, .15, 1]])


def test_scenario_IV_needs_three_blocks():
    with pytest.raises(ScenarioError):
        scenario_population("IV", (2, 2))


def test_scenario_II_diagonal_chi2():
    d = []
    for i in range(400):
        pop = scenario_population("II", (3, 3, 4), RngStream(12, i))
        assert np.count_nonzero(pop.sigma - np.diag(np.diag(pop.sigma))) == 0
        assert np.all(np.abs(pop.mu) < 1)
        d.append(np.diag(pop.sigma))
    d = np.concatenate(d)
    assert abs(d.mean() - 8) < 3 * 4 / np.sqrt(d.size)  # chi2_8 has sd 4


def test_blockspec_validation():
    assert BlockSpec.parse("10,10,15").sizes == (10, 10, 15)
    with pytest.raises(ValueError):
        BlockSpec(())
    with pytest.raises(ValueError):
        BlockSpec((2, 0))
