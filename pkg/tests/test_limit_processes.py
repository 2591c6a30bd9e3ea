import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geolevy import (
    BrownianMotion,
    ConfigError,
    DomainError,
    PoissonSeriesConfig,
    residual_bound,
    sample_clt_gaussian,
    sample_ou,
    sample_poisson_points,
    sample_stable_series,
)
from geolevy.limit_processes import clt_covariance, ou_rate, stable_series_levels, tau_for_tolerance
from geolevy.rng import substream
from geolevy.stats_verify import frechet_cdf, ks_test


def test_ou_single_point_is_standard_normal(bm):
    x = sample_ou(bm, [3.0], substream(1), size=50_000)[:, 0]
    _, p = ks_test(x, lambda v: __import__("scipy.stats").stats.norm.cdf(v))
    assert p > 1e-3


def test_ou_lag_correlation(bm):
    assert math.exp(ou_rate(bm) * 0.5) == pytest.approx(0.7788007830714049, rel=1e-15)
    x = sample_ou(bm, [-0.5, 0.0, 0.5, 50.0], substream(2), size=200_000)
    c = np.corrcoef(x.T)
    assert c[0, 1] == pytest.approx(math.exp(-0.25), abs=0.01)
    assert c[1, 2] == pytest.approx(math.exp(-0.25), abs=0.01)
    assert c[0, 2] == pytest.approx(math.exp(-0.5), abs=0.01)
    assert abs(c[2, 3]) < 0.01


def test_clt_covariance_values(bm):
    c = clt_covariance(bm, [0.0, 1.0, 2.0])
    assert c[0, 0] == 0.0
    assert c[1, 1] == pytest.approx(math.e**2 - math.e, rel=1e-15)
    assert c[1, 2] == pytest.approx(math.exp(2.5) - math.exp(1.5), rel=1e-15)
    assert np.array_equal(c, c.T)


def test_clt_gaussian_matches_raw_exponential_covariance(bm):
    # the Gaussian limit has the covariance of exp(xi(t)); compare both samplers
    grid = [0.0, 0.5, 1.0]
    g = sample_clt_gaussian(bm, grid, substream(3), size=200_000)
    raw = np.exp(bm.sample_path(grid, substream(4), size=200_000))
    assert np.all(g[:, 0] == 0)
    assert np.cov(g.T) == pytest.approx(np.cov(raw.T), rel=0.05, abs=1e-12)


def test_clt_rejects_negative_time(bm):
    with pytest.raises(DomainError):
        sample_clt_gaussian(bm, [-1.0, 0.0], substream(0))


def test_grid_validation(bm):
    with pytest.raises(DomainError):
        sample_ou(bm, [0.0, 0.0], substream(0))
    with pytest.raises(DomainError, match="negative half-line"):
        sample_stable_series(bm, 0.5, [-1.0, 0.0], PoissonSeriesConfig(tau=0.1), 0)


def test_poisson_points_law():
    gen = substream(5)
    first, counts = [], []
    for _ in range(20_000):
        u = sample_poisson_points(gen, 0.5, 0.5)
        counts.append(u.size)
        if u.size:
            first.append(u[0])
            assert np.all(np.diff(u) < 0) and np.all(u > 0.5)
    counts = np.array(counts)
    expected = 0.5**-0.5
    assert abs(counts.mean() - expected) <= 3 * math.sqrt(expected / counts.size)
    # conditional on U_1 > tau the law is Frechet restricted to (tau, inf)
    f = frechet_cdf(0.5)
    f_tau = float(f(np.array([0.5]))[0])
    _, p = ks_test(first, lambda v: (f(v) - f_tau) / (1 - f_tau))
    assert p > 1e-3


def test_poisson_points_cap_and_empty():
    assert sample_poisson_points(substream(6), 1e12, 1.5).size == 0
    with pytest.raises(ConfigError, match="larger tau"):
        sample_poisson_points(substream(6), 1e-9, 1.0, max_atoms=1000)
    with pytest.raises(DomainError):
        sample_poisson_points(substream(6), 0.1, 2.0)


def test_residual_bound_values(bm):
    assert residual_bound(bm, 0.5, 0.01, [0.0]) == pytest.approx(0.1, rel=1e-14)
    assert residual_bound(bm, 1.5, 0.01, [0.0]) == pytest.approx(math.sqrt(0.3), rel=1e-14)
    assert residual_bound(bm, 0.5, 1e-12, [0.0, 1.0]) < 1e-5


@given(st.floats(0.05, 1.95), st.floats(1e-8, 1.0), st.floats(1.01, 10.0))
def test_residual_bound_increasing_in_tau(alpha, tau, factor):
    bm = BrownianMotion(0.0, 1.0)
    assert residual_bound(bm, alpha, tau, [0.0, 1.0]) < residual_bound(bm, alpha, tau * factor, [0.0, 1.0])


@given(st.floats(0.05, 1.95), st.floats(1e-4, 1.0))
def test_tau_for_tolerance_inverts_bound(alpha, eps):
    bm = BrownianMotion(0.0, 1.0)
    try:
        tau = tau_for_tolerance(bm, alpha, eps, [0.0, 0.5])
    except ConfigError:
        # only when the level leaves floating range, i.e. alpha next to 1
        assert abs(alpha - 1) < 0.05
        return
    assert residual_bound(bm, alpha, tau, [0.0, 0.5]) == pytest.approx(eps, rel=1e-9)


def test_config_requires_exactly_one():
    with pytest.raises(ConfigError):
        PoissonSeriesConfig()
    with pytest.raises(ConfigError):
        PoissonSeriesConfig(tau=0.1, tolerance=0.1)
    with pytest.raises(ConfigError):
        PoissonSeriesConfig(tau=-1.0)


def test_series_levels_monotone_and_coupled(bm):
    grid = [0.0, 0.5, 1.0]
    lv = stable_series_levels(bm, 0.5, grid, [0.1, 0.01, 0.001], 7, size=200)
    assert np.all(np.diff(lv, axis=1) >= 0)
    # the coarse level alone reproduces the same values from the same seed
    alone = stable_series_levels(bm, 0.5, grid, [0.1], 7, size=200)
    assert np.array_equal(alone[:, 0], lv[:, 0])


def test_series_discarded_mass_campbell(bm):
    lv = stable_series_levels(bm, 0.5, [0.0], [0.01, 0.005], 8, size=10_000)
    added = lv[:, 1, 0] - lv[:, 0, 0]
    expected = 0.5 / 0.5 * (0.01**0.5 - 0.005**0.5)
    se = added.std(ddof=1) / math.sqrt(added.size)
    assert abs(added.mean() - expected) <= 3 * se


def test_series_uniform_convergence_proxy(bm):
    grid = np.linspace(0.0, 1.0, 5)
    tau = 0.01
    lv = stable_series_levels(bm, 0.5, grid, [tau, tau / 10], 9, size=1000)
    sup = np.max(np.abs(lv[:, 0] - lv[:, 1]), axis=1)
    assert sup.mean() <= residual_bound(bm, 0.5, tau, grid)


def test_series_compensator_centres_small_atoms(bm):
    # atoms in (tau, 1] minus the compensator difference have mean zero
    lv = stable_series_levels(bm, 1.5, [0.0, 0.5], [1.0, 0.01], 10, size=20_000)
    band = lv[:, 1, :] - lv[:, 0, :]
    se = band.std(axis=0, ddof=1) / math.sqrt(band.shape[0])
    assert np.all(np.abs(band.mean(axis=0)) <= 3 * se)


def test_series_alpha_one_branch(bm):
    paths, bound = sample_stable_series(bm, 1.0, [0.0], PoissonSeriesConfig(tau=0.01), 11, size=3)
    assert paths.shape == (3, 1)
    assert bound == pytest.approx(math.sqrt(0.01))


def test_series_reproducible(bm):
    cfg = PoissonSeriesConfig(tolerance=0.05)
    a, _ = sample_stable_series(bm, 0.5, [0.0, 1.0], cfg, 12, size=4)
    b, _ = sample_stable_series(bm, 0.5, [0.0, 1.0], cfg, 12, size=4)
    assert np.array_equal(a, b)
