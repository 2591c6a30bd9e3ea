import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geolevy import BrownianMotion, CompoundPoissonGauss, ConfigError, DomainError, tilt
from geolevy.levy_models import domain_bounds, eval_cumulant, model_from_dict
from geolevy.rng import substream

mus = st.floats(-2, 2)
sigmas = st.floats(0.1, 3)
us = st.floats(-3, 3)


def cpg_models():
    return st.builds(
        CompoundPoissonGauss,
        rate=st.floats(0.1, 5),
        jump_mean=st.floats(-1, 1),
        jump_sd=st.floats(0.05, 1.5),
        drift=st.floats(-1, 1),
    )


def test_brownian_cumulant_closed_form(bm):
    assert eval_cumulant(bm, 2.0) == (2.0, 2.0, 1.0)
    m = BrownianMotion(0.3, 2.0)
    assert m.psi(1.5) == pytest.approx(0.3 * 1.5 + 4 * 1.5**2 / 2)


def test_cpg_cumulant_matches_quadrature(cpg2):
    # log E exp(u xi(1)) by summing over the Poisson count
    from scipy.stats import poisson

    u = 0.7
    k = np.arange(60)
    mgf_jump = math.exp(0.3 * u + 0.25 * u**2 / 2)
    direct = math.log(np.sum(poisson.pmf(k, 2.0) * mgf_jump**k)) - 0.1 * u
    assert cpg2.psi(u) == pytest.approx(direct, rel=1e-12)


@given(st.builds(BrownianMotion, mus, sigmas) | cpg_models(), us)
def test_psi_derivatives_match_finite_differences(model, u):
    h = 1e-5
    d1 = (model.psi(u + h) - model.psi(u - h)) / (2 * h)
    d2 = (model.psi1(u + h) - model.psi1(u - h)) / (2 * h)
    assert model.psi1(u) == pytest.approx(d1, rel=1e-6, abs=1e-6)
    assert model.psi2(u) == pytest.approx(d2, rel=1e-6, abs=1e-6)


@given(st.builds(BrownianMotion, mus, sigmas) | cpg_models())
def test_strict_convexity(model):
    assert model.psi(0.0) == 0.0
    assert model.psi2(0.5) > 0
    assert model.psi(2.0) > 2 * model.psi(1.0)


@given(st.builds(BrownianMotion, mus, sigmas) | cpg_models(), st.floats(-2, 2), us)
def test_tilt_shifts_cumulant(model, kappa, u):
    tilted = tilt(model, kappa)
    expected = model.psi(u + kappa) - model.psi(kappa)
    assert tilted.psi(u) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_domain_bounds(bm, cpg):
    assert domain_bounds(bm) == (0.0, math.inf)
    assert domain_bounds(cpg) == (0.0, math.inf)
    bounded = CompoundPoissonGauss(rate=1.0, jump_mean=-1.0, jump_sd=0.0, drift=0.5)
    assert bounded.beta_inf == 0.5
    assert bounded.lattice


def test_degenerate_jumps_rejected():
    with pytest.raises(DomainError):
        CompoundPoissonGauss(rate=1.0, jump_mean=0.0, jump_sd=0.0)
    with pytest.raises(DomainError):
        BrownianMotion(0.0, 0.0)


def test_dict_round_trip(cpg2, bm):
    for m in (bm, cpg2):
        assert model_from_dict(m.to_dict()) == m
    with pytest.raises(ConfigError):
        model_from_dict({"kind": "brownian", "nu": 1})
    with pytest.raises(ConfigError):
        model_from_dict({"kind": "gamma"})


@pytest.mark.parametrize("model", [BrownianMotion(0.2, 0.7), CompoundPoissonGauss(2.0, 0.3, 0.5, -0.1)])
def test_increment_moments(model):
    x = model.sample_increment(1.5, substream(1, 0), size=200_000)
    se = x.std() / math.sqrt(x.size)
    assert abs(x.mean() - 1.5 * model.psi1(0)) < 4 * se
    assert x.var() == pytest.approx(1.5 * model.psi2(0), rel=0.02)


def test_exponential_moment_is_psi(cpg2):
    x = cpg2.sample_increment(1.0, substream(2, 0), size=400_000)
    e = np.exp(x)
    se = e.std() / math.sqrt(e.size)
    assert abs(e.mean() - math.exp(cpg2.psi(1.0))) < 4 * se


def test_sample_path_starts_at_zero_and_is_reproducible(bm):
    grid = [0.0, 0.5, 2.0]
    a = bm.sample_path(grid, substream(3, 1), size=5)
    b = bm.sample_path(grid, substream(3, 1), size=5)
    assert a.shape == (5, 3)
    assert np.all(a[:, 0] == 0)
    assert np.array_equal(a, b)


def test_sample_path_increments_are_independent(bm):
    p = bm.sample_path([1.0, 2.0, 3.0], substream(4, 0), size=100_000)
    inc = np.diff(p, axis=1)
    assert abs(np.corrcoef(inc[:, 0], inc[:, 1])[0, 1]) < 0.02
    assert np.var(p[:, 0]) == pytest.approx(1.0, rel=0.03)


def test_sample_path_rejects_bad_grid(bm):
    with pytest.raises(DomainError):
        bm.sample_path([1.0, 0.5], substream(0))
    with pytest.raises(DomainError):
        bm.sample_path([-1.0, 0.5], substream(0))
