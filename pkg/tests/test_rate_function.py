import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from geolevy import (
    BrownianMotion,
    CompoundPoissonGauss,
    DomainError,
    RateProfile,
    critical_points,
    rate_eval,
    rate_inverse,
    solve_alpha,
    tilted_rate,
)
from geolevy.rate_function import dual_point, sup_rate

# frozen from 40-digit mpmath root finding on the cumulant
CPG_I_1 = 0.4252251529845094350
CPG_U_1 = 0.7530891649796748158
CPG_I_03 = 0.04405604104358971721
CPG_LAMBDA2 = 23.16716829679195068
CPG_ALPHA_HALF = 0.7976482693649383600
CPG2_LAMBDAS = (0.6233686223029591794, 5.604999228735719734)
CPG2_I_1 = 0.1556808054025658602


def legendre_oracle(model, beta):
    """sup_u (u beta - psi(u)) by bounded scalar optimization: an independent route."""
    res = minimize_scalar(lambda u: model.psi(u) - u * beta, bounds=(0, 20), method="bounded",
                          options={"xatol": 1e-12})
    return -res.fun


def test_brownian_rate_closed_form(bm):
    for beta in (0.0, 0.5, 1.0, 3.0):
        value, deriv, u = rate_eval(bm, beta)
        assert value == pytest.approx(beta**2 / 2, abs=1e-14)
        assert deriv == pytest.approx(beta, abs=1e-14)


def test_cpg_rate_matches_frozen_oracle(cpg, cpg2):
    value, deriv, _ = rate_eval(cpg, 1.0)
    assert value == pytest.approx(CPG_I_1, rel=1e-12)
    assert deriv == pytest.approx(CPG_U_1, rel=1e-12)
    assert rate_eval(cpg, 0.3)[0] == pytest.approx(CPG_I_03, rel=1e-11)
    assert rate_eval(cpg2, 1.0)[0] == pytest.approx(CPG2_I_1, rel=1e-12)


def test_unit_poisson_like_rate():
    # jumps of size ~1 with tiny spread approximate the Poisson rate b log b - b + 1
    m = CompoundPoissonGauss(rate=1.0, jump_mean=1.0, jump_sd=1e-9)
    value, _, _ = rate_eval(m, math.e)
    assert value == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("beta", [0.7, 1.0, 2.5])
def test_rate_matches_legendre_transform_oracle(cpg2, beta):
    assert rate_eval(cpg2, beta)[0] == pytest.approx(legendre_oracle(cpg2, beta), rel=1e-8, abs=1e-12)


def test_critical_points(bm, cpg, cpg2):
    assert critical_points(bm) == (0.5, 2.0)
    l1, l2 = critical_points(cpg)
    assert l1 == pytest.approx(1.0, rel=1e-14)
    assert l2 == pytest.approx(CPG_LAMBDA2, rel=1e-13)
    assert critical_points(cpg2) == pytest.approx(CPG2_LAMBDAS, rel=1e-13)


def test_solve_alpha(bm, cpg):
    assert solve_alpha(bm, 0.125) == pytest.approx(0.5, rel=1e-13)
    assert solve_alpha(bm, 0.5) == 1.0
    assert solve_alpha(cpg, 0.5) == pytest.approx(CPG_ALPHA_HALF, rel=1e-12)
    with pytest.raises(DomainError):
        solve_alpha(bm, 2.0)
    with pytest.raises(DomainError):
        solve_alpha(bm, 0.0)


def test_domain_errors(bm):
    with pytest.raises(DomainError):
        rate_eval(bm, -0.1)
    with pytest.raises(DomainError):
        rate_inverse(bm, -1.0)
    bounded = CompoundPoissonGauss(rate=1.0, jump_mean=-1.0, jump_sd=0.0, drift=0.5)
    assert sup_rate(bounded) == 1.0
    with pytest.raises(DomainError):
        rate_eval(bounded, 0.5)
    with pytest.raises(DomainError):
        rate_inverse(bounded, 1.0)


def test_bounded_domain_rate_near_edge():
    m = CompoundPoissonGauss(rate=1.0, jump_mean=-1.0, jump_sd=0.0, drift=0.5)
    # I(beta) -> rate as beta -> beta_inf
    assert rate_eval(m, 0.5 - 1e-9)[0] == pytest.approx(1.0, abs=1e-6)
    assert rate_inverse(m, 0.75) == pytest.approx(legendre_beta(m, 0.75), abs=1e-8)


def legendre_beta(m, y):
    from scipy.optimize import brentq

    return brentq(lambda b: legendre_oracle(m, b) - y, m.beta0, m.beta_inf - 1e-12, xtol=1e-14)


def test_tilted_rate(bm):
    # tilting Brownian by kappa moves the mean to kappa, rate becomes (beta - kappa)^2/2
    assert tilted_rate(bm, 3.0, 2.0) == pytest.approx(0.5, abs=1e-13)


models = st.sampled_from([
    BrownianMotion(0.0, 1.0),
    BrownianMotion(-0.4, 0.6),
    CompoundPoissonGauss(1.0, 0.0, 1.0, 0.0),
    CompoundPoissonGauss(2.0, 0.3, 0.5, -0.1),
    CompoundPoissonGauss(0.5, -0.5, 0.2, 1.0),
])


@settings(max_examples=200)
@given(models, st.floats(0.01, 4.0))
def test_conjugacy_and_derivative_identity(model, u):
    beta = model.psi1(u)
    value, deriv, _ = rate_eval(model, beta)
    assert value == pytest.approx(u * beta - model.psi(u), rel=1e-10, abs=1e-12)
    assert deriv == pytest.approx(u, rel=1e-9)


@settings(max_examples=200)
@given(models, st.floats(0.0, 30.0))
def test_inverse_round_trip(model, y):
    beta = rate_inverse(model, y)
    assert rate_eval(model, beta)[0] == pytest.approx(y, rel=1e-9, abs=1e-12)


@given(models, st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_rate_monotone_and_convex_on_upper_half(model, a, b):
    b0 = model.beta0
    x, y = sorted((b0 + a, b0 + b))
    ix, iy = rate_eval(model, x)[0], rate_eval(model, y)[0]
    assert ix <= iy + 1e-12
    mid = rate_eval(model, 0.5 * (x + y))[0]
    assert mid <= 0.5 * (ix + iy) + 1e-10


def test_profile_settings_respected(cpg):
    loose = RateProfile(cpg, rtol=1e-4)
    assert rate_eval(loose, 1.0)[0] == pytest.approx(CPG_I_1, rel=1e-6)
    assert dual_point(cpg, cpg.beta0) == 0.0
