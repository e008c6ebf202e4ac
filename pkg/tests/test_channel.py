"""Tests de la estadística en forma cerrada del canal."""

import itertools
import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special

from alphabx.channel import (
    ChannelParams,
    ChannelParamsError,
    EvalPolicy,
    amount_of_fading,
    average_error_rate,
    bx_envelope_cdf,
    bx_envelope_pdf,
    c_alpha,
    cqei,
    expectation,
    normalized_variate,
    outage_bounds,
    outage_probability,
    qam16_ber,
    quality_reliability_curve,
    snr_cdf,
    snr_cdf_vector,
    snr_from_normalized,
    snr_moment,
    snr_pdf,
    snr_sf_vector,
    square_qam_ber,
    upper_bound_is_strict,
)
from alphabx.resources import config
from alphabx.resources.utils import db_to_linear
from conftest import FIG2_GAMMA_TH, c_alpha_oracle, grid_params


def rel_err(value, expected):
    return abs(value - expected) / abs(expected)


def rayleigh(gamma_bar=1.0) -> ChannelParams:
    return ChannelParams(m_x=1.0, m_y=1.0, omega_x=1.0, omega_y=0.0, alpha=2.0, gamma_bar=gamma_bar)


def quantile_points(p: ChannelParams) -> list:
    """10 valores de γ repartidos alrededor de la media de u."""
    u = p.normalized_mean * np.array([0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0])
    return [float(g) for g in snr_from_normalized(p, u)]


# ============================================================================
# PARÁMETROS
# ============================================================================

def test_params_validation():
    with pytest.raises(ChannelParamsError):
        ChannelParams(m_x=1.0, m_y=1.0, omega_x=1.0, omega_y=0.0, alpha=0.0, gamma_bar=1.0)
    with pytest.raises(ChannelParamsError):
        ChannelParams(m_x=-1.0, m_y=1.0, omega_x=1.0, omega_y=0.0, alpha=2.0, gamma_bar=1.0)
    with pytest.raises(ChannelParamsError):
        ChannelParams(m_x=1.0, m_y=1.0, omega_x=1.0, omega_y=-0.1, alpha=2.0, gamma_bar=1.0)
    with pytest.raises(ValueError):
        ChannelParams(m_x=1.0, m_y=1.0, omega_x=1.0, omega_y=0.0, alpha=2.0, gamma_bar=math.nan)


def test_params_from_db():
    p = ChannelParams.from_db(m_x=1.5, m_y=2.5, omega_x_db=5.0, omega_y_db=-5.0, alpha=2.0, gamma_bar_db=10.0)
    assert rel_err(p.omega_x, 10 ** 0.5) < 1e-15
    assert rel_err(p.omega_y, 10 ** -0.5) < 1e-15
    assert rel_err(p.gamma_bar, 10.0) < 1e-15
    assert ChannelParams.from_db(1.0, 1.0, 0.0, None, 2.0, 0.0).omega_y == 0.0


def test_weights_sum_to_one():
    p = ChannelParams(m_x=0.7, m_y=3.0, omega_x=2.0, omega_y=5.0, alpha=2.5, gamma_bar=3.0)
    assert abs(p.los_weight + p.diffuse_weight - 1.0) < 1e-15
    assert rel_err(p.power_ratio, p.diffuse_weight / p.los_weight) < 1e-14


# ============================================================================
# C_α
# ============================================================================

def test_c_alpha_rayleigh_is_one():
    assert abs(c_alpha(rayleigh()).value - 1.0) < 1e-14


def test_c_alpha_linear_case():
    p = ChannelParams(m_x=2.0, m_y=0.7, omega_x=2.0, omega_y=1.0, alpha=2.0, gamma_bar=1.0)
    assert rel_err(c_alpha(p).value, 1.0 / 3.0) < 1e-13
    for m_x, omega_x, omega_y in [(0.4, 1.0, 3.0), (2.7, 5.0, 0.2)]:
        p = ChannelParams(m_x=m_x, m_y=1.3, omega_x=omega_x, omega_y=omega_y, alpha=2.0, gamma_bar=1.0)
        assert rel_err(c_alpha(p).value, omega_x / (m_x * (omega_x + omega_y))) < 1e-13


def test_c_alpha_against_extended_precision():
    p = ChannelParams(m_x=2.2, m_y=0.5, omega_x=10 ** 0.5, omega_y=10 ** -0.5, alpha=3.5, gamma_bar=10.0)
    assert rel_err(c_alpha(p).value, c_alpha_oracle(p)) < 1e-10
    mean = expectation(p, lambda gamma: gamma, bounded=False)
    assert rel_err(mean, p.gamma_bar) < 1e-8


@pytest.mark.parametrize("omega_y_db", [20.0, 30.0, 40.0])
@pytest.mark.parametrize("m_y,alpha", [(0.1, 3.0), (0.5, 4.0), (1.0 / 3.0, 3.0), (2.5, 2.0)])
def test_c_alpha_dominant_los(omega_y_db, m_y, alpha):
    # m_XΩ_Y/(m_YΩ_X) llega a 1e6: ₂F₁ con argumento muy negativo
    p = ChannelParams.from_db(m_x=10.0, m_y=m_y, omega_x_db=0.0, omega_y_db=omega_y_db,
                              alpha=alpha, gamma_bar_db=0.0)
    assert rel_err(c_alpha(p).value, c_alpha_oracle(p)) < 1e-9
    assert rel_err(snr_moment(p, 1.0), p.gamma_bar) < 1e-9


def test_normalized_variate_round_trip():
    p = ChannelParams(m_x=0.8, m_y=1.7, omega_x=1.0, omega_y=2.0, alpha=3.0, gamma_bar=4.0)
    gammas = np.array([0.01, 0.5, 4.0, 30.0])
    np.testing.assert_allclose(snr_from_normalized(p, normalized_variate(p, gammas)), gammas, rtol=1e-14)


# ============================================================================
# PDF Y CDF
# ============================================================================

def test_pdf_rayleigh_value():
    assert rel_err(snr_pdf(rayleigh(), 1.0), math.exp(-1.0)) < 1e-12


def test_pdf_limit_at_origin():
    assert snr_pdf(ChannelParams(1.5, 1.0, 1.0, 0.5, 2.0, 1.0), 0.0) == 0.0
    assert snr_pdf(ChannelParams(0.3, 1.0, 1.0, 0.5, 2.0, 1.0), 0.0) == math.inf
    assert rel_err(snr_pdf(rayleigh(4.0), 0.0), 0.25) < 1e-12
    with pytest.raises(ChannelParamsError):
        snr_pdf(rayleigh(), -1.0)


def test_pdf_normalization(fast_params):
    assert abs(expectation(fast_params, lambda gamma: 1.0) - 1.0) < 1e-8


def test_pdf_normalization_in_snr_domain():
    p = ChannelParams(m_x=2.2, m_y=0.5, omega_x=10 ** 0.5, omega_y=10 ** -0.5, alpha=3.5, gamma_bar=10.0)
    mass, _ = integrate.quad(lambda g: snr_pdf(p, g), 0.0, 10 * p.gamma_bar, limit=200, epsabs=1e-13)
    tail, _ = integrate.quad(lambda g: snr_pdf(p, g), 10 * p.gamma_bar, np.inf, limit=200, epsabs=1e-13)
    assert abs(mass + tail - 1.0) < 1e-7


def test_cdf_limits(fast_params):
    assert snr_cdf(fast_params, 0.0) == 0.0
    assert abs(snr_cdf(fast_params, 1e6 * fast_params.gamma_bar) - 1.0) < 1e-6
    assert snr_cdf(fast_params, math.inf) == 1.0


def test_cdf_against_quadrature_example():
    p = ChannelParams(m_x=2.2, m_y=0.5, omega_x=10 ** 0.5, omega_y=10 ** -0.5, alpha=3.5, gamma_bar=10.0)
    assert abs(snr_cdf(p, 2.0) - expectation(p, lambda gamma: 1.0, upper=2.0)) < 1e-7


def test_cdf_against_quadrature(fast_params):
    for gamma in quantile_points(fast_params):
        integral = expectation(fast_params, lambda g: 1.0, upper=gamma)
        assert abs(snr_cdf(fast_params, gamma) - integral) < 1e-7


def test_cdf_nondecreasing_and_continuous(fast_params):
    gammas = np.geomspace(1e-3, 1e2, 60) * fast_params.gamma_bar
    values = np.array([snr_cdf(fast_params, g) for g in gammas])
    assert np.all(np.diff(values) >= -1e-9)
    assert np.all((values >= 0) & (values <= 1))
    nudged = np.array([snr_cdf(fast_params, g * (1 + 1e-9)) for g in gammas])
    assert np.max(np.abs(nudged - values)) < 1e-7


def test_cdf_vector_matches_scalar(fast_params):
    gammas = quantile_points(fast_params)
    vector = snr_cdf_vector(fast_params, gammas)
    scalar = np.array([snr_cdf(fast_params, g) for g in gammas])
    np.testing.assert_allclose(vector, scalar, atol=1e-9)
    np.testing.assert_allclose(snr_sf_vector(fast_params, gammas), 1.0 - scalar, atol=1e-9)


def test_rayleigh_reduction():
    for gamma_bar in (1.0, 10.0):
        p = rayleigh(gamma_bar)
        for gamma in np.geomspace(1e-3, 30.0, 25) * gamma_bar:
            assert abs(snr_cdf(p, gamma) - (-math.expm1(-gamma / gamma_bar))) < 1e-9


@pytest.mark.parametrize("m", [0.5, 1.7, 2.5, 4.0])
def test_nakagami_reduction(m):
    p = ChannelParams(m_x=m, m_y=2.0, omega_x=1.0, omega_y=0.0, alpha=2.0, gamma_bar=3.0)
    for gamma in np.geomspace(1e-3, 20.0, 25) * p.gamma_bar:
        assert abs(snr_cdf(p, gamma) - special.gammainc(m, m * gamma / p.gamma_bar)) < 1e-9


def test_cdf_rejects_negative():
    with pytest.raises(ChannelParamsError):
        snr_cdf(rayleigh(), -0.5)


# ============================================================================
# MOMENTOS, AoF Y CQEI
# ============================================================================

def test_mean_identity(fast_params):
    assert rel_err(snr_moment(fast_params, 1.0), fast_params.gamma_bar) < 1e-12


def test_second_moment_exponential():
    assert rel_err(snr_moment(rayleigh(), 2.0), 2.0) < 1e-12


def test_moment_against_quadrature_example():
    p = ChannelParams(m_x=0.5, m_y=0.5, omega_x=1.0, omega_y=1.0, alpha=4.0, gamma_bar=10.0)
    integral = expectation(p, lambda gamma: gamma ** 2, bounded=False)
    assert rel_err(snr_moment(p, 2.0), integral) < 1e-6


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 3.0])
def test_moments_against_quadrature(fast_params, k):
    integral = expectation(fast_params, lambda gamma: gamma ** k, bounded=False)
    assert rel_err(snr_moment(fast_params, k), integral) < 1e-6


def test_moment_rejects_nonpositive_order():
    with pytest.raises(ChannelParamsError):
        snr_moment(rayleigh(), 0.0)


def test_aof_rayleigh():
    assert abs(amount_of_fading(rayleigh()) - 1.0) < 1e-9


def test_aof_matches_second_moment(fast_params):
    second = snr_moment(fast_params, 2.0)
    expected = second / fast_params.gamma_bar ** 2 - 1.0
    assert rel_err(amount_of_fading(fast_params), expected) < 1e-9


def test_aof_regimes():
    omega = 10 ** 0.5
    hyper = ChannelParams(m_x=0.2, m_y=0.5, omega_x=omega, omega_y=omega, alpha=4.0, gamma_bar=1.0)
    assert amount_of_fading(hyper) > 1.0
    mild = ChannelParams(m_x=3.0, m_y=3.0, omega_x=omega, omega_y=omega, alpha=4.0, gamma_bar=1.0)
    assert amount_of_fading(mild) < 1.0


def test_hyper_rayleigh_below_quarter():
    omega = 10 ** 0.5
    for m_x, m_y in itertools.product((0.05, 0.1, 0.2, 0.24), (0.1, 0.5, 1.0, 3.0, 10.0)):
        p = ChannelParams(m_x=m_x, m_y=m_y, omega_x=omega, omega_y=omega, alpha=4.0, gamma_bar=1.0)
        assert amount_of_fading(p) > 1.0


def test_aof_against_quadrature():
    omega = 10 ** 0.5
    p = ChannelParams(m_x=0.2, m_y=0.5, omega_x=omega, omega_y=omega, alpha=4.0, gamma_bar=1.0)
    second = expectation(p, lambda gamma: gamma ** 2, bounded=False)
    assert rel_err(amount_of_fading(p), second - 1.0) < 1e-6


def test_cqei():
    assert abs(cqei(rayleigh(10.0)) - 0.1) < 1e-10
    omega = 10 ** 0.5
    p = ChannelParams(m_x=3.0, m_y=3.0, omega_x=omega, omega_y=omega, alpha=2.5, gamma_bar=10.0)
    assert rel_err(cqei(p.with_(gamma_bar=20.0)), cqei(p) / 2) < 1e-12
    variance = expectation(p, lambda gamma: gamma ** 2, bounded=False) - p.gamma_bar ** 2
    assert rel_err(cqei(p), variance / p.gamma_bar ** 3) < 1e-6


# ============================================================================
# OUTAGE Y COTAS
# ============================================================================

def test_outage_equals_cdf(fast_params):
    assert config.DEBUG_CHECKS
    for gamma in quantile_points(fast_params):
        assert outage_probability(fast_params, gamma) == snr_cdf(fast_params, gamma)


def test_outage_vanishes_near_zero():
    p = ChannelParams.from_db(m_x=1.5, m_y=2.5, omega_x_db=5.0, omega_y_db=-5.0, alpha=2.0, gamma_bar_db=10.0)
    assert outage_probability(p, 1e-12) < 1e-12


def test_outage_against_extended_precision():
    p = ChannelParams(m_x=1.3, m_y=0.6, omega_x=1.0, omega_y=2.0, alpha=3.0, gamma_bar=2.0)
    gamma_th = 1.5
    ca = c_alpha_oracle(p)
    u = mpmath.mpf(gamma_th / p.gamma_bar) ** (p.alpha / 2) / ca
    A, lam = mpmath.mpf(p.los_weight), mpmath.mpf(p.diffuse_weight)
    # F_U(u) = ∫₀^u A^{m_Y} t^{m_X-1} e^{-t} ₁F₁(m_Y; m_X; λt)/Γ(m_X) dt
    integrand = lambda t: A ** p.m_y * t ** (p.m_x - 1) * mpmath.exp(-t) * mpmath.hyp1f1(p.m_y, p.m_x, lam * t)
    expected = float(mpmath.quad(integrand, [0, u]) / mpmath.gamma(p.m_x))
    assert abs(outage_probability(p, gamma_th) - expected) < 1e-10


def test_outage_monotone_in_m_x():
    values = [
        outage_probability(
            ChannelParams.from_db(m_x=m_x, m_y=2.5, omega_x_db=5.0, omega_y_db=-5.0, alpha=3.5, gamma_bar_db=10.0),
            10 ** 0.3,
        )
        for m_x in np.linspace(1.0, 5.0, 9)
    ]
    assert all(np.diff(values) <= 0)


@pytest.mark.parametrize("m_x,direction", [(0.2, 1), (2.2, -1)])
def test_outage_direction_in_omega_x(m_x, direction):
    values = [
        outage_probability(
            ChannelParams.from_db(m_x=m_x, m_y=0.5, omega_x_db=w, omega_y_db=-5.0, alpha=3.5, gamma_bar_db=10.0),
            10 ** 0.3,
        )
        for w in np.linspace(-5.0, 10.0, 16)
    ]
    assert all(direction * np.diff(values) > 0)


def test_bounds_identity(fast_params):
    for gamma in quantile_points(fast_params):
        bounds = outage_bounds(fast_params, gamma)
        u = float(normalized_variate(fast_params, gamma))
        assert rel_err(bounds.lower / bounds.upper, math.exp(-u)) < 1e-12
        assert bounds.lower <= bounds.exact


def test_bounds_sandwich_in_high_snr_regime():
    checked = 0
    for p in grid_params():
        if not upper_bound_is_strict(p):
            continue
        for ratio in (0.1, 0.01, 1e-3):
            bounds = outage_bounds(p, ratio * p.gamma_bar)
            assert bounds.ordered
            checked += 1
    assert checked > 0


def test_bound_quality_at_quoted_snr():
    for alpha, gamma_bar_db in [(2.0, 20.0), (3.0, 10.0), (4.0, 7.0)]:
        p = ChannelParams.from_db(m_x=1.5, m_y=2.5, omega_x_db=5.0, omega_y_db=-5.0,
                                  alpha=alpha, gamma_bar_db=gamma_bar_db)
        bounds = outage_bounds(p, FIG2_GAMMA_TH)
        assert 0.0 <= bounds.relative_gap <= config.BOUND_QUALITY_DELTA


def test_bounds_tighten_at_high_snr():
    p = ChannelParams.from_db(m_x=1.5, m_y=2.5, omega_x_db=5.0, omega_y_db=-5.0, alpha=3.0, gamma_bar_db=0.0)
    p = p.with_(gamma_bar=1e6 * FIG2_GAMMA_TH)
    bounds = outage_bounds(p, FIG2_GAMMA_TH)
    assert abs(bounds.exact / bounds.upper - 1.0) < 1e-4


def test_upper_bound_strictness_flag():
    assert upper_bound_is_strict(ChannelParams(1.5, 2.5, 1.0, 0.1, 2.0, 1.0))
    assert not upper_bound_is_strict(ChannelParams(0.3, 2.7, 1.0, 10.0, 2.0, 1.0))


# ============================================================================
# BER Y CALIDAD-FIABILIDAD
# ============================================================================

def test_qam_conditional_ber():
    assert square_qam_ber(0.0, 16) == pytest.approx(0.5, abs=1e-15)
    assert square_qam_ber(0.0, 64) == pytest.approx(0.5, abs=1e-15)
    gamma = 7.3
    q = lambda x: 0.5 * special.erfc(x / math.sqrt(2))
    assert rel_err(square_qam_ber(gamma, 4), q(math.sqrt(gamma))) < 1e-14
    s = math.sqrt(gamma / 5)
    assert rel_err(qam16_ber(gamma), (3 * q(s) + 2 * q(3 * s) - q(5 * s)) / 4) < 1e-13
    grid = np.array([0.0, 1.0, 10.0, 100.0])
    assert np.all(np.diff(qam16_ber(grid)) < 0)


@pytest.mark.parametrize("order", [2, 8, 32, 0])
def test_qam_order_validation(order):
    with pytest.raises(ChannelParamsError):
        square_qam_ber(1.0, order)


def test_average_error_rate_trivial(fast_params):
    assert abs(average_error_rate(fast_params, lambda gamma: 0.0)) < 1e-12
    assert abs(average_error_rate(fast_params, lambda gamma: 0.5) - 0.5) < 1e-9


def test_average_qam16_over_rayleigh():
    # E[erfc(a√γ)] con γ exponencial = 1 - √(a²γ̄/(1 + a²γ̄))
    gamma_bar = 10.0
    weights = {1: 3.0, 3: 2.0, 5: -1.0}
    expected = sum(w * (1 - math.sqrt(k * k / 10 * gamma_bar / (1 + k * k / 10 * gamma_bar)))
                   for k, w in weights.items()) / 8
    assert abs(average_error_rate(rayleigh(gamma_bar)) - expected) < 1e-9


def test_quality_reliability_curve():
    p = ChannelParams.from_db(m_x=1.0, m_y=1.0, omega_x_db=-5.0, omega_y_db=-5.0, alpha=2.0, gamma_bar_db=10.0)
    single = quality_reliability_curve(p, 10.0, [10.0])
    assert len(single) == 1
    grid = [db_to_linear(v) for v in (0.0, 5.0, 10.0, 15.0, 20.0)]
    curve = quality_reliability_curve(p, 10.0, grid)
    pout = [point[0] for point in curve]
    ber = [point[1] for point in curve]
    assert all(np.diff(pout) <= 0)
    assert all(np.diff(ber) <= 0)
    with pytest.raises(ChannelParamsError):
        quality_reliability_curve(p, 10.0, [])


def test_looser_policy_still_consistent():
    policy = EvalPolicy.from_tolerances(abs_tol=1e-9, rel_tol=1e-7, max_terms=10_000)
    p = ChannelParams(m_x=2.2, m_y=0.5, omega_x=10 ** 0.5, omega_y=10 ** -0.5, alpha=3.5, gamma_bar=10.0)
    assert abs(snr_cdf(p, 2.0, policy) - snr_cdf(p, 2.0)) < 1e-7


# ============================================================================
# ENVOLVENTE BX
# ============================================================================

def test_envelope_pdf_normalization_and_cdf():
    m_x, m_y, omega_x, omega_y = 1.0, 0.5, 1.0, 1.0
    pdf = lambda r: bx_envelope_pdf(r, m_x, m_y, omega_x, omega_y)
    mass, _ = integrate.quad(pdf, 0.0, np.inf, limit=200, epsabs=1e-13)
    assert abs(mass - 1.0) < 1e-8
    for r in (0.3, 1.0, 2.0):
        partial, _ = integrate.quad(pdf, 0.0, r, limit=200, epsabs=1e-13)
        assert abs(float(bx_envelope_cdf(r, m_x, m_y, omega_x, omega_y)) - partial) < 1e-9


def test_envelope_nakagami_case():
    m, omega = 2.5, 2.0
    r = np.array([0.2, 0.9, 1.7])
    nakagami = 2 * m ** m * r ** (2 * m - 1) * np.exp(-m * r ** 2 / omega) / (special.gamma(m) * omega ** m)
    np.testing.assert_allclose(bx_envelope_pdf(r, m, 1.0, omega, 0.0), nakagami, rtol=1e-12)


# ============================================================================
# GRILLA COMPLETA
# ============================================================================

def test_mean_identity_full_grid():
    for p in grid_params():
        assert rel_err(snr_moment(p, 1.0), p.gamma_bar) < 1e-10


def test_aof_identity_full_grid():
    for p in grid_params():
        expected = snr_moment(p, 2.0) / p.gamma_bar ** 2 - 1.0
        assert rel_err(amount_of_fading(p), expected) < 1e-9


@pytest.mark.slow
def test_normalization_full_grid():
    for p in grid_params():
        assert abs(expectation(p, lambda gamma: 1.0) - 1.0) < 1e-8


@pytest.mark.slow
def test_cdf_against_quadrature_full_grid():
    for p in grid_params():
        for gamma in quantile_points(p):
            integral = expectation(p, lambda g: 1.0, upper=gamma)
            assert abs(snr_cdf(p, gamma) - integral) < 1e-7


@pytest.mark.slow
def test_moments_against_quadrature_full_grid():
    for p in grid_params():
        for k in (0.5, 1.0, 2.0, 3.0):
            integral = expectation(p, lambda gamma: gamma ** k, bounded=False)
            assert rel_err(snr_moment(p, k), integral) < 1e-6
