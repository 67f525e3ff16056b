"""Tests for core.analytic."""
import math

import numpy as np
import pytest

from core import analytic, oracle
from core.analytic import DensityCurve, ScenarioParams
from core.errors import DomainError, UnsupportedScenarioError
from core.mixed_dist import DensityHandle
from core.special_functions import regularized_upper_gamma

Z_GRID = np.linspace(0.0, 50.0, 26)
SCENARIO_GRID = [(p, q) for p in (0.5, 1.0, 2.0, 4.0) for q in (0.5, 1.0, 2.0, 4.0)]


def _printed_lambda_density(params: ScenarioParams) -> DensityHandle:
    """Single-SU density with Λ = λ₁ + λ₂z, the reading that contradicts the integrand."""
    p, q, s2, l1, l2 = params.p, params.q, params.sigma2, params.lambda1, params.lambda2

    def fn(z):
        z = np.asarray(z, dtype=float)
        lam = l1 + l2 * z
        below = np.exp(-s2 * l1 * z / p) * (s2 + p / lam)
        capped = np.exp(-(s2 * l1 * z + q * lam) / p) * ((s2 + q) * l1 * z / l2 - p / lam)
        return l1 * l2 / (lam * p) * (below + capped)

    return DensityHandle(fn, 0.0, analytic.sinr_z_max(params))


# ---------------------------------------------------------------------------
# ScenarioParams / DensityCurve
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "kwargs",
    [
        {"p": 0.0, "q": 1.0},
        {"p": 1.0, "q": -1.0},
        {"p": 1.0, "q": 1.0, "sigma2": 0.0},
        {"p": 1.0, "q": 1.0, "lambda1": math.inf},
        {"p": 1.0, "q": 1.0, "n_su": 0},
        {"p": 1.0, "q": 1.0, "n_su": 1.5},
    ],
)
def test_scenario_params_rejects_invalid(kwargs):
    with pytest.raises(DomainError):
        ScenarioParams(**kwargs)


def test_scenario_params_derived(general_rates):
    assert general_rates.lambda_bar == pytest.approx(0.125)
    assert general_rates.lambda1_bar == pytest.approx(0.5)
    assert not general_rates.is_unit_rate
    assert ScenarioParams(p=4, q=2).scenario_id == "p4_q2_n1"
    assert general_rates.replace(n_su=2).n_su == 2


def test_density_curve_invariants():
    with pytest.raises(DomainError):
        DensityCurve(np.array([0.0, 0.0, 1.0]), np.zeros(3), "bad grid")
    with pytest.raises(DomainError):
        DensityCurve(np.array([0.0, 1.0]), np.array([0.0, np.nan]), "nan")
    curve = DensityCurve.evaluate(np.exp, [0.0, 1.0], "exp")
    np.testing.assert_allclose(curve.values, [1.0, math.e])


# ---------------------------------------------------------------------------
# Power adaptation and NI laws
# ---------------------------------------------------------------------------

def test_su_transmit_power(p_greater_q):
    assert analytic.su_transmit_power(0.5, p_greater_q) == 4.0
    assert analytic.su_transmit_power(1.0, p_greater_q) == 2.0
    assert analytic.su_transmit_power(1e-12, p_greater_q) == 4.0
    np.testing.assert_allclose(analytic.su_transmit_power(np.array([0.25, 4.0]), p_greater_q), [4.0, 0.5])
    with pytest.raises(DomainError):
        analytic.su_transmit_power(0.0, p_greater_q)


@pytest.mark.parametrize("p, q", [(4.0, 2.0), (2.0, 4.0), (0.5, 1.0)])
def test_multi_law_reduces_to_single_at_n1(p, q):
    params = ScenarioParams(p=p, q=q)
    single, multi = analytic.ni_law_single(params), analytic.ni_law_multi(params)
    grid = np.linspace(0.0, 1.0 + q + 1.0, 1001)
    np.testing.assert_allclose(multi.continuous_pdf_at(grid), single.continuous_pdf_at(grid), rtol=0, atol=1e-12)
    np.testing.assert_allclose(multi.cdf(grid), single.cdf(grid), rtol=0, atol=1e-12)
    assert multi.total_atom_mass == pytest.approx(single.total_atom_mass, abs=1e-12)


def test_multi_law_atom_mass(p_greater_q):
    law = analytic.ni_law_multi(p_greater_q.replace(n_su=2))
    assert law.atom_mass_at(3.0) == pytest.approx(0.90980, abs=1e-5)


@pytest.mark.parametrize("p, q", SCENARIO_GRID)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_ni_law_normalization(p, q, n):
    law = analytic.ni_law_multi(ScenarioParams(p=p, q=q, n_su=n))
    assert oracle.law_normalization(law) == pytest.approx(1.0, abs=1e-8)


def test_huge_q_law_is_shifted_exponential():
    params = ScenarioParams(p=4.0, q=1e6)
    law = analytic.ni_law_single(params)
    assert law.atom_mass_at(1.0 + 1e6) < 1e-10
    grid = np.linspace(1.0, 200.0, 2001)
    shifted_exp = 1.0 - np.exp(-(grid - 1.0) / 4.0)
    assert np.max(np.abs(law.cdf(grid) - shifted_exp)) <= 1e-9


def test_interference_law_is_ni_law_without_noise(p_less_q):
    params = p_less_q.replace(n_su=2)
    interference, ni = analytic.interference_law(params), analytic.ni_law_multi(params)
    assert interference.support_lo == 0.0
    grid = np.array([0.0, 0.5, 1.3, 2.7, 3.9, 4.0, 4.5, 6.0])
    np.testing.assert_allclose(interference.cdf(grid), ni.cdf(grid + params.sigma2), atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_laplace_transform_matches_law_expectation(p_less_q, n):
    params = p_less_q.replace(n_su=n)
    law = analytic.ni_law_multi(params)
    for s in (0.0, 0.3, 1.7):
        expected = oracle.law_expectation(law, lambda y: math.exp(-s * y)).value
        assert analytic.ni_laplace_transform(params, s) == pytest.approx(expected, abs=1e-10)


# ---------------------------------------------------------------------------
# SINR densities
# ---------------------------------------------------------------------------

def test_unit_density_at_zero(p_greater_q):
    expected = (1.0 + 4.0 - 4.0 * math.exp(-0.5)) / 4.0
    assert analytic.sinr_pdf_single_unit(p_greater_q)(0.0) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.643469, abs=1e-6)


def test_unit_density_rejects_general_rates(general_rates):
    with pytest.raises(UnsupportedScenarioError):
        analytic.sinr_pdf_single_unit(general_rates)


@pytest.mark.parametrize("p, q", [(4.0, 2.0), (2.0, 4.0)])
def test_reduction_chain(p, q):
    params = ScenarioParams(p=p, q=q)
    grid = np.linspace(0.0, 20.0, 401)
    unit = analytic.sinr_pdf_single_unit(params)(grid)
    np.testing.assert_allclose(analytic.sinr_pdf_single_general(params)(grid), unit, rtol=0, atol=1e-10)
    np.testing.assert_allclose(analytic.sinr_pdf_multi(params)(grid), unit, rtol=0, atol=1e-10)


def test_multi_density_reduces_to_general_for_any_rates(general_rates):
    grid = np.linspace(0.0, 30.0, 301)
    np.testing.assert_allclose(
        analytic.sinr_pdf_multi(general_rates)(grid),
        analytic.sinr_pdf_single_general(general_rates)(grid),
        rtol=0, atol=1e-10,
    )


@pytest.mark.parametrize("p, q", [(4.0, 2.0), (2.0, 4.0)])
def test_unit_density_matches_ratio_integral(p, q):
    params = ScenarioParams(p=p, q=q)
    law = analytic.ni_law_single(params)
    density = analytic.sinr_pdf_single_unit(params)
    reference = lambda z: oracle.ratio_density(1.0, p, law, z)
    assert oracle.sup_norm_difference(density, reference, Z_GRID) <= 1e-8


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("p, q", [(4.0, 2.0), (2.0, 4.0)])
def test_multi_density_matches_ratio_integral(p, q, n):
    params = ScenarioParams(p=p, q=q, n_su=n)
    law = analytic.ni_law_multi(params)
    reference = lambda z: oracle.ratio_density(params.lambda1, params.p, law, z)
    assert oracle.sup_norm_difference(analytic.sinr_pdf_multi(params), reference, Z_GRID) <= 1e-8


def test_general_density_matches_ratio_integral(general_rates):
    law = analytic.ni_law_single(general_rates)
    reference = lambda z: oracle.ratio_density(general_rates.lambda1, general_rates.p, law, z)
    assert oracle.sup_norm_difference(analytic.sinr_pdf_single_general(general_rates), reference, Z_GRID) <= 1e-8


def test_printed_lambda_reading_fails_ratio_integral(general_rates):
    law = analytic.ni_law_single(general_rates)
    reference = lambda z: oracle.ratio_density(general_rates.lambda1, general_rates.p, law, z)
    assert oracle.sup_norm_difference(_printed_lambda_density(general_rates), reference, Z_GRID) > 1e-3


@pytest.mark.parametrize("p, q", SCENARIO_GRID)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_sinr_density_normalization(p, q, n):
    density = analytic.sinr_pdf_multi(ScenarioParams(p=p, q=q, n_su=n))
    assert oracle.density_mass(density).value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sinr_cdf_matches_integrated_density(p_greater_q, n):
    params = p_greater_q.replace(n_su=n)
    cdf = analytic.sinr_cdf(params)
    density = analytic.sinr_pdf_multi(params)
    for z in (0.5, 1.0, 2.0, 4.0):
        assert cdf(z) == pytest.approx(oracle.density_cdf(density, z), abs=1e-8)
    assert cdf(-1.0) == 0.0
    values = cdf(np.linspace(0.0, 50.0, 501))
    assert np.all(np.diff(values) >= 0.0)


def test_z_max_bounds_tail(p_greater_q):
    z_max = analytic.sinr_z_max(p_greater_q)
    assert z_max == pytest.approx(4.0 * math.log(1e12))
    assert 1.0 - analytic.sinr_cdf(p_greater_q)(z_max) <= 1e-12


# ---------------------------------------------------------------------------
# Closed-form metrics
# ---------------------------------------------------------------------------

MEAN_PAIRS = [(2.0, 4.0), (4.0, 2.0), (2.0, 2.0), (4.0, 4.0)]


@pytest.mark.parametrize("p, q", MEAN_PAIRS)
def test_mean_sinr_matches_quadrature(p, q):
    params = ScenarioParams(p=p, q=q)
    assert analytic.mean_sinr(params) == pytest.approx(analytic.mean_sinr_numeric(params), abs=1e-8)


def test_mean_sinr_value(p_less_q):
    assert analytic.mean_sinr(p_less_q) == pytest.approx(0.93598, abs=1e-4)


def test_mean_sinr_small_q_limit():
    params = ScenarioParams(p=2.0, q=1e-9)
    assert analytic.mean_sinr(params) == pytest.approx(analytic.mean_sinr_numeric(params), abs=1e-8)


def test_mean_sinr_higher_power_wins():
    for q in np.linspace(0.2, 10.0, 50):
        assert analytic.mean_sinr(ScenarioParams(p=4.0, q=q)) > analytic.mean_sinr(ScenarioParams(p=2.0, q=q))


def test_closed_forms_reject_general_scenarios(general_rates, p_greater_q):
    with pytest.raises(UnsupportedScenarioError):
        analytic.mean_sinr(general_rates)
    with pytest.raises(UnsupportedScenarioError):
        analytic.mean_capacity(p_greater_q.replace(n_su=2))
    with pytest.raises(UnsupportedScenarioError):
        analytic.outage_probability(general_rates, 1.0)


def test_outage_values(p_greater_q):
    assert analytic.outage_probability(p_greater_q, 0.0) == 0.0
    assert analytic.outage_probability(p_greater_q, 1.0) == pytest.approx(0.46735, abs=1e-5)
    assert analytic.outage_probability(p_greater_q, math.inf) == 1.0
    with pytest.raises(DomainError):
        analytic.outage_probability(p_greater_q, -0.1)


@pytest.mark.parametrize("psi", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("p, q", [(4.0, 2.0), (2.0, 4.0)])
def test_outage_matches_quadrature(p, q, psi):
    params = ScenarioParams(p=p, q=q)
    assert analytic.outage_probability(params, psi) == pytest.approx(analytic.outage_numeric(params, psi), abs=1e-8)


def test_outage_monotone_and_ordered(p_greater_q, p_less_q):
    psi_grid = np.linspace(0.0, 10.0, 51)
    high = [analytic.outage_probability(p_greater_q, psi) for psi in psi_grid]
    low = [analytic.outage_probability(p_less_q, psi) for psi in psi_grid]
    assert np.all(np.diff(high) >= 0.0)
    assert all(l >= h for l, h in zip(low, high))


@pytest.mark.parametrize("p, q", MEAN_PAIRS)
def test_mean_capacity_matches_quadrature(p, q):
    params = ScenarioParams(p=p, q=q)
    assert analytic.mean_capacity(params) == pytest.approx(analytic.mean_capacity_numeric(params), abs=1e-8)


def test_mean_capacity_value(p_greater_q):
    assert analytic.mean_capacity(p_greater_q) == pytest.approx(0.8226, abs=5e-4)


def test_capacity_pdf(p_greater_q, p_less_q):
    density = analytic.capacity_pdf(p_greater_q)
    assert density(0.0) == pytest.approx(analytic.sinr_pdf_single_unit(p_greater_q)(0.0), rel=1e-14)
    assert oracle.density_mass(density).value == pytest.approx(1.0, abs=1e-8)
    mean = oracle.integrate(lambda x: x * density(x), density.lo, density.hi).value
    assert mean == pytest.approx(analytic.mean_capacity(p_greater_q), abs=1e-8)

    grid = np.linspace(0.01, 3.99, 400)
    diff = analytic.capacity_pdf(p_less_q)(grid) - density(grid)
    assert np.any(diff > 0) and np.any(diff < 0)


def test_capacity_cdf(p_greater_q):
    cdf = analytic.capacity_cdf(p_greater_q)
    assert cdf(math.log(2.0)) == pytest.approx(analytic.outage_probability(p_greater_q, 1.0), abs=1e-12)
    assert cdf(-0.5) == 0.0


def test_performance_metrics_dispatch(p_greater_q, general_rates):
    closed = analytic.performance_metrics(p_greater_q, psi=1.0)
    assert closed["method"] == "closed_form"
    assert closed["outage"] == pytest.approx(0.46735, abs=1e-5)

    numeric = analytic.performance_metrics(general_rates, psi=1.0)
    assert numeric["method"] == "quadrature"
    assert numeric["outage"] == pytest.approx(analytic.sinr_cdf(general_rates)(1.0), abs=1e-8)
    assert 0.0 < numeric["mean_capacity_nats"] < numeric["mean_sinr"]


def test_multi_density_is_zero_past_z_max_and_bounded_by_capped_term(p_less_q):
    params = p_less_q.replace(n_su=3)
    density = analytic.sinr_pdf_multi(params)
    assert density(1e6) == 0.0
    z = 40.0
    capped_term = params.lambda1_bar * 5.0 * regularized_upper_gamma(3, 2.0) * math.exp(-params.lambda1_bar * 5.0 * z)
    assert density(z) >= capped_term > 0.0


def test_closed_forms_at_small_power_match_quadrature():
    params = ScenarioParams(p=1e-3, q=1.0)
    assert analytic.mean_sinr(params) == pytest.approx(analytic.mean_sinr_numeric(params), rel=1e-6)
    assert analytic.mean_capacity(params) == pytest.approx(analytic.mean_capacity_numeric(params), rel=1e-6)


@pytest.mark.parametrize("p", [1e-3, 1e-4])
def test_closed_forms_at_small_power_follow_asymptotics(p):
    params = ScenarioParams(p=p, q=1.0)
    # E[γp / (1 + pα)] and E[log1p] expanded to second order in p
    assert analytic.mean_sinr(params) == pytest.approx(p - p ** 2, rel=1e-5)
    assert analytic.mean_capacity(params) == pytest.approx(p - 2 * p ** 2, rel=1e-5)
    metrics = analytic.performance_metrics(params)
    assert all(math.isfinite(metrics[k]) for k in ("mean_sinr", "outage", "mean_capacity_nats"))


def test_many_sus_with_huge_cap_have_no_atom():
    params = ScenarioParams(p=1.0, q=1e12, n_su=30)
    law = analytic.ni_law_multi(params)
    assert law.atoms == ()
    values = analytic.sinr_pdf_multi(params)(np.array([0.0, 0.01, 0.1]))
    assert np.all(np.isfinite(values))
    assert np.all(values >= 0.0)
