# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import numpy as np
import pytest

import hardy.angular_ode as angular_ode
import hardy.exponents as exponents
import hardy.mesh as mesh
from hardy.angular_ode import LinearAngularODE


def closed_grid(count=2000):
    return np.concatenate([[0.0], mesh.verification_grid(count), [1.0]])


@pytest.mark.fast
def test_series_of_polynomial_solution():
    # k = t solves the n = 3, μ = 0 equation at Λ = 2
    ode = LinearAngularODE(3, 0.0, 0.0, 2.0)
    expansion = angular_ode.frobenius_expansion(ode, 0, 1.0)
    assert expansion.leading() == 1
    assert np.allclose(expansion.coefficients[1:], 0)
    assert expansion.value(0.3) == pytest.approx(0.3, rel=1e-14)
    assert expansion.derivative(0.3) == pytest.approx(1, rel=1e-14)


@pytest.mark.fast
def test_series_satisfies_equation():
    ode = LinearAngularODE(4, -1.0, 0.0, 0.7)
    alpha_plus, alpha_minus = exponents.alphas(-1.0)
    t = np.geomspace(1e-4, 0.05, 20)
    for exponent in (alpha_plus, alpha_minus):
        expansion = angular_ode.frobenius_expansion(ode, 0, exponent)
        terms = ode.residual_terms(t, expansion.value(t),
                                   expansion.derivative(t),
                                   expansion.second_derivative(t))
        scale = sum(np.abs(term) for term in terms)
        assert np.max(np.abs(sum(terms)) / scale) < 1e-12


@pytest.mark.fast
def test_series_order_too_low():
    ode = LinearAngularODE(3, 0.0, 0.0, 2.0)
    with pytest.raises(angular_ode.Error):
        angular_ode.frobenius_expansion(ode, 0, 1.0, order=1)


@pytest.mark.fast
def test_resonant_indices():
    # α± = 3/2, -1/2 differ by 2 and the second solution needs a logarithm
    ode = LinearAngularODE(3, -0.75, 0.0, 1.0)
    with pytest.raises(angular_ode.ResonantIndices) as e:
        angular_ode.frobenius_expansion(ode, 0, -0.5)
    assert e.value.index == 2


@pytest.mark.fast
def test_wronskian_is_constant():
    ode = LinearAngularODE(4, -1.0, 0.0, 0.7)
    alpha_plus, alpha_minus = exponents.alphas(-1.0)
    small = angular_ode.frobenius_expansion(ode, 0, alpha_plus)
    large = angular_ode.frobenius_expansion(ode, 0, alpha_minus)

    def first(t):
        return small.value(t), small.derivative(t)

    def second(t):
        return large.value(t), large.derivative(t)

    near = angular_ode.wronskian(ode, first, second, 0.02)
    far = angular_ode.wronskian(ode, first, second, 0.08)
    assert near != 0
    assert far == pytest.approx(near, rel=1e-10)


@pytest.mark.fast
def test_integration_range_checked():
    ode = LinearAngularODE(3, 0.0, 0.0, 1.0)
    with pytest.raises(angular_ode.Error):
        angular_ode.integrate_interior(ode, 0.0, 0.5, (1.0, 0.0))
    with pytest.raises(angular_ode.Error):
        angular_ode.integrate_interior(ode, 0.5, 1.0, (1.0, 0.0))


@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.9])
def test_chebyshev_oracle(gamma):
    profile = angular_ode.solve_k_gamma(2, 0.0, 0, gamma)
    t = closed_grid()
    exact = np.cos(gamma * np.arccos(t))
    assert profile.normalization == "k(1)=1"
    assert np.max(np.abs(profile.value(t) - exact)) < 1e-6


def test_k_gamma_residual():
    profile = angular_ode.solve_k_gamma(3, -1.0, 0, 0.4)
    residual = angular_ode.ode_residual(profile, mesh.verification_grid(500))
    assert np.max(residual) < 1e-6
    assert np.all(profile.value(closed_grid(500)[1:]) > 0)


def test_k_gamma_origin_behavior():
    profile = angular_ode.solve_k_gamma(3, 0.0, 0, 0.5)
    fit = angular_ode.classify_origin_behavior(profile)
    assert fit.singular
    assert fit.A > 0


@pytest.mark.fast
def test_power_profile_is_regular_at_origin():
    alpha_plus, _ = exponents.alphas(0.0)
    profile = angular_ode.PowerProfile(3, 0.0, alpha_plus)
    fit = angular_ode.classify_origin_behavior(profile)
    assert not fit.singular
    assert fit.B == pytest.approx(1, rel=1e-8)
    assert profile.leading_ratio(alpha_plus) == 1


@pytest.mark.fast
def test_close_indicial_roots():
    alpha_plus, _ = exponents.alphas(0.2499)
    profile = angular_ode.PowerProfile(3, 0.2499, alpha_plus)
    with pytest.raises(angular_ode.IllConditionedFit):
        angular_ode.classify_origin_behavior(profile)


@pytest.mark.fast
def test_eigenvalue_collision():
    # Λ(1) = 2 is the first eigenvalue for n = 3, μ = 0
    with pytest.raises(angular_ode.EigenvalueCollision) as e:
        angular_ode.solve_k_gamma(3, 0.0, 0, 1.0)
    assert e.value.s == 1


@pytest.mark.fast
def test_power_profile_residual():
    _, alpha_minus = exponents.alphas(-2.0)
    profile = angular_ode.PowerProfile(5, -2.0, alpha_minus)
    t = mesh.verification_grid(200)
    assert np.allclose(profile.value(t), t ** alpha_minus, rtol=1e-15)
    assert np.max(angular_ode.ode_residual(profile, t)) < 1e-12


@pytest.mark.fast
def test_patch_leading_ratio():
    patch = angular_ode.EndpointPatch([
        (2.0, angular_ode.FrobeniusExpansion(0, 0.5, [1.0, 3.0])),
        (0.0, angular_ode.FrobeniusExpansion(0, -0.5, [1.0]))])
    assert patch.leading_ratio(0.5) == 2
    assert patch.leading_ratio(0.25) == 0
    singular = angular_ode.EndpointPatch([
        (-1.0, angular_ode.FrobeniusExpansion(0, -0.5, [1.0]))])
    assert singular.leading_ratio(0.5) == -np.inf


@pytest.mark.fast
@pytest.mark.parametrize("endpoint", [0, 1])
def test_series_stable_under_order_doubling(endpoint):
    n, mu, m, Lambda = 4, -1.0, 1, 0.7
    indices = exponents.angular_indices(n, mu, m, Lambda)
    ode = LinearAngularODE(n, mu, indices.nu_m, Lambda)
    exponent = exponents.alphas(mu)[0] if endpoint == 0 else \
        indices.kappa_regular
    base = angular_ode.frobenius_expansion(ode, endpoint, exponent, 14)
    doubled = angular_ode.frobenius_expansion(ode, endpoint, exponent, 28)
    x = np.geomspace(1e-4, base.radius, 20)
    t = x if endpoint == 0 else 1 - x
    scale = np.max(np.abs(doubled.value(t)))
    assert np.max(np.abs(base.value(t) - doubled.value(t))) < 1e-11 * scale
    scale = np.max(np.abs(doubled.derivative(t)))
    assert np.max(np.abs(base.derivative(t) - doubled.derivative(t))) < \
        1e-10 * scale


@pytest.mark.fast
@pytest.mark.parametrize("endpoint", [0, 1])
def test_series_and_integrator_agree_at_handoff(endpoint):
    n, mu, m, Lambda = 4, -1.0, 1, 0.7
    indices = exponents.angular_indices(n, mu, m, Lambda)
    ode = LinearAngularODE(n, mu, indices.nu_m, Lambda)
    exponent = exponents.alphas(mu)[0] if endpoint == 0 else \
        indices.kappa_regular
    series = angular_ode.frobenius_expansion(ode, endpoint, exponent)
    near, far = mesh.DEFAULT_DELTA, series.radius / 2
    if endpoint == 1:
        near, far = 1 - near, 1 - far
    propagation = angular_ode.integrate_interior(
        ode, near, far, (series.value(near), series.derivative(near)),
        1e-12)
    k, dk = propagation.final
    assert k == pytest.approx(series.value(far), rel=1e-9)
    assert dk == pytest.approx(series.derivative(far), rel=1e-9)


def test_k_gamma_origin_patch_meets_interpolant():
    profile = angular_ode.solve_k_gamma(3, -1.0, 0, 0.4)
    t0 = profile.grid[0]
    # grid[0] itself is evaluated by the interpolant
    assert profile.expansion_at_0.value(t0) == \
        pytest.approx(profile.value(t0), rel=1e-6)
    assert profile.expansion_at_0.derivative(t0) == \
        pytest.approx(profile.derivative(t0), rel=1e-5)
