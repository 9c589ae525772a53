# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import numpy as np
import pytest

import hardy.exponents as exponents
import hardy.nonlinear as nonlinear
import hardy.verify as verify
from hardy.verify import Trend


def small_harmonic(n, mu):
    alpha_plus, _ = exponents.alphas(mu)
    return verify.closed_form(n, mu, alpha_plus, alpha_plus)


def large_harmonic(n, mu):
    alpha_plus, _ = exponents.alphas(mu)
    return verify.closed_form(n, mu, alpha_plus,
                              exponents.reflect(n, alpha_plus))


@pytest.mark.fast
def test_small_harmonic_residual():
    u = small_harmonic(3, -1.0)
    for x1 in (0.1, 0.5, 1.7):
        x = verify.point(3, x1, 0.4)
        assert abs(verify.pde_residual(u, x)) < 1e-6


@pytest.mark.fast
def test_strong_singular_solution_residual():
    u = verify.strong_singular_solution(3, 0.0, 5.0)
    assert u.nonlinear
    x = verify.point(3, 0.7, -0.3)
    assert abs(verify.pde_residual(u, x)) < 1e-6
    assert verify.strong_singular_solution(3, -3.0, 3.0) is None


@pytest.mark.fast
def test_non_solution_residual():
    alpha_plus, _ = exponents.alphas(0.0)

    def function(x):
        return x[..., 0] ** alpha_plus + 0.05 * x[..., 0] ** 2

    u = verify.FieldSampler(function, 3, 0.0)
    assert abs(verify.pde_residual(u, verify.point(3, 0.5))) > 1e-2


@pytest.mark.fast
def test_stencil_out_of_domain():
    u = small_harmonic(3, 0.0)
    with pytest.raises(verify.StencilOutOfDomain):
        verify.pde_residual(u, verify.point(3, 0.01), h=0.005)


@pytest.mark.fast
def test_richardson_ratio():
    x = verify.point(3, 0.5)
    for u in (small_harmonic(3, -1.0), large_harmonic(3, -1.0),
              verify.strong_singular_solution(3, 0.0, 3.0)):
        assert verify.richardson_ratio(u, x) == pytest.approx(4, rel=1e-2)


@pytest.mark.fast
def test_closed_form_residuals(rng):
    n, mu = 4, -1.0
    _, alpha_minus = exponents.alphas(mu)
    points = verify.random_points(n, 100, rng)
    for u in (small_harmonic(n, mu), large_harmonic(n, mu),
              verify.closed_form(n, mu, alpha_minus, alpha_minus),
              verify.closed_form(n, mu, alpha_minus,
                                 exponents.reflect(n, alpha_minus))):
        assert verify.max_residual(u, points) < 1e-6
    u = verify.strong_singular_solution(n, mu, 3.0)
    assert verify.max_residual(u, points) < 1e-6


@pytest.mark.fast
def test_ko_supersolution_constant():
    assert verify.ko_supersolution_constant(3, 0.0, 2.0, 1.0, 0.01) == 8
    assert verify.ko_supersolution_constant(3, 0.0, 2.0, 2.0, 0.02) == 32
    assert verify.ko_supersolution_constant(3, -2.0, 4.0, 1.0, 1e-3) == 2
    with pytest.raises(exponents.ParameterError):
        verify.ko_supersolution_constant(3, 0.0, 2.0, 1.0, 1.0)


@pytest.mark.fast
def test_ko_bracket_sign():
    x1, r = verify._ko_grid(1.0, 0.01, 50)
    bracket = verify.ko_bracket(3, 0.0, 2.0, 1.0, 0.01, 8.0, x1, r)
    assert np.all(bracket <= 0)
    bracket = verify.ko_bracket(3, 0.0, 2.0, 1.0, 0.01, 4.0, x1, r)
    assert np.any(bracket > 0)


@pytest.mark.fast
def test_ko_bound():
    assert verify.ko_bound(3, -2.0, 4.0, 1.0) == \
        pytest.approx(2 * 2 ** (2 / 3), rel=1e-12)


@pytest.mark.fast
def test_ko_bound_check():
    u = verify.strong_singular_solution(3, 0.0, 2.0)
    report = verify.ko_bound_check(u, 3, 0.0, 2.0, 1.0)
    assert report.passed
    assert report.constant_found == pytest.approx(6, rel=1e-12)
    assert report.bound == 32

    violating = verify.closed_form(3, 0.0, -2.0, -2.0, 60.0, 2.0, True)
    report = verify.ko_bound_check(violating, 3, 0.0, 2.0, 1.0)
    assert not report.passed
    assert len(report.worst_point) == 3


@pytest.mark.slow
def test_ko_bound_check_minus_profile():
    params = exponents.make_params(3, 0.0, 2.0)
    profile = nonlinear.solve_profile(params, 'minus')
    report = verify.ko_bound_check(profile.sampler(), 3, 0.0, 2.0, 1.0)
    assert report.passed
    assert report.constant_found <= 2 + 1e-6


@pytest.mark.fast
def test_ko_nonexistence_sweep():
    # p = 4 > p_KO = 3: x₁^(2/3) times A·x₁^α₋|x|^(-2/3-α₋) grows
    # like (x₁/|x|)^(-1/3) for every amplitude A
    amplitudes = [1e-3, 1e-2, 0.1, 1.0, 10.0]
    sweep = verify.ko_nonexistence_sweep(3, -2.0, 4.0, amplitudes)
    assert sweep.all_violate
    assert len(sweep.reports) == len(amplitudes)
    for report in sweep.reports:
        assert not report.passed
        assert report.boundary_trend == verify.Trend.UNBOUNDED
        assert report.constant_found == np.inf


@pytest.mark.fast
def test_ko_bound_check_follows_boundary_trend():
    # 1e-3·x₁^(-1)|x|^(1/3) stays below the bound on any grid with
    # x₁/|x| ≥ 1e-6 yet is unbounded against x₁^(-2/3)
    candidate = verify.closed_form(3, -2.0, -1.0, -2 / 3, 1e-3, 4.0, True)
    bound = verify.ko_bound(3, -2.0, 4.0, 1.0)
    x = verify._half_ball(3, 0.5, 20, 20, verify.KO_BOUND_T_MIN)
    assert np.max(candidate(x) * x[:, 0] ** (2 / 3)) < bound
    report = verify.ko_bound_check(candidate, 3, -2.0, 4.0, 1.0, bound)
    assert not report.passed
    assert report.boundary_trend == verify.Trend.UNBOUNDED


@pytest.mark.fast
def test_growth_limit():
    assert verify.growth_limit([1, 1, 1]) == (Trend.BOUNDED, 1)
    assert verify.growth_limit([1, 2, 4]).trend == Trend.UNBOUNDED
    assert verify.growth_limit([1, 0.1, 0.01]).trend == Trend.TO_ZERO
    limit = verify.growth_limit([1, 1.5, 1.75])
    assert limit.trend == Trend.BOUNDED
    assert limit.estimate == pytest.approx(2)
    assert verify.growth_limit([1, 2, 1.5]).trend == Trend.INCONCLUSIVE
    assert verify.growth_limit([1, np.inf, 2]).trend == Trend.UNBOUNDED
    assert verify.growth_limit([0, 0, 0]).trend == Trend.TO_ZERO


@pytest.mark.fast
def test_phragmen_lindelof_small_harmonic():
    verdict = verify.phragmen_lindelof_check(small_harmonic(3, -1.0))
    assert verdict.hypotheses_hold
    assert verdict.conclusion_holds
    assert verdict.inconclusive == []


@pytest.mark.fast
def test_phragmen_lindelof_singular_harmonic():
    _, alpha_minus = exponents.alphas(-1.0)
    h = verify.closed_form(3, -1.0, alpha_minus, alpha_minus)
    verdict = verify.phragmen_lindelof_check(h)
    assert not verdict.hypothesis_b
    assert not verdict.hypotheses_hold
    assert not verdict.conclusion_holds


@pytest.mark.fast
def test_phragmen_lindelof_kelvin_transform():
    n, mu = 3, -1.0
    alpha_plus, _ = exponents.alphas(mu)
    k = n - 2 + 2 * alpha_plus
    h = verify.closed_form(n, mu, alpha_plus, alpha_plus - k)
    verdict = verify.phragmen_lindelof_check(h)
    assert not verdict.hypothesis_b
    assert not verdict.conclusion_holds


@pytest.mark.fast
def test_scaling_fixes_strong_singular_solution(rng):
    u = verify.strong_singular_solution(3, 0.0, 3.0)
    points = verify.random_points(3, 10, rng)
    for a in (0.5, 2.0, 7.0):
        assert verify.scaling_check(u, 3.0, a, points) < 1e-8
        scaled = u.scaled(a)
        assert scaled(points) == pytest.approx(u(points), rel=1e-12)


@pytest.mark.fast
def test_scaling_maps_residuals(rng):
    u = small_harmonic(3, 0.0)
    points = verify.random_points(3, 10, rng)
    assert verify.scaling_check(u, 2.0, 2.0, points, nonlinearity=True) < \
        1e-8
    with pytest.raises(exponents.ParameterError):
        verify.scaling_check(u, 2.0, -1.0, points)
