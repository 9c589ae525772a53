# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import numpy as np
import pytest

import hardy.exponents as exponents
import hardy.mesh as mesh
import hardy.nonlinear as nonlinear
import hardy.verify as verify
from hardy.exponents import Branch
from hardy.nonlinear import Closure

ROWS = [
    ((3, 0.0, 1.5), Branch.PLUS, 1, Closure.FLUX_FREE),
    ((3, -0.5, 5.0), Branch.MINUS, 2, Closure.PINNED),
    ((3, 0.0, 2.0), Branch.MINUS, 3, Closure.FLUX_FREE),
    ((3, -2.0, 2.0), Branch.MINUS, 4, Closure.PINNED)
]


def params(n, mu, p=None):
    return exponents.make_params(n, mu, p)


@pytest.fixture(scope='module')
def plus_profile():
    return nonlinear.solve_profile(params(3, 0.0, 1.5), 'plus')


@pytest.mark.parametrize("args,branch,row,closure", ROWS)
def test_bracket(args, branch, row, closure):
    bracket = nonlinear.build_bracket(params(*args), branch)
    assert bracket.row == row
    assert bracket.c > 0 and bracket.tau > 0
    assert 0 < bracket.epsilon

    grid = mesh.verification_grid(20000)
    assert np.all(bracket.sub.ratio(grid) <= bracket.super.ratio(grid))
    defect, scale = bracket.super.scaled_defect(grid, *bracket.params)
    assert np.all(defect <= nonlinear.DEFECT_SLACK * scale)
    defect, scale = bracket.sub.scaled_defect(grid, *bracket.params)
    assert np.all(defect >= -nonlinear.DEFECT_SLACK * scale)


@pytest.mark.fast
def test_row_two_supersolution_is_pure_power():
    bracket = nonlinear.build_bracket(params(3, -0.5, 5.0), 'minus')
    assert bracket.kappa_super == 0
    assert not hasattr(bracket, 'kappa')
    assert bracket.lambda_zero <= 0


@pytest.mark.fast
def test_endpoint_closure():
    for args, branch, _, closure in ROWS:
        table = exponents.derive_exponents(params(*args))
        assert nonlinear.endpoint_closure(table, branch) == closure


@pytest.mark.fast
def test_no_bracket():
    # p = p_c for n = 3, μ = 0
    with pytest.raises(nonlinear.NoBracket):
        nonlinear.build_bracket(params(3, 0.0, 2.0), 'plus')
    with pytest.raises(nonlinear.NoBracket):
        nonlinear.build_bracket(params(3, 0.0, 2.5), Branch.PLUS)
    with pytest.raises(nonlinear.NoBracket):
        nonlinear.solve_profile(params(3, -2.0, 4.0), 'minus')
    with pytest.raises(exponents.ParameterError):
        nonlinear.build_bracket(params(3, 0.0), 'plus')


def test_plus_profile(plus_profile):
    profile = plus_profile
    assert profile.branch == Branch.PLUS
    assert profile.closure == Closure.FLUX_FREE
    assert profile.residual_sup <= nonlinear.DEFAULT_TOL
    assert profile.v_limit > 0
    assert profile.exponent == 1

    nodes = profile.nodes
    w = profile.w
    slack = 1e-10 * np.max(w)
    assert np.all(w >= profile.bracket.sub.ratio(nodes) - slack)
    assert np.all(w <= profile.bracket.super.ratio(nodes) + slack)
    assert profile.envelope_constant() >= 1


def test_plus_profile_angular_residual(plus_profile):
    t = mesh.verification_grid()
    residual = nonlinear.profile_residual(plus_profile, t)
    assert np.max(residual) <= nonlinear.DEFAULT_TOL
    assert plus_profile.residual_sup == np.max(residual)


def test_plus_profile_endpoint_patches(plus_profile):
    grid = plus_profile.profile.grid
    for inside, outside in ((grid[0], grid[0] * (1 - 1e-9)),
                            (grid[-1], grid[-1] + (1 - grid[-1]) * 1e-9)):
        assert plus_profile.ratio(outside) == \
            pytest.approx(plus_profile.ratio(inside), rel=1e-8)
    assert plus_profile.ratio(0.0) == plus_profile.v_limit


def test_plus_profile_follows_finite_volume(plus_profile):
    w = plus_profile.w
    deviation = np.max(np.abs(plus_profile.ratio(plus_profile.nodes) - w))
    assert deviation <= 1e-4 * np.max(w)


@pytest.mark.fast
@pytest.mark.parametrize("args,branch,pinned", [
    ((3, 0.0, 1.5), 'plus', False),
    ((3, -0.5, 5.0), 'minus', True),
    ((3, -2.0, 2.0), 'minus', True)
])
def test_origin_series_solves_equation(args, branch, pinned):
    p = params(*args)
    ode = nonlinear.ratio_ode(p, branch)
    series = nonlinear.OriginSeries(ode, 1.3, 0.4 if pinned else 0.0,
                                    pinned)
    assert series.ratio(0.0) == 1.3
    t = np.geomspace(1e-3 * series.radius, series.radius, 30)
    assert np.max(nonlinear.angular_residual(p, series, t)) < 1e-10


@pytest.mark.fast
def test_origin_series_resonance():
    # 1-2a = 3 is reached with a nonzero right-hand side
    ode = nonlinear.ratio_ode(params(3, -2.0, 2.0), 'minus')
    series = nonlinear.OriginSeries(ode, 1.3, 0.4, pinned=True)
    assert series.log_coefficient != 0
    assert series.powers[-1] == pytest.approx(3)
    assert series.coefficients[-1] == 0.4
    assert series.radius < nonlinear.ORIGIN_RADIUS_CAP


@pytest.mark.fast
def test_axis_series_solves_equation():
    p = params(3, 0.0, 1.5)
    series = nonlinear.AxisSeries(nonlinear.ratio_ode(p, 'plus'), 2.0)
    assert series.ratio(1.0) == 2.0
    t = 1 - np.geomspace(1e-8, nonlinear.AXIS_DELTA, 30)
    assert np.max(nonlinear.angular_residual(p, series, t)) < 1e-11


@pytest.mark.fast
def test_series_of_constant_solution():
    ode = nonlinear.ratio_ode(params(3, 0.0, 2.0), 'minus')
    origin = nonlinear.OriginSeries(ode, 2.0)
    axis = nonlinear.AxisSeries(ode, 2.0)
    assert origin.log_coefficient == 0
    assert np.all(origin.coefficients[1:] == 0)
    assert np.all(axis.coefficients[1:] == 0)


@pytest.mark.fast
def test_origin_series_needs_positive_exponents():
    # a(p-1)+2 < 0 for a = -1, p = 5
    ode = nonlinear.RatioODE(3, -2.0, 5.0, -1.0, 1.0)
    with pytest.raises(nonlinear.Error):
        nonlinear.OriginSeries(ode, 1.0)


@pytest.mark.slow
def test_plus_profile_pde_residual(plus_profile, rng):
    points = verify.random_points(3, 20, rng)
    assert verify.max_residual(plus_profile.sampler(), points) < 1e-4


@pytest.mark.parametrize("args,level", [
    ((3, 0.0, 2.0), 2.0),
    ((4, 0.0, 1.8), 1.25 ** 1.25)
])
def test_constant_profile_oracle(args, level):
    profile = nonlinear.solve_profile(params(*args), 'minus')
    assert profile.closure == Closure.FLUX_FREE
    assert profile.v_limit == pytest.approx(level, rel=1e-6)
    assert np.allclose(profile.w, level, rtol=1e-6)
    assert profile.residual_sup <= nonlinear.DEFAULT_TOL
    assert exponents.constant_profile(params(*args)) == \
        pytest.approx(profile.v_limit, rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("args", [(3, -0.5, 5.0), (3, -2.0, 2.0)])
def test_pinned_profiles(args):
    profile = nonlinear.solve_profile(params(*args), 'minus')
    assert profile.closure == Closure.PINNED
    assert profile.v_limit == profile.bracket.c
    assert profile.residual_sup <= nonlinear.DEFAULT_TOL
    assert np.all(profile.w > 0)


@pytest.mark.slow
@pytest.mark.parametrize("args", [(3, 0.0, 1.5), (3, 3 / 16, 1.8)])
def test_uniqueness(args, rng):
    report = nonlinear.check_uniqueness_plus(params(*args), n_starts=5,
                                             rng=rng)
    assert report.agree
    assert report.max_deviation <= 1e-6
    assert report.w_zero_positive
    assert report.starts == 5
    assert report.methods == ['monotone', 'monotone', 'newton', 'monotone',
                              'newton']


@pytest.mark.fast
def test_uniqueness_needs_positive_lambda_zero():
    with pytest.raises(nonlinear.NoBracket):
        nonlinear.check_uniqueness_plus(params(3, 0.0, 2.5))


def test_integral_identity(plus_profile):
    assert nonlinear.integral_identity_check(plus_profile) < 1e-6


def test_integral_identity_rejects_shifted_profile():
    profile = nonlinear.solve_profile(params(3, 0.0, 1.9), 'plus')
    assert nonlinear.integral_identity_check(profile) < 1e-6
    # v + 0.1 as a ratio with exponent 0
    shifted = nonlinear.identity_defect(
        profile.params, lambda t: profile.value(t) + 0.1, 0.0)
    assert shifted > 1e-2


@pytest.mark.fast
def test_integral_identity_on_constant_solution():
    defect = nonlinear.identity_defect(params(3, 0.0, 2.0), lambda t: 2.0,
                                       0.0)
    assert defect < 1e-8


def test_solution_homogeneity(plus_profile):
    x = np.array([0.3, 0.4, -0.1])
    strong = exponents.strong_exponent(1.5)
    assert nonlinear.eval_solution(plus_profile, 2 * x) == \
        pytest.approx(2 ** strong * plus_profile.evaluate(x), rel=1e-12)
    with pytest.raises(exponents.ParameterError):
        nonlinear.eval_solution(plus_profile, [0.0, 1.0, 0.0])


@pytest.mark.fast
def test_power_sum_defect_vanishes_on_constant_solution():
    p = params(3, 0.0, 2.0)
    power_sum = nonlinear.PowerSum([(2.0, 0.0)])
    t = mesh.verification_grid(100)
    defect, scale = power_sum.scaled_defect(t, *p)
    assert np.allclose(defect / scale, 0, atol=1e-15)
    assert np.allclose(power_sum.value(t), 2)
