# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

#
# The linear angular equation
#
#   (1-t²)k'' - (n-1)t k' + (μ/t² + Λ - ν/(1-t²))k = 0,   0 < t < 1,
#
# obtained by separating r^γ k(cos θ₁) p(η). Both endpoints are regular
# singular points. Near them solutions are represented by Frobenius
# series; in between by an adaptive Runge-Kutta integrator.
#

import collections
import math

import numpy as np
import scipy.integrate
import scipy.interpolate
import scipy.special

import hardy.exponents as exponents
import hardy.mesh as mesh
from hardy.logging import LogCategory, debug, warning

DEFAULT_DELTA = mesh.DEFAULT_DELTA
DEFAULT_ORDER = 14
DEFAULT_TOL = 1e-10

RADIUS_CAP = 0.5
RADIUS_EPSILON = 1e-16
RESONANCE_TOLERANCE = 1e-10

SINGULAR_THRESHOLD = 1e-6
ILL_CONDITIONED_GAP = 0.05
FIT_POINTS = 8
FIT_OUTER = 0.05

COLLISION_GAP = 1e-6


class Error(Exception):
    def __init__(self, message):
        Exception.__init__(self, message)


class ResonantIndices(Error):
    def __init__(self, endpoint, exponent, index):
        Error.__init__(self, "indicial roots at t=%d resonate: exponent "
                       "%.17g hits a vanishing recurrence denominator at "
                       "order %d" % (endpoint, exponent, index))
        self.endpoint = endpoint
        self.exponent = exponent
        self.index = index


class StepSizeUnderflow(Error):
    def __init__(self, t_from, t_to, reason):
        Error.__init__(self, "integration from t=%g towards t=%g failed: "
                       "%s" % (t_from, t_to, reason))
        self.t_from = t_from
        self.t_to = t_to


class EigenvalueCollision(Error):
    def __init__(self, Lambda, eigenvalue, s, m):
        Error.__init__(self, "Λ=%.17g collides with eigenvalue Λ(%d,%d)="
                       "%.17g" % (Lambda, s, m, eigenvalue))
        self.Lambda = Lambda
        self.eigenvalue = eigenvalue
        self.s = s
        self.m = m


class IllConditionedFit(Error):
    def __init__(self, fit, gap):
        Error.__init__(self, "origin fit is ill-conditioned (α₊-α₋=%g, "
                       "condition number %.3g): A=%.17g, B=%.17g" %
                       (gap, fit.condition, fit.A, fit.B))
        self.fit = fit
        self.gap = gap


class LinearAngularODE(collections.namedtuple(
        'LinearAngularODE', ['n', 'mu', 'nu', 'Lambda'])):

    def potential(self, t):
        return self.mu / t ** 2 + self.Lambda - self.nu / (1 - t ** 2)

    def second_derivative(self, t, k, dk):
        return ((self.n - 1) * t * dk - self.potential(t) * k) / (1 - t ** 2)

    def rhs(self, t, state):
        k, dk = state
        return [dk, self.second_derivative(t, k, dk)]

    def residual_terms(self, t, k, dk, ddk):
        return ((1 - t ** 2) * ddk, -(self.n - 1) * t * dk,
                self.potential(t) * k)

    def sigma(self, t):
        return (1 - t ** 2) ** ((self.n - 1) / 2)

    def indicial_roots(self, endpoint):
        if endpoint == 0:
            return exponents.alphas(self.mu)
        b = (self.n - 3) / 2
        root = math.sqrt(b * b + self.nu)
        return (root - b) / 2, (-root - b) / 2

    def series_polynomials(self, endpoint):
        """Coefficients (ascending) of q2, q1, q0 such that the equation
        reads x²q2(x)k_xx + x q1(x)k_x + q0(x)k = 0 in the local
        variable x = t (endpoint 0) or x = 1-t (endpoint 1)."""
        P = np.polynomial.Polynomial
        x = P([0.0, 1.0])
        n, mu, nu, Lambda = self
        if endpoint == 0:
            q2 = (1 - x ** 2) ** 2
            q1 = -(n - 1) * x ** 2 * (1 - x ** 2)
            q0 = mu * (1 - x ** 2) + Lambda * (x ** 2 - x ** 4) - nu * x ** 2
        else:
            q2 = (2 - x) ** 2 * (1 - x) ** 2
            q1 = (n - 1) * (2 - x) * (1 - x) ** 3
            q0 = mu * x * (2 - x) + Lambda * x * (2 - x) * (1 - x) ** 2 - \
                nu * (1 - x) ** 2
        size = 1 + max(q.degree() for q in (q2, q1, q0))
        return tuple(np.pad(q.coef, (0, size - len(q.coef)))
                     for q in (q2, q1, q0))


def make_ode(n, mu, m, Lambda):
    return LinearAngularODE(n, mu, exponents.nu(n, m), Lambda)


class FrobeniusExpansion:
    def __init__(self, endpoint, exponent, coefficients, radius=None):
        self.endpoint = endpoint
        self.exponent = exponent
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.order = len(self.coefficients) - 1
        if radius is None:
            radius = self._radius()
        self.radius = radius

    def _radius(self):
        if self.order < 2:
            return RADIUS_CAP
        tail = np.max(np.abs(self.coefficients[-2:]))
        if tail == 0:
            return RADIUS_CAP
        lead = abs(self.coefficients[0])
        return min(RADIUS_CAP,
                   (RADIUS_EPSILON * lead / tail) ** (1 / self.order))

    def _local(self, t):
        t = np.asarray(t, dtype=float)
        return t if self.endpoint == 0 else 1 - t

    def _sum(self, x, weights, powers):
        mask = weights != 0
        if not np.any(mask):
            return np.zeros_like(x)
        with np.errstate(divide='ignore', invalid='ignore'):
            terms = np.power.outer(x, powers[mask]) * weights[mask]
        return terms.sum(axis=-1)

    def _powers(self):
        return self.exponent + np.arange(self.order + 1)

    def value(self, t):
        return self._sum(self._local(t), self.coefficients, self._powers())

    def derivative(self, t):
        powers = self._powers()
        sign = 1 if self.endpoint == 0 else -1
        return sign * self._sum(self._local(t), self.coefficients * powers,
                                powers - 1)

    def second_derivative(self, t):
        powers = self._powers()
        return self._sum(self._local(t),
                         self.coefficients * powers * (powers - 1),
                         powers - 2)

    def truncation_estimate(self, t):
        tail = np.max(np.abs(self.coefficients[-2:]))
        x = self._local(t)
        return tail * np.abs(x) ** (self.exponent + self.order + 1)

    def leading(self):
        return self.coefficients[0]


def frobenius_expansion(ode, endpoint, exponent, order=DEFAULT_ORDER):
    if order < 2:
        raise Error("series order must be at least 2")
    return _recurrence(ode, endpoint, exponent, order)


def _recurrence(ode, endpoint, exponent, order):
    q2, q1, q0 = ode.series_polynomials(endpoint)
    scale = 1 + max(np.max(np.abs(q2)), np.max(np.abs(q1)),
                    np.max(np.abs(q0)))

    def indicial(i, e):
        return q2[i] * e * (e - 1) + q1[i] * e + q0[i]

    coefficients = np.zeros(order + 1)
    coefficients[0] = 1.0
    for j in range(1, order + 1):
        total = 0.0
        for i in range(1, min(j, len(q0) - 1) + 1):
            total += coefficients[j - i] * indicial(i, exponent + j - i)
        denominator = indicial(0, exponent + j)
        limit = RESONANCE_TOLERANCE * scale * (1 + j * j)
        if abs(denominator) <= limit:
            magnitude = np.max(np.abs(coefficients[:j]))
            if abs(total) <= limit * magnitude:
                # no logarithmic term at this order
                coefficients[j] = 0.0
                continue
            raise ResonantIndices(endpoint, exponent, j)
        coefficients[j] = -total / denominator
    return FrobeniusExpansion(endpoint, exponent, coefficients)


class Propagation:
    """Dense trajectory (k, k') produced by integrate_interior."""

    def __init__(self, solution, t_from, t_to):
        self.t_from = t_from
        self.t_to = t_to
        self.final = solution.y[:, -1]
        self.steps = len(solution.t) - 1
        self._dense = solution.sol

    def __call__(self, t):
        return self._dense(t)

    def value(self, t):
        return self._dense(t)[0]

    def derivative(self, t):
        return self._dense(t)[1]


def integrate_interior(ode, t_from, t_to, state, tol=DEFAULT_TOL):
    if not (0 < t_from < 1 and 0 < t_to < 1):
        raise Error("integration range [%g, %g] is not inside (0, 1)" %
                    (min(t_from, t_to), max(t_from, t_to)))
    if tol <= 0:
        raise Error("integration tolerance must be positive")
    state = np.asarray(state, dtype=float)
    scale = max(np.max(np.abs(state)), np.finfo(float).tiny)
    solution = scipy.integrate.solve_ivp(ode.rhs, (t_from, t_to), state,
                                         method='DOP853', dense_output=True,
                                         rtol=tol, atol=1e-3 * tol * scale)
    if solution.status != 0:
        raise StepSizeUnderflow(t_from, t_to, solution.message)
    return Propagation(solution, t_from, t_to)


def wronskian(ode, first, second, t):
    k1, dk1 = first(t)
    k2, dk2 = second(t)
    return ode.sigma(t) * (k1 * dk2 - dk1 * k2)


class EndpointPatch:
    """Linear combination of Frobenius expansions at one endpoint."""

    def __init__(self, terms):
        self.terms = [(float(weight), expansion)
                      for weight, expansion in terms]

    def _combine(self, name, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for weight, expansion in self.terms:
            if weight != 0:
                total = total + weight * getattr(expansion, name)(t)
        return total

    def value(self, t):
        return self._combine('value', t)

    def derivative(self, t):
        return self._combine('derivative', t)

    def second_derivative(self, t):
        return self._combine('second_derivative', t)

    def leading_ratio(self, exponent, tolerance=1e-12):
        """lim patch(x)/x^exponent as the local variable x goes to 0."""
        limit = 0.0
        for weight, expansion in self.terms:
            nonzero = np.flatnonzero(expansion.coefficients)
            if weight == 0 or len(nonzero) == 0:
                continue
            power = expansion.exponent + nonzero[0]
            lead = weight * expansion.coefficients[nonzero[0]]
            if power < exponent - tolerance:
                return math.copysign(math.inf, lead)
            if abs(power - exponent) <= tolerance:
                limit += lead
        return limit


class AngularProfile:
    """A solution of an angular equation on [0, 1].

    Inside [grid[0], grid[-1]] the profile is the quintic Hermite
    interpolant of value, first and second derivative data; outside it
    the endpoint patches take over."""

    def __init__(self, grid, values, derivatives, second_derivatives,
                 expansion_at_0, expansion_at_1, normalization, ode=None):
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.derivatives = np.asarray(derivatives, dtype=float)
        self.second_derivatives = np.asarray(second_derivatives, dtype=float)
        self.expansion_at_0 = expansion_at_0
        self.expansion_at_1 = expansion_at_1
        self.normalization = normalization
        self.ode = ode
        self._interpolants = None

    def _interpolant(self, nu):
        if self._interpolants is None:
            data = np.column_stack([self.values, self.derivatives,
                                    self.second_derivatives])
            poly = scipy.interpolate.BPoly.from_derivatives(self.grid, data)
            self._interpolants = (poly, poly.derivative(),
                                  poly.derivative(2))
        return self._interpolants[nu]

    def _evaluate(self, t, nu, name):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        result = np.empty_like(t)
        below = t < self.grid[0]
        above = t > self.grid[-1]
        inside = ~(below | above)
        if np.any(inside):
            result[inside] = self._interior(t[inside], nu)
        if np.any(below):
            result[below] = getattr(self.expansion_at_0, name)(t[below])
        if np.any(above):
            result[above] = getattr(self.expansion_at_1, name)(t[above])
        return result[0] if scalar else result

    def _interior(self, t, nu):
        return self._interpolant(nu)(t)

    def value(self, t):
        return self._evaluate(t, 0, 'value')

    def derivative(self, t):
        return self._evaluate(t, 1, 'derivative')

    def second_derivative(self, t):
        return self._evaluate(t, 2, 'second_derivative')

    def __call__(self, t):
        return self.value(t)

    def leading_ratio(self, exponent):
        return self.expansion_at_0.leading_ratio(exponent)

    def sign_changes(self, floor=1e-12):
        values = self.values
        significant = values[np.abs(values) > floor * np.max(np.abs(values))]
        return int(np.count_nonzero(np.diff(np.sign(significant)) != 0))


def _power_series_at_1(exponent, order):
    # (1-s)^b = Σ binom(b, j)(-s)^j
    j = np.arange(order + 1)
    return scipy.special.binom(exponent, j) * (-1.0) ** j


class PowerProfile(AngularProfile):
    """The closed form t^exponent, evaluated exactly."""

    def __init__(self, n, mu, exponent, order=DEFAULT_ORDER,
                 normalization="t^b"):
        grid = mesh.profile_grid()
        b = exponent
        ode = LinearAngularODE(n, mu, 0.0, exponents.lambda_of(n, b))
        AngularProfile.__init__(
            self, grid, grid ** b, b * grid ** (b - 1),
            b * (b - 1) * grid ** (b - 2),
            EndpointPatch([(1.0, FrobeniusExpansion(0, b, [1.0]))]),
            EndpointPatch([(1.0, FrobeniusExpansion(
                1, 0.0, _power_series_at_1(b, order)))]),
            normalization, ode)
        self.exponent = b

    def _evaluate(self, t, nu, name):
        t = np.asarray(t, dtype=float)
        b = self.exponent
        factor = (1.0, b, b * (b - 1))[nu]
        with np.errstate(divide='ignore'):
            if factor == 0:
                return np.zeros_like(t)[()]
            return factor * t ** (b - nu)


def ode_residual(profile, t, ode=None):
    """Pointwise residual scaled by the size of its terms."""
    ode = ode or profile.ode
    t = np.asarray(t, dtype=float)
    terms = ode.residual_terms(t, profile.value(t), profile.derivative(t),
                               profile.second_derivative(t))
    scale = sum(np.abs(term) for term in terms)
    return np.abs(sum(terms)) / np.maximum(scale, np.finfo(float).tiny)


OriginFit = collections.namedtuple('OriginFit',
                                   ['A', 'B', 'condition', 'singular'])


def _second_solution(ode, exponent, order, outer):
    """A solution with leading behaviour t^exponent when the series
    resonates: the log-free truncation seeds an integration at outer."""
    try:
        return frobenius_expansion(ode, 0, exponent, order), None
    except ResonantIndices as e:
        truncated = _recurrence(ode, 0, exponent, e.index - 1)
        warning("resonant indicial roots at t=0 (order %d); second "
                "solution integrated from t=%g" % (e.index, outer),
                LogCategory.SOLVER)
        state = (truncated.value(outer), truncated.derivative(outer))
        return truncated, state


def classify_origin_behavior(profile, order=DEFAULT_ORDER, tol=DEFAULT_TOL):
    ode = profile.ode
    alpha_plus, alpha_minus = exponents.alphas(ode.mu)
    gap = alpha_plus - alpha_minus
    points = np.geomspace(profile.grid[0], FIT_OUTER, FIT_POINTS)

    small = frobenius_expansion(ode, 0, alpha_plus, order)
    large, seed = _second_solution(ode, alpha_minus, order, FIT_OUTER)

    if seed is None:
        large_values = large.value(points)
        large_derivatives = large.derivative(points)
    else:
        propagation = integrate_interior(ode, FIT_OUTER, points[0], seed, tol)
        large_values = propagation.value(points)
        large_derivatives = propagation.derivative(points)

    k = profile.value(points)
    dk = profile.derivative(points)
    weights = 1 / np.maximum(np.abs(k), np.abs(points * dk))
    matrix = np.concatenate([
        np.column_stack([large_values, small.value(points)]),
        np.column_stack([points * large_derivatives,
                         points * small.derivative(points)])])
    rhs = np.concatenate([k, points * dk])
    row_weights = np.concatenate([weights, weights])
    matrix = matrix * row_weights[:, None]
    rhs = rhs * row_weights

    (A, B), _, _, singular_values = np.linalg.lstsq(matrix, rhs, rcond=None)
    condition = singular_values[0] / singular_values[-1]
    singular = abs(A) > SINGULAR_THRESHOLD * (abs(A) + abs(B))
    fit = OriginFit(float(A), float(B), float(condition), bool(singular))

    debug("origin fit: A=%.17g B=%.17g cond=%.3g" % (A, B, condition),
          LogCategory.SOLVER)

    if gap < ILL_CONDITIONED_GAP:
        raise IllConditionedFit(fit, gap)

    return fit


def _origin_patch(profile, fit, order):
    ode = profile.ode
    alpha_plus, alpha_minus = exponents.alphas(ode.mu)
    small = frobenius_expansion(ode, 0, alpha_plus, order)
    large, seed = _second_solution(ode, alpha_minus, order, FIT_OUTER)
    B = fit.B
    if seed is not None:
        # value-match at the handoff so the log-free patch stays continuous
        t0 = profile.grid[0]
        B = (profile.value(t0) - fit.A * large.value(t0)) / small.value(t0)
    return EndpointPatch([(fit.A, large), (B, small)])


def _below_spectrum(n, mu, Lambda):
    alpha_plus, _ = exponents.alphas(mu)
    first = exponents.lambda_of(n, alpha_plus)
    return Lambda < first - COLLISION_GAP * max(1.0, abs(first))


def _check_collision(n, mu, m, Lambda, tol):
    alpha_plus, _ = exponents.alphas(mu)
    first = exponents.lambda_of(n, alpha_plus)
    gap = COLLISION_GAP * max(1.0, abs(Lambda))
    if m == 0 and abs(Lambda - first) <= gap:
        raise EigenvalueCollision(Lambda, first, 1, m)
    if _below_spectrum(n, mu, Lambda):
        return

    import hardy.spectra as spectra

    s = 1
    while True:
        result = spectra.eigenvalue(n, mu, s, m, tol)
        if abs(result.Lambda_sm - Lambda) <= gap:
            raise EigenvalueCollision(Lambda, result.Lambda_sm, s, m)
        if result.Lambda_sm > Lambda:
            return
        s += 1


def sampled_profile(ode, propagation, grid, patch_at_0, patch_at_1,
                    normalization):
    k, dk = propagation(grid)
    ddk = ode.second_derivative(grid, k, dk)
    return AngularProfile(grid, k, dk, ddk, patch_at_0, patch_at_1,
                          normalization, ode)


def solve_k_gamma(n, mu, m, gamma, tol=DEFAULT_TOL, delta0=DEFAULT_DELTA,
                  delta1=DEFAULT_DELTA, order=DEFAULT_ORDER):
    Lambda = exponents.lambda_of(n, gamma)
    indices = exponents.angular_indices(n, mu, m, Lambda)
    if n == 2 and m != 0:
        raise exponents.ParameterError("azimuthal index m", m,
                                       "0 when n=2")
    _check_collision(n, mu, m, Lambda, tol)

    ode = LinearAngularODE(n, mu, indices.nu_m, Lambda)
    regular = frobenius_expansion(ode, 1, indices.kappa_regular, order)
    start = 1 - delta1
    state = (regular.value(start), regular.derivative(start))
    propagation = integrate_interior(ode, start, delta0, state, tol)

    debug("k_gamma n=%d mu=%g m=%d gamma=%g: %d steps" %
          (n, mu, m, gamma, propagation.steps), LogCategory.SOLVER)

    normalization = "k(1)=1" if indices.kappa_regular == 0 else \
        "unit leading coefficient of (1-t)^%.17g at t=1" % \
        indices.kappa_regular
    grid = mesh.profile_grid(delta0, delta1)
    patch_at_1 = EndpointPatch([(1.0, regular)])
    draft = sampled_profile(ode, propagation, grid, None, patch_at_1,
                            normalization)

    try:
        fit = classify_origin_behavior(draft, order, tol)
    except IllConditionedFit as e:
        warning(str(e), LogCategory.SOLVER)
        fit = e.fit

    return sampled_profile(ode, propagation, grid,
                           _origin_patch(draft, fit, order), patch_at_1,
                           normalization)
