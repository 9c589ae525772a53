# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

#
# Checks that do not trust the solvers: Cartesian finite-difference
# residuals, the Keller-Osserman supersolution and bound, a
# Phragmén-Lindelöf hypothesis/conclusion harness and the scaling map
# u_a(x) = a^(2/(p-1)) u(ax).
#
# The Phragmén-Lindelöf harness samples limits on finite grids. It can
# corroborate the lemma on examples; it proves nothing.
#

import collections
import enum

import numpy as np

import hardy.exponents as exponents
from hardy.logging import LogCategory, debug

STENCIL_FRACTION = 1e-3
RICHARDSON_FRACTION = 1e-2

KO_GRID = 100
KO_EPSILON_FRACTION = 1e-3
KO_SEARCH_LIMIT = 60
KO_SPOT_POINTS = (0.3, 0.5, 0.7)
KO_BOUND_RADII = 100
KO_BOUND_ANGLES = 100
KO_BOUND_T_MIN = 1e-6
KO_TREND_ANGLES = (1e-6, 1e-8, 1e-10)
KO_TREND_RADII = (0.25, 0.5, 0.75)

DEFAULT_X1_SEQUENCE = (1e-2, 1e-3, 1e-4)
ZERO_FRACTION = 1e-3
PL_RADII = 5


class Error(Exception):
    def __init__(self, message):
        Exception.__init__(self, message)


class StencilOutOfDomain(Error):
    def __init__(self, x, h):
        Error.__init__(self, "stencil of spacing %g around a point with "
                       "x₁=%g leaves the half-space" % (h, x[0]))
        self.x = x
        self.h = h


class SearchExhausted(Error):
    def __init__(self, what, limit):
        Error.__init__(self, "%s not found after %d doublings" %
                       (what, limit))


class FieldSampler:
    """A function on the half-space with the exponents it claims."""

    def __init__(self, function, n, mu, p=None, radial_exponent=None,
                 boundary_exponent=None, nonlinear=False, name="u"):
        self.function = function
        self.n = n
        self.mu = mu
        self.p = p
        self.radial_exponent = radial_exponent
        self.boundary_exponent = boundary_exponent
        self.nonlinear = nonlinear
        self.name = name

    def __call__(self, x):
        return self.function(np.asarray(x, dtype=float))

    def scaled(self, a):
        """u_a(x) = a^(2/(p-1)) u(ax)."""
        factor = a ** (2 / (self.p - 1))
        function = self.function
        return FieldSampler(lambda x: factor * function(a * np.asarray(x)),
                            self.n, self.mu, self.p, self.radial_exponent,
                            self.boundary_exponent, self.nonlinear,
                            "%s_a" % self.name)


def closed_form(n, mu, boundary_exponent, radial_exponent, scale=1.0,
                p=None, nonlinear=False, name=None):
    """scale·x₁^b |x|^(γ-b), homogeneous of degree γ."""
    b = boundary_exponent
    gamma = radial_exponent

    def function(x):
        r = np.linalg.norm(x, axis=-1)
        return scale * x[..., 0] ** b * r ** (gamma - b)

    if name is None:
        name = "x1^%g |x|^%g" % (b, gamma - b)
    return FieldSampler(function, n, mu, p, gamma, b, nonlinear, name)


def strong_singular_solution(n, mu, p):
    """U* = C_{p,μ} x₁^(-2/(p-1)), or None when C_{p,μ} does not exist."""
    constant = exponents.critical_constant(exponents.make_params(n, mu, p))
    if constant is None:
        return None
    strong = exponents.strong_exponent(p)
    return closed_form(n, mu, strong, strong, constant, p, True, "U*")


def point(n, x1, rest=0.0):
    x = np.zeros(n)
    x[0] = x1
    if n > 1:
        x[1] = rest
    return x


def pde_residual(u, x, h=None, nonlinearity=None):
    """(-Δ_h u - μu/x₁² [+ uᵖ])·x₁²/|u(x)| with a central-difference
    Laplacian."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if nonlinearity is None:
        nonlinearity = u.nonlinear
    if h is None:
        h = STENCIL_FRACTION * min(x[0], 1.0)
    if x[0] - n * h <= 0:
        raise StencilOutOfDomain(x, h)

    offsets = h * np.eye(n)
    stencil = np.concatenate([x[None, :], x + offsets, x - offsets])
    values = u(stencil)
    center = values[0]
    laplacian = (np.sum(values[1:]) - 2 * n * center) / (h * h)
    residual = -laplacian - u.mu / x[0] ** 2 * center
    if nonlinearity:
        residual += np.abs(center) ** u.p
    return float(residual * x[0] ** 2 / abs(center))


def richardson_ratio(u, x, h=None, nonlinearity=None):
    """Residual at spacing h over residual at h/2; about 4 for exact
    solutions."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = RICHARDSON_FRACTION * min(x[0], 1.0)
    return pde_residual(u, x, h, nonlinearity) / \
        pde_residual(u, x, h / 2, nonlinearity)


def random_points(n, count, rng, x1_range=(0.1, 2.0), spread=2.0):
    x = rng.uniform(-spread, spread, size=(count, n))
    x[:, 0] = rng.uniform(x1_range[0], x1_range[1], size=count)
    return x


def extrapolated_residual(u, x, h=None, nonlinearity=None):
    """Residual with the O(h²) truncation term removed by one Richardson
    step."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = STENCIL_FRACTION * min(x[0], 1.0)
    coarse = pde_residual(u, x, h, nonlinearity)
    fine = pde_residual(u, x, h / 2, nonlinearity)
    return (4 * fine - coarse) / 3


def max_residual(u, points, nonlinearity=None):
    return max(abs(extrapolated_residual(u, x, nonlinearity=nonlinearity))
               for x in points)


def _ko_constants(n, p):
    A = 2 * (p + 1) / (p - 1) ** 2
    B = 2 * (n - 1) / (p - 1)
    C = 2 * (2 / (p - 1)) ** 2
    return A, B, C


def _ko_grid(R, epsilon, count):
    s = np.linspace(0, 1, count)
    x1 = epsilon + (R - epsilon) * s[:, None]
    r = x1 + (R - x1) * s[None, :]
    return np.broadcast_arrays(x1, r)


def ko_bracket(n, mu, p, R, epsilon, c, x1, r):
    """The bracket whose sign decides whether
    c(x₁-ε)^(-2/(p-1))(R-r)^(-2/(p-1)) is a supersolution."""
    A, B, C = _ko_constants(n, p)
    d = x1 - epsilon
    e = R - r
    return d * d * (A + B * e / r) - C * d * e * x1 / r + A * e * e + \
        mu / (x1 * x1) * d * d * e * e - c ** (p - 1)


def ko_supersolution(n, mu, p, R, epsilon, c):
    k = -2 / (p - 1)

    def function(x):
        r = np.linalg.norm(x, axis=-1)
        return c * (x[..., 0] - epsilon) ** k * (R - r) ** k

    return FieldSampler(function, n, mu, p, nonlinear=True, name="U_KO")


def _spot_check(n, mu, p, R, epsilon, c):
    supersolution = ko_supersolution(n, mu, p, R, epsilon, c)
    for s in KO_SPOT_POINTS:
        for v in KO_SPOT_POINTS:
            x1 = epsilon + (R - epsilon) * s
            r = x1 + (R - x1) * v
            x = point(n, x1, np.sqrt(r * r - x1 * x1))
            h = STENCIL_FRACTION * min(x1 - epsilon, R - r, 1.0)
            if pde_residual(supersolution, x, h) < 0:
                return False
    return True


def ko_supersolution_constant(n, mu, p, R, epsilon, points=KO_GRID):
    """Smallest power of two c for which the bracket is ≤ 0 on a
    points×points grid of ε ≤ x₁ ≤ r ≤ R."""
    exponents.make_params(n, mu, p)
    if not 0 < epsilon < R:
        raise exponents.ParameterError("epsilon", epsilon, "in (0, R)")
    x1, r = _ko_grid(R, epsilon, points)
    c = 1.0
    for _ in range(KO_SEARCH_LIMIT):
        if np.all(ko_bracket(n, mu, p, R, epsilon, c, x1, r) <= 0) and \
           _spot_check(n, mu, p, R, epsilon, c):
            debug("KO supersolution constant for n=%d mu=%g p=%g R=%g: %g" %
                  (n, mu, p, R, c), LogCategory.VERIFY)
            return c
        c *= 2
    raise SearchExhausted("Keller-Osserman constant", KO_SEARCH_LIMIT)


def ko_bound(n, mu, p, R):
    """The constant C of u ≤ C x₁^(-2/(p-1)) on the half ball of radius
    R/2."""
    c = ko_supersolution_constant(n, mu, p, R, KO_EPSILON_FRACTION * R)
    return c * (R / 2) ** exponents.strong_exponent(p)


BoundReport = collections.namedtuple(
    'BoundReport', ['constant_found', 'bound', 'grid_spec', 'worst_point',
                    'boundary_trend', 'passed'])


def _half_ball(n, radius, radii, angles, t_min):
    r = np.geomspace(radius * 1e-3, radius * (1 - 1e-9), radii)
    t = np.geomspace(t_min, 1.0, angles)
    sin = np.sqrt(1 - t * t)
    x = np.zeros((radii, angles, n))
    x[..., 0] = r[:, None] * t[None, :]
    if n > 1:
        x[..., 1] = r[:, None] * sin[None, :]
    return x.reshape(-1, n)


def _boundary_trend(u, n, p, radius, bound):
    """Limit of u·x₁^(2/(p-1)) as x₁/|x| → 0 at fixed |x|; a grid of any
    resolution misses a product that only grows in that limit."""
    t = np.asarray(KO_TREND_ANGLES)
    x = np.array([point(n, radius * s, radius * np.sqrt(1 - s * s))
                  for s in t])
    limit = growth_limit(u(x) * x[:, 0] ** (2 / (p - 1)))
    violated = limit.trend == Trend.UNBOUNDED or \
        (limit.trend == Trend.BOUNDED and limit.estimate > bound)
    return limit, violated


def ko_bound_check(u, n, mu, p, R, bound=None, radii=KO_BOUND_RADII,
                   angles=KO_BOUND_ANGLES, t_min=KO_BOUND_T_MIN):
    if bound is None:
        bound = ko_bound(n, mu, p, R)
    x = _half_ball(n, R / 2, radii, angles, t_min)
    product = u(x) * x[:, 0] ** (2 / (p - 1))
    worst = int(np.nanargmax(np.where(np.isfinite(product), product,
                                      np.inf)))
    found = float(product[worst])
    passed = bool(np.all(np.isfinite(product)) and found <= bound)

    trend = Trend.TO_ZERO
    for fraction in KO_TREND_RADII:
        limit, violated = _boundary_trend(u, n, p, fraction * R / 2, bound)
        if violated:
            trend = limit.trend
            passed = False
            if limit.trend == Trend.UNBOUNDED:
                found = np.inf
            else:
                found = max(found, float(limit.estimate))
            break
        if limit.trend != Trend.TO_ZERO:
            trend = limit.trend

    grid_spec = "%d radii in [%g, %g) x %d values of x1/|x| in [%g, 1]; " \
        "x1/|x| -> 0 along %s at |x|/R in %s" % \
        (radii, R / 2 * 1e-3, R / 2, angles, t_min,
         "/".join("%g" % s for s in KO_TREND_ANGLES),
         "/".join("%g" % (f / 2) for f in KO_TREND_RADII))
    debug("KO bound check for %s: sup %g against %g, boundary trend %s" %
          (u.name, found, bound, trend.value), LogCategory.VERIFY)
    return BoundReport(constant_found=found, bound=float(bound),
                       grid_spec=grid_spec, worst_point=x[worst].tolist(),
                       boundary_trend=trend, passed=passed)


NonexistenceSweep = collections.namedtuple(
    'NonexistenceSweep', ['amplitudes', 'reports', 'all_violate'])


def ko_nonexistence_sweep(n, mu, p, amplitudes, R=1.0):
    """Candidates A·x₁^α₋|x|^(-2/(p-1)-α₋) with the minus-branch shape
    checked against the Keller-Osserman bound."""
    _, alpha_minus = exponents.alphas(mu)
    bound = ko_bound(n, mu, p, R)
    reports = []
    for amplitude in amplitudes:
        candidate = closed_form(n, mu, alpha_minus,
                                exponents.strong_exponent(p), amplitude, p,
                                True, "minus candidate A=%g" % amplitude)
        reports.append(ko_bound_check(candidate, n, mu, p, R, bound))
    return NonexistenceSweep(amplitudes=list(amplitudes), reports=reports,
                             all_violate=not any(r.passed for r in reports))


class Trend(enum.Enum):
    BOUNDED = 'bounded'
    UNBOUNDED = 'unbounded'
    TO_ZERO = 'to_zero'
    INCONCLUSIVE = 'inconclusive'


Limit = collections.namedtuple('Limit', ['trend', 'estimate'])


def growth_limit(values):
    """Classify the limit of a three-term sequence by geometric
    extrapolation."""
    q1, q2, q3 = (float(value) for value in values)
    if not np.all(np.isfinite([q1, q2, q3])):
        return Limit(Trend.UNBOUNDED, np.inf)
    d1 = q2 - q1
    d2 = q3 - q2
    magnitude = max(abs(q1), abs(q2), abs(q3))
    if magnitude == 0:
        return Limit(Trend.TO_ZERO, 0.0)
    still = 1e-12 * magnitude
    if abs(d1) <= still and abs(d2) <= still:
        return Limit(Trend.BOUNDED, q3)
    if abs(d1) <= still or (d1 > 0) != (d2 > 0):
        return Limit(Trend.INCONCLUSIVE, q3)
    rho = d2 / d1
    if rho >= 1:
        return Limit(Trend.UNBOUNDED, np.copysign(np.inf, d2))
    estimate = q3 + d2 * rho / (1 - rho)
    shrinking = abs(q3) < abs(q2) < abs(q1)
    # an extrapolation that overshoots zero means at least geometric decay
    if abs(estimate) <= ZERO_FRACTION * magnitude or \
       (shrinking and estimate * q3 <= 0):
        return Limit(Trend.TO_ZERO, 0.0)
    return Limit(Trend.BOUNDED, estimate)


PLVerdict = collections.namedtuple(
    'PLVerdict', ['hypothesis_a', 'hypothesis_b', 'hypotheses_hold',
                  'conclusion_holds', 'inconclusive'])


def phragmen_lindelof_check(h, R=1.0, rho=0.5, grid=DEFAULT_X1_SEQUENCE):
    n = h.n
    alpha_plus, alpha_minus = exponents.alphas(h.mu)
    k = n - 2 + 2 * alpha_plus
    x1 = np.asarray(grid, dtype=float)
    inconclusive = []

    def fixed_radius(r):
        return np.array([point(n, s, np.sqrt(r * r - s * s)) for s in x1])

    def ray():
        # x₁/|x| = 1/2 while |x| → 0
        return np.array([point(n, s, np.sqrt(3) * s) for s in x1])

    def small(x):
        return x[:, 0] ** alpha_plus

    def comparison(x):
        r = np.linalg.norm(x, axis=-1)
        return x[:, 0] ** alpha_minus + x[:, 0] ** alpha_plus * r ** -k

    def examine(label, x, denominator, accepted):
        limit = growth_limit(h(x) / denominator(x))
        if limit.trend == Trend.INCONCLUSIVE:
            inconclusive.append(label)
            return False
        return limit.trend in accepted

    bounded = (Trend.BOUNDED, Trend.TO_ZERO)
    outer = np.linspace(rho, R, PL_RADII + 2)[1:-1]
    inner = np.linspace(0, R, PL_RADII + 2)[1:-1]

    hypothesis_a = all([examine("(a) |x|=%g" % r, fixed_radius(r), small,
                                bounded) for r in outer])
    hypothesis_b = all([examine("(b) |x|=%g" % r, fixed_radius(r),
                                comparison, (Trend.TO_ZERO,))
                        for r in inner] +
                       [examine("(b) ray", ray(), comparison,
                                (Trend.TO_ZERO,))])
    conclusion = all([examine("conclusion |x|=%g" % r, fixed_radius(r),
                              small, bounded) for r in inner] +
                     [examine("conclusion ray", ray(), small, bounded)])

    debug("Phragmén-Lindelöf harness for %s: (a)=%s (b)=%s conclusion=%s" %
          (h.name, hypothesis_a, hypothesis_b, conclusion),
          LogCategory.VERIFY)
    return PLVerdict(hypothesis_a=hypothesis_a, hypothesis_b=hypothesis_b,
                     hypotheses_hold=hypothesis_a and hypothesis_b,
                     conclusion_holds=conclusion, inconclusive=inconclusive)


def scaling_check(u, p, a, points, nonlinearity=None):
    """Largest difference between the scaled residual of u_a at x and
    that of u at ax; zero up to rounding for any u."""
    if a <= 0:
        raise exponents.ParameterError("scale a", a, "> 0")
    if u.p is None:
        u = FieldSampler(u.function, u.n, u.mu, p, u.radial_exponent,
                         u.boundary_exponent, u.nonlinear, u.name)
    scaled = u.scaled(a)
    drift = 0.0
    for x in np.asarray(points, dtype=float):
        h = STENCIL_FRACTION * x[0]
        left = pde_residual(scaled, x, h, nonlinearity)
        right = pde_residual(u, a * x, a * h, nonlinearity)
        drift = max(drift, abs(left - right))
    return drift
