# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

#
# Separable solutions u = r^(-2/(p-1)) v(cos θ₁) of the semilinear
# problem. The angular factor solves
#
#   (1-t²)v'' - (n-1)t v' + (μ/t² + Λ(-2/(p-1)))v = vᵖ,   0 < t < 1,
#
# and is found between a sub- and a supersolution by monotone iteration.
#

import collections
import enum
import heapq
import math

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.special

import hardy.angular_ode as angular_ode
import hardy.exponents as exponents
import hardy.mesh as mesh
import hardy.verify as verify
from hardy.exponents import Branch
from hardy.logging import LogCategory, debug, warning

DEFAULT_TOL = 1e-8
DEFAULT_STARTS = 5
SOLVE_NODES = 8000

SEARCH_LIMIT = 60
DEFECT_SLACK = 1e-12
SUPER_KAPPA = 0.5

SHIFT_MARGIN = 1.25
MAX_ITERATIONS = 20000
MONOTONICITY_SLACK = 1e-10
NEWTON_ITERATIONS = 100
NEWTON_HALVINGS = 30

QUAD_LIMIT = 500
QUAD_RELATIVE = 1e-12
QUAD_SPLIT = 0.5

ORIGIN_TERMS = 300
ORIGIN_EXPONENT_LIMIT = 16.0
ORIGIN_RADIUS_CAP = 0.05
ORIGIN_RADIUS_FLOOR = 1e-10
SERIES_EPSILON = 1e-14
EXPONENT_KEY = 1e9
RESONANCE_SLACK = 1e-12

AXIS_ORDER = 16
AXIS_DELTA = 1e-2

MATCH_POINT = 0.5
BLEND_WIDTH = 0.1
SHOOT_TOL = 1e-13
MATCH_TOL = 1e-12
SHOOT_ITERATIONS = 40
DIFFERENCE_STEP = 1e-7
PROFILE_REFINEMENTS = 2
CONTAINMENT_SLACK = 1e-8


class Error(Exception):
    def __init__(self, message):
        Exception.__init__(self, message)


class NoBracket(Error):
    def __init__(self, branch, reason):
        Error.__init__(self, "no sub/supersolution pair for the %s branch: "
                       "%s" % (branch.value, reason))
        self.branch = branch


class SearchExhausted(Error):
    def __init__(self, constant, limit):
        Error.__init__(self, "search for bracket constant %s gave up after "
                       "%d steps" % (constant, limit))
        self.constant = constant


class MonotonicityViolation(Error):
    def __init__(self, iteration, excess):
        Error.__init__(self, "iterate %d increased by %g; discretization "
                       "too coarse" % (iteration, excess))
        self.iteration = iteration
        self.excess = excess


class ContainmentViolation(Error):
    def __init__(self, iteration, side, t):
        Error.__init__(self, "iterate %d left the bracket (%s) at t=%.17g" %
                       (iteration, side, t))
        self.iteration = iteration
        self.side = side
        self.t = t


class IterationLimit(Error):
    def __init__(self, method, iterations, change, residual):
        Error.__init__(self, "%s did not converge in %d iterations (last "
                       "change %g, residual %g)" %
                       (method, iterations, change, residual))
        self.iterations = iterations


class DivergentIntegral(Error):
    def __init__(self, exponent):
        Error.__init__(self, "integrand behaves like t^%.17g at t=0 and is "
                       "not integrable" % exponent)
        self.exponent = exponent


class NonUniqueLimit(Error):
    def __init__(self, report):
        Error.__init__(self, "multi-start limits differ by %g (relative) "
                       "which exceeds %g" % (report.max_deviation,
                                             report.tol))
        self.report = report


class Closure(enum.Enum):
    FLUX_FREE = 'flux_free'
    PINNED = 'pinned'


def closure(name):
    if isinstance(name, Closure):
        return name
    return Closure(name)


class PowerSum:
    """Σ c_j t^(b_j), optionally cut off to zero from t = cutoff on."""

    def __init__(self, terms, cutoff=math.inf):
        self.terms = sorted(((float(c), float(b)) for c, b in terms
                             if c != 0), key=lambda term: term[1])
        self.exponent = self.terms[0][1]
        self.cutoff = cutoff

    def _masked(self, t, values):
        return np.where(t < self.cutoff, values, 0.0)

    def ratio(self, t):
        """The sum divided by its leading power t^exponent."""
        t = np.asarray(t, dtype=float)
        a = self.exponent
        total = sum(c * t ** (b - a) for c, b in self.terms)
        return self._masked(t, total)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide='ignore'):
            return t ** self.exponent * self.ratio(t)

    def __call__(self, t):
        return self.value(t)

    def _linear_terms(self, t, n, mu, p):
        a = self.exponent
        Lambda_s = exponents.lambda_of(n, exponents.strong_exponent(p))
        terms = []
        for c, b in self.terms:
            # b(b-1)+μ, exact zero at the indicial root
            terms.append(c * (b - a) * (b + a - 1) * t ** (b - a))
            terms.append(c * (Lambda_s - exponents.lambda_of(n, b)) *
                         t ** (b - a + 2))
        return terms

    def linear_part(self, t, n, mu, p):
        t = np.asarray(t, dtype=float)
        return self._masked(t, sum(self._linear_terms(t, n, mu, p)))

    def scaled_defect(self, t, n, mu, p):
        """(𝓛f - fᵖ)·t^(2-exponent) and the size of its terms."""
        t = np.asarray(t, dtype=float)
        a = self.exponent
        terms = self._linear_terms(t, n, mu, p)
        g = np.maximum(self.ratio(t), 0.0)
        terms.append(-t ** (a * (p - 1) + 2) * g ** p)
        defect = self._masked(t, sum(terms))
        scale = self._masked(t, sum(np.abs(term) for term in terms))
        return defect, scale


class Bracket:
    def __init__(self, params, branch, row, tau, c, kappa_sub, kappa_super,
                 epsilon):
        self.params = params
        self.branch = branch
        self.row = row
        self.tau = tau
        self.c = c
        self.kappa_sub = kappa_sub
        self.kappa_super = kappa_super
        self.epsilon = epsilon

        n, mu, p = params
        table = exponents.derive_exponents(params)
        self.alpha = table.alpha(branch)
        self.lambda_zero = table.lambda_zero(branch)
        self.lambda_epsilon = exponents.lambda_of(
            n, exponents.strong_exponent(p)) - \
            exponents.lambda_of(n, self.alpha + epsilon)

        a = self.alpha
        if branch == Branch.PLUS:
            self.sub = PowerSum([(tau, a)])
            self.super = PowerSum([(c, a), (-c * kappa_super, a + epsilon)])
        else:
            self.sub = PowerSum([(tau, a), (-tau * kappa_sub, a + epsilon)],
                                cutoff=kappa_sub ** (-1 / epsilon))
            self.super = PowerSum([(c, a), (c * kappa_super, a + epsilon)])

    def __str__(self):
        return "row %d: tau=%g c=%g kappa_sub=%g kappa_super=%g " \
            "epsilon=%g" % (self.row, self.tau, self.c, self.kappa_sub,
                            self.kappa_super, self.epsilon)


def _is_subsolution(power_sum, params, t):
    defect, scale = power_sum.scaled_defect(t, *params)
    return bool(np.all(defect >= -DEFECT_SLACK * scale))


def _is_supersolution(power_sum, params, t):
    defect, scale = power_sum.scaled_defect(t, *params)
    return bool(np.all(defect <= DEFECT_SLACK * scale))


def _search(check, start, factor, constant):
    value = start
    for _ in range(SEARCH_LIMIT):
        if check(value):
            return value
        value *= factor
    raise SearchExhausted(constant, SEARCH_LIMIT)


def _epsilon(table, branch):
    a = table.alpha(branch)
    p = table.p
    if branch == Branch.PLUS:
        # ε < 2 and α₊+ε below the reflected strong exponent
        upper = min(2.0, exponents.reflect(table.n,
                                           exponents.strong_exponent(p)) - a)
    else:
        # 2α₋+ε-1 < 0 and α₋(p-1)+2-ε > 0
        upper = min(1 - 2 * a, a * (p - 1) + 2)
    return upper / 2


def _check_branch(params, branch):
    table = exponents.derive_exponents(params)
    regime = exponents.classify_regime(params)
    if branch == Branch.PLUS and \
       regime.plus_branch != exponents.PlusBranch.EXISTS_UNIQUE:
        raise NoBracket(branch, "p=%.17g is not below p_c=%.17g "
                        "(Λ₀=%g)" % (params.p, table.p_c,
                                     table.lambda_zero(branch)))
    if branch == Branch.MINUS and \
       regime.minus_branch != exponents.MinusBranch.EXISTS:
        raise NoBracket(branch, "p=%.17g is not below p_KO=%.17g" %
                        (params.p, table.p_ko))
    return table


def build_bracket(params, branch_name,
                  points=mesh.DEFAULT_VERIFICATION_POINTS):
    exponents.require_p(params)
    branch = exponents.branch(branch_name)
    table = _check_branch(params, branch)
    row = exponents.bracket_row(params, branch)
    n, mu, p = params
    a = table.alpha(branch)
    epsilon = _epsilon(table, branch)
    lambda_zero = table.lambda_zero(branch)

    kappa_sub = 0.0
    kappa_super = SUPER_KAPPA
    if branch == Branch.MINUS:
        if row == 2:
            kappa_super = 0.0
        else:
            slope = abs(epsilon * (2 * a + epsilon - 1))
            kappa_super = 2 * max(1.0, lambda_zero / slope)

    c = 1.0
    tau = 1.0
    # search on the verification grid, then certify at double resolution
    for grid in (mesh.verification_grid(points),
                 mesh.verification_grid(2 * points)):
        if branch == Branch.MINUS:
            def sub_positive(kappa):
                power_sum = PowerSum([(1.0, a), (-kappa, a + epsilon)],
                                     cutoff=kappa ** (-1 / epsilon))
                t = grid[grid < power_sum.cutoff]
                return bool(np.all(power_sum.linear_part(t, n, mu, p) > 0))
            kappa_sub = _search(sub_positive, max(kappa_sub, 2.0), 2.0,
                                "kappa")

        def super_ok(value):
            bracket = Bracket(params, branch, row, tau, value, kappa_sub,
                              kappa_super, epsilon)
            if branch == Branch.MINUS and lambda_zero > 0 and \
               value ** (p - 1) < lambda_zero:
                return False
            return _is_supersolution(bracket.super, params, grid)
        c = _search(super_ok, c, 2.0, "c")

        def sub_ok(value):
            bracket = Bracket(params, branch, row, value, c, kappa_sub,
                              kappa_super, epsilon)
            below = bracket.sub.ratio(grid) <= bracket.super.ratio(grid)
            return bool(np.all(below)) and \
                _is_subsolution(bracket.sub, params, grid)
        tau = _search(sub_ok, tau, 0.5, "tau")

    bracket = Bracket(params, branch, row, tau, c, kappa_sub, kappa_super,
                      epsilon)
    debug("bracket for n=%d mu=%g p=%g %s: %s" %
          (n, mu, p, branch.value, bracket), LogCategory.SOLVER)
    return bracket


def endpoint_closure(table, branch):
    if branch == Branch.PLUS:
        return Closure.FLUX_FREE
    a = table.alpha_minus
    if table.lambda_zero(branch) > 0 and a <= 0 and a * (table.p + 1) > -1:
        return Closure.FLUX_FREE
    return Closure.PINNED


def _tridiagonal_product(diagonal, upper, w):
    product = diagonal * w
    product[:-1] += upper * w[1:]
    product[1:] += upper * w[:-1]
    return product


class Discretization:
    """Vertex-centred finite volumes for w = v/t^a:

        -(σ̃w')' = ρ(Λ₀w - t^(a(p-1))wᵖ),

    σ̃ = t^(2a)(1-t²)^((n-1)/2), ρ = t^(2a)(1-t²)^((n-3)/2)."""

    def __init__(self, params, branch, volume, closure_kind, level):
        n, mu, p = params
        table = exponents.derive_exponents(params)
        a = table.alpha(branch)
        self.params = params
        self.branch = branch
        self.volume = volume
        self.closure = closure_kind
        self.level = level
        self.exponent = a
        self.lambda_zero = table.lambda_zero(branch)

        def flux(t):
            return t ** (2 * a) * (1 - t * t) ** ((n - 1) / 2)

        def smooth(t):
            return (1 + t) ** ((n - 3) / 2)

        self.diagonal, self.upper = volume.stiffness(flux)
        self.mass = volume.weights(2 * a, (n - 3) / 2, smooth)
        self.source = volume.weights(a * (p + 1), (n - 3) / 2, smooth)
        self.first = 1 if closure_kind == Closure.PINNED else 0

    @property
    def nodes(self):
        return self.volume.nodes

    def _terms(self, w):
        p = self.params.p
        positive = np.maximum(w, 0.0)
        stiffness = _tridiagonal_product(self.diagonal, self.upper, w)
        magnitude = _tridiagonal_product(np.abs(self.diagonal),
                                         np.abs(self.upper), np.abs(w))
        linear = self.lambda_zero * self.mass * w
        nonlinear = self.source * positive ** p
        first = self.first
        return (stiffness[first:] - linear[first:] + nonlinear[first:],
                magnitude[first:] + np.abs(linear[first:]) +
                nonlinear[first:])

    def residual(self, w):
        return self._terms(w)[0]

    def backward_error(self, w):
        """Largest componentwise relative residual of the discrete
        equations."""
        residual, scale = self._terms(w)
        scale = np.maximum(scale, np.finfo(float).tiny)
        return float(np.max(np.abs(residual) / scale))

    def _pin(self, w):
        w = np.array(w, dtype=float)
        if self.closure == Closure.PINNED:
            w[0] = self.level
        return w

    def iterate(self, start, tol, floor, ceiling):
        """Monotone iteration from a supersolution.

        The shift is node-wise, λ_i ≥ p·t^(a(p-1))w^(p-1), which keeps the
        right-hand side nondecreasing in w."""
        p = self.params.p
        first = self.first
        w = self._pin(start)
        mass = self.mass[first:]
        source = self.source[first:]
        q = source / mass * np.maximum(w[first:], 0.0) ** (p - 1)
        shift = np.maximum(SHIFT_MARGIN * p * q,
                           max(self.lambda_zero + 1, 0.0))

        banded = np.zeros((2, len(mass)))
        banded[0, 1:] = self.upper[first:]
        banded[1] = self.diagonal[first:] + \
            (shift - self.lambda_zero) * mass
        factor = scipy.linalg.cholesky_banded(banded)

        boundary = np.zeros(len(mass))
        if first == 1:
            boundary[0] = -self.upper[0] * self.level

        change = math.inf
        residual = math.inf
        for iteration in range(1, MAX_ITERATIONS + 1):
            positive = np.maximum(w[first:], 0.0)
            rhs = shift * mass * w[first:] - source * positive ** p + \
                boundary
            new = w.copy()
            new[first:] = scipy.linalg.cho_solve_banded((factor, False),
                                                        rhs)
            slack = MONOTONICITY_SLACK * np.max(np.abs(w))
            excess = np.max(new - w)
            if excess > slack:
                raise MonotonicityViolation(iteration, excess)
            low = np.flatnonzero(new < floor - slack)
            if len(low) > 0:
                raise ContainmentViolation(iteration, "below subsolution",
                                           self.nodes[low[0]])
            high = np.flatnonzero(new > ceiling + slack)
            if len(high) > 0:
                raise ContainmentViolation(iteration, "above supersolution",
                                           self.nodes[high[0]])
            change = float(np.max(np.abs(new - w)))
            w = new
            residual = self.backward_error(w)
            if change <= tol * np.max(np.abs(w)) and residual <= tol:
                debug("monotone iteration converged in %d steps "
                      "(residual %g)" % (iteration, residual),
                      LogCategory.SOLVER)
                return w, iteration, residual
        raise IterationLimit("monotone iteration", MAX_ITERATIONS, change,
                             residual)

    def newton(self, start, tol):
        """Damped Newton on the discrete equations; converges
        monotonically from above a solution."""
        p = self.params.p
        first = self.first
        w = self._pin(start)
        change = math.inf
        residual = math.inf
        for iteration in range(1, NEWTON_ITERATIONS + 1):
            jacobian = np.zeros((3, len(w) - first))
            jacobian[0, 1:] = self.upper[first:]
            jacobian[1] = self.diagonal[first:] - \
                self.lambda_zero * self.mass[first:] + \
                p * self.source[first:] * w[first:] ** (p - 1)
            jacobian[2, :-1] = self.upper[first:]
            step = scipy.linalg.solve_banded((1, 1), jacobian,
                                             -self.residual(w))
            damping = 1.0
            for _ in range(NEWTON_HALVINGS):
                if np.all(w[first:] + damping * step > 0):
                    break
                damping /= 2
            w = w.copy()
            w[first:] += damping * step
            change = float(damping * np.max(np.abs(step)))
            residual = self.backward_error(w)
            if change <= tol * np.max(np.abs(w)) and residual <= tol:
                return w, iteration, residual
        raise IterationLimit("Newton iteration", NEWTON_ITERATIONS, change,
                             residual)


class RatioODE(collections.namedtuple(
        'RatioODE', ['n', 'mu', 'p', 'exponent', 'lambda_zero'])):
    """The equation for w = v/t^a,

        (1-t²)w'' + (2a(1-t²)/t - (n-1)t)w' + Λ₀w = t^(a(p-1))wᵖ."""

    def strong_lambda(self):
        return exponents.lambda_of(self.n, exponents.strong_exponent(self.p))

    def second_derivative(self, t, w, dw):
        a = self.exponent
        drift = 2 * a * (1 - t * t) / t - (self.n - 1) * t
        source = t ** (a * (self.p - 1)) * np.maximum(w, 0.0) ** self.p
        return (source - drift * dw - self.lambda_zero * w) / (1 - t * t)

    def rhs(self, t, state):
        w, dw = state
        return [dw, self.second_derivative(t, w, dw)]

    def to_v(self, t, w, dw, ddw):
        """v = t^a w and its first two derivatives."""
        a = self.exponent
        power = t ** a
        return (power * w, power * (dw + a * w / t),
                power * (ddw + 2 * a * dw / t + a * (a - 1) * w / (t * t)))


def ratio_ode(params, branch_name):
    n, mu, p = params
    branch = exponents.branch(branch_name)
    table = exponents.derive_exponents(params)
    return RatioODE(n, mu, p, table.alpha(branch), table.lambda_zero(branch))


def _key(exponent):
    return int(round(exponent * EXPONENT_KEY))


def _lattice(generators, limit, count):
    """The smallest sums of nonnegative multiples of the generators."""
    heap = [0.0]
    seen = {0}
    powers = []
    while heap and len(powers) < count:
        e = heapq.heappop(heap)
        if e > limit:
            break
        powers.append(e)
        for generator in generators:
            key = _key(e + generator)
            if key not in seen:
                seen.add(key)
                heapq.heappush(heap, e + generator)
    return powers


class OriginSeries:
    """w(t) = Σ c_e t^e near t=0.

    The exponents are sums of 2 and a(p-1)+2, and of 1-2a when the
    coefficient of t^(1-2a) is free. At 1-2a the recurrence is singular;
    if its right-hand side does not vanish there the series ends at
    t^(1-2a) and the radius keeps the dropped t^(1-2a)·log t term below
    SERIES_EPSILON."""

    def __init__(self, ode, w_zero, free=0.0, pinned=False):
        a = ode.exponent
        self.ode = ode
        self.exponent = a
        self.w_zero = float(w_zero)
        self.free = float(free)
        self.pinned = pinned
        self.free_power = 1 - 2 * a
        generators = [2.0, a * (ode.p - 1) + 2]
        if pinned:
            generators.append(self.free_power)
        if min(generators) <= 0:
            raise Error("series exponents %s are not all positive" %
                        ", ".join("%g" % g for g in generators))
        powers = _lattice(generators, ORIGIN_EXPONENT_LIMIT, ORIGIN_TERMS)
        self.powers, self.coefficients, self.log_coefficient = \
            self._recurrence(powers)
        self.radius = self._radius()

    def _recurrence(self, powers):
        ode = self.ode
        a = self.exponent
        p = ode.p
        beta = a * (p - 1) + 2
        strong = ode.strong_lambda()
        index = {_key(e): i for i, e in enumerate(powers)}
        free_key = _key(self.free_power)
        c = np.zeros(len(powers))
        # coefficients of wᵖ
        P = np.zeros(len(powers))
        c[0] = self.w_zero
        P[0] = self.w_zero ** p
        for i in range(1, len(powers)):
            e = powers[i]
            linear = 0.0
            j = index.get(_key(e - 2))
            if j is not None:
                linear = (exponents.lambda_of(ode.n, a + e - 2) - strong) * \
                    c[j]
            source = 0.0
            j = index.get(_key(e - beta))
            if j is not None:
                source = P[j]
            rhs = linear + source
            if _key(e) == free_key:
                c[i] = self.free
                if abs(rhs) > RESONANCE_SLACK * (abs(linear) + abs(source)):
                    return (np.array(powers[:i + 1]), c[:i + 1],
                            rhs / self.free_power)
            else:
                c[i] = rhs / (e * (e + 2 * a - 1))
            total = 0.0
            for k in range(1, i + 1):
                j = index.get(_key(e - powers[k]))
                if j is not None:
                    total += (p * powers[k] - powers[j]) * c[k] * P[j]
            P[i] = total / (self.w_zero * e)
        return np.array(powers), c, 0.0

    def _radius(self):
        scale = abs(self.w_zero)
        if self.log_coefficient != 0:
            k = abs(self.log_coefficient)
            radius = (SERIES_EPSILON * scale / k) ** (1 / self.free_power)
            radius = (SERIES_EPSILON * scale /
                      (k * (1 + abs(math.log(radius))))) ** \
                (1 / self.free_power)
        else:
            radius = ORIGIN_RADIUS_CAP
            tail = max(self.powers[-1] - 2, 0.0)
            for e, c in zip(self.powers, self.coefficients):
                if e > tail and c != 0:
                    radius = min(radius,
                                 (SERIES_EPSILON * scale / abs(c)) ** (1 / e))
        return min(max(radius, ORIGIN_RADIUS_FLOOR), ORIGIN_RADIUS_CAP)

    def _sum(self, t, shift, weights):
        t = np.asarray(t, dtype=float)
        mask = weights != 0
        with np.errstate(divide='ignore', invalid='ignore'):
            terms = np.power.outer(t, self.powers[mask] + shift) * \
                weights[mask]
        return terms.sum(axis=-1)

    def ratio(self, t):
        return self._sum(t, 0, self.coefficients)

    def ratio_derivative(self, t):
        return self._sum(t, -1, self.coefficients * self.powers)

    def value(self, t):
        return self._sum(t, self.exponent, self.coefficients)

    def derivative(self, t):
        powers = self.exponent + self.powers
        return self._sum(t, self.exponent - 1, self.coefficients * powers)

    def second_derivative(self, t):
        powers = self.exponent + self.powers
        return self._sum(t, self.exponent - 2,
                         self.coefficients * powers * (powers - 1))

    def leading_ratio(self, exponent, tolerance=1e-12):
        """lim v(t)/t^exponent as t goes to 0."""
        if self.exponent < exponent - tolerance:
            return math.copysign(math.inf, self.w_zero)
        if abs(self.exponent - exponent) <= tolerance:
            return self.w_zero
        return 0.0


class AxisSeries:
    """w(t) = Σ b_k (1-t)^k near t=1, fixed by w(1)."""

    def __init__(self, ode, w_one, order=AXIS_ORDER):
        self.ode = ode
        self.exponent = ode.exponent
        self.w_one = float(w_one)
        self.coefficients = self._recurrence(order)

    def _recurrence(self, order):
        # t times the equation, in s = 1-t:
        #   s(2-s)(1-s)w'' + ((n-1)(1-s)² - 2as(2-s))w' + Λ₀(1-s)w
        #     = (1-s)^(a(p-1)+1) wᵖ
        n, p, a = self.ode.n, self.ode.p, self.exponent
        lambda_zero = self.ode.lambda_zero
        k = np.arange(order + 1)
        weight = scipy.special.binom(a * (p - 1) + 1, k) * (-1.0) ** k
        b = np.zeros(order + 1)
        P = np.zeros(order + 1)
        b[0] = self.w_one
        P[0] = self.w_one ** p
        for j in range(order):
            if j > 0:
                P[j] = sum(((p + 1) * i - j) * b[i] * P[j - i]
                           for i in range(1, j + 1)) / (j * b[0])
            total = (3 * j * (j - 1) + (2 * (n - 1) + 4 * a) * j -
                     lambda_zero) * b[j] + np.dot(weight[:j + 1], P[j::-1])
            if j > 0:
                total += (lambda_zero - (j - 1) * (j - 2) -
                          (n - 1 + 2 * a) * (j - 1)) * b[j - 1]
            b[j + 1] = total / ((j + 1) * (2 * j + n - 1))
        return b

    def _ratio_data(self, t):
        polynomial = np.polynomial.polynomial
        s = 1 - t
        b = self.coefficients
        return (polynomial.polyval(s, b),
                -polynomial.polyval(s, polynomial.polyder(b)),
                polynomial.polyval(s, polynomial.polyder(b, 2)))

    def ratio(self, t):
        return self._ratio_data(np.asarray(t, dtype=float))[0]

    def ratio_derivative(self, t):
        return self._ratio_data(np.asarray(t, dtype=float))[1]

    def _v(self, t, nu):
        t = np.asarray(t, dtype=float)
        return self.ode.to_v(t, *self._ratio_data(t))[nu]

    def value(self, t):
        return self._v(t, 0)

    def derivative(self, t):
        return self._v(t, 1)

    def second_derivative(self, t):
        return self._v(t, 2)


def _blend(t):
    """Weight of the axis branch across the overlap, and its slope."""
    x = np.clip((t - MATCH_POINT + BLEND_WIDTH) / (2 * BLEND_WIDTH), 0.0,
                1.0)
    weight = x ** 3 * (10 - 15 * x + 6 * x * x)
    slope = 30 * x * x * (1 - x) ** 2 / (2 * BLEND_WIDTH)
    return weight, slope


class Shooting:
    """Two-sided shooting for w. One branch starts from the origin series
    at its radius, the other from the axis series at 1-AXIS_DELTA; they
    overlap on MATCH_POINT ± BLEND_WIDTH and must agree at MATCH_POINT.

    The unknowns are w(1) and the free origin coefficient: w(0), or the
    coefficient of t^(1-2a) when w(0) is pinned."""

    def __init__(self, ode, closure_kind, level, tol=SHOOT_TOL):
        self.ode = ode
        self.closure = closure_kind
        self.level = level
        self.tol = tol
        self.evaluations = 0

    def origin(self, unknown):
        if self.closure == Closure.PINNED:
            return OriginSeries(self.ode, self.level, unknown, pinned=True)
        return OriginSeries(self.ode, unknown)

    def left(self, unknown):
        series = self.origin(unknown)
        start = series.radius
        state = (series.ratio(start), series.ratio_derivative(start))
        return series, angular_ode.integrate_interior(
            self.ode, start, MATCH_POINT + BLEND_WIDTH, state, self.tol)

    def right(self, w_one):
        series = AxisSeries(self.ode, w_one)
        start = 1 - AXIS_DELTA
        state = (series.ratio(start), series.ratio_derivative(start))
        return series, angular_ode.integrate_interior(
            self.ode, start, MATCH_POINT - BLEND_WIDTH, state, self.tol)

    def _state(self, side, unknown):
        self.evaluations += 1
        _, propagation = side(unknown)
        return propagation(MATCH_POINT)

    def _admissible(self, x):
        return x[1] > 0 and (self.closure == Closure.PINNED or x[0] > 0)

    @staticmethod
    def _mismatch(left, right):
        scale = max(abs(right[0]), np.finfo(float).tiny)
        return np.array([left[0] - right[0],
                         MATCH_POINT * (left[1] - right[1])]) / scale

    def solve(self, guess):
        """Damped Newton with a difference Jacobian; returns the
        unknowns and the number of steps."""
        x = np.array(guess, dtype=float)
        left = self._state(self.left, x[0])
        right = self._state(self.right, x[1])
        mismatch = self._mismatch(left, right)
        size = float(np.max(np.abs(mismatch)))
        change = math.inf
        for iteration in range(SHOOT_ITERATIONS + 1):
            if size <= MATCH_TOL:
                return x, iteration
            if iteration == SHOOT_ITERATIONS:
                break
            steps = DIFFERENCE_STEP * np.maximum(np.abs(x), abs(x[1]))
            jacobian = np.column_stack([
                self._mismatch(self._state(self.left, x[0] + steps[0]),
                               right) - mismatch,
                self._mismatch(left, self._state(self.right,
                                                 x[1] + steps[1])) -
                mismatch]) / steps
            step = np.linalg.solve(jacobian, -mismatch)
            damping = 1.0
            for _ in range(NEWTON_HALVINGS):
                trial = x + damping * step
                if self._admissible(trial):
                    trial_left = self._state(self.left, trial[0])
                    trial_right = self._state(self.right, trial[1])
                    trial_mismatch = self._mismatch(trial_left, trial_right)
                    if np.max(np.abs(trial_mismatch)) < size:
                        break
                damping /= 2
            else:
                raise IterationLimit("shooting", iteration + 1, change, size)
            change = float(np.max(np.abs(damping * step)))
            x, left, right = trial, trial_left, trial_right
            mismatch = trial_mismatch
            size = float(np.max(np.abs(mismatch)))
        raise IterationLimit("shooting", SHOOT_ITERATIONS, change, size)

    def sample(self, x, grid):
        """The profile of v at the grid, blending the branches across
        the overlap."""
        origin, left = self.left(x[0])
        axis, right = self.right(x[1])
        w = np.empty_like(grid)
        dw = np.empty_like(grid)
        below = grid < MATCH_POINT - BLEND_WIDTH
        above = grid > MATCH_POINT + BLEND_WIDTH
        band = ~(below | above)
        w[below], dw[below] = left(grid[below])
        w[above], dw[above] = right(grid[above])
        w_left, dw_left = left(grid[band])
        w_right, dw_right = right(grid[band])
        weight, slope = _blend(grid[band])
        w[band] = w_left + weight * (w_right - w_left)
        dw[band] = dw_left + weight * (dw_right - dw_left) + \
            slope * (w_right - w_left)
        ddw = self.ode.second_derivative(grid, w, dw)
        values, derivatives, second = self.ode.to_v(grid, w, dw, ddw)
        return RatioProfile(grid, values, derivatives, second, origin, axis)


class RatioProfile(angular_ode.AngularProfile):
    """v = t^a w sampled from a shooting solution, with the origin and
    axis series of w as endpoint patches."""

    def __init__(self, grid, values, derivatives, second_derivatives, origin,
                 axis):
        angular_ode.AngularProfile.__init__(
            self, grid, values, derivatives, second_derivatives, origin,
            axis, "v(t)/t^a at t=0")
        self.exponent = origin.exponent

    def ratio(self, t):
        """w = v/t^a on [0, 1]."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        result = np.empty_like(t)
        below = t < self.grid[0]
        above = t > self.grid[-1]
        inside = ~(below | above)
        if np.any(below):
            result[below] = self.expansion_at_0.ratio(t[below])
        if np.any(above):
            result[above] = self.expansion_at_1.ratio(t[above])
        if np.any(inside):
            result[inside] = self._interior(t[inside], 0) / \
                t[inside] ** self.exponent
        return result[0] if scalar else result


class NonlinearProfile:
    """A solved profile: v, and the finite-volume ratio w at the solver
    mesh it was polished from."""

    def __init__(self, params, branch, bracket, closure_kind, profile, nodes,
                 w, residual_sup, iterations=0, refined=False):
        self.params = params
        self.branch = branch
        self.bracket = bracket
        self.closure = closure_kind
        self.profile = profile
        self.nodes = np.asarray(nodes, dtype=float)
        self.w = np.asarray(w, dtype=float)
        self.residual_sup = residual_sup
        self.iterations = iterations
        self.refined = refined

    @property
    def exponent(self):
        return self.profile.exponent

    @property
    def v_limit(self):
        """lim v(t)/t^α± at t = 0."""
        return float(self.profile.expansion_at_0.w_zero)

    def ratio(self, t):
        return self.profile.ratio(t)

    def value(self, t):
        return self.profile.value(t)

    def envelope_constant(self):
        """Smallest c with v/c ≤ t^α± ≤ c·v on [0, 1]."""
        t = np.concatenate([[0.0], mesh.verification_grid(), [1.0]])
        w = self.ratio(t)
        return float(max(np.max(w), 1 / np.min(w)))

    def evaluate(self, x):
        return eval_solution(self, x)

    def sampler(self):
        return verify.FieldSampler(
            self.evaluate, self.params.n, self.params.mu, p=self.params.p,
            radial_exponent=exponents.strong_exponent(self.params.p),
            boundary_exponent=self.exponent, nonlinear=True,
            name="u_%s" % self.branch.value)


def _solve(discretization, bracket, start, tol, ceiling=None):
    nodes = discretization.nodes
    floor = bracket.sub.ratio(nodes)
    if ceiling is None:
        ceiling = bracket.super.ratio(nodes)
    return discretization.iterate(start, tol, floor, ceiling)


def _start(bracket, closure_kind, nodes):
    if bracket.branch == Branch.MINUS and closure_kind == Closure.FLUX_FREE:
        # c t^α₋ is itself a supersolution when c^(p-1) ≥ Λ₀⁻
        return np.full(len(nodes), bracket.c)
    return bracket.super.ratio(nodes)


def angular_residual(params, profile, t):
    n, mu, p = params
    t = np.asarray(t, dtype=float)
    v = profile.value(t)
    dv = profile.derivative(t)
    ddv = profile.second_derivative(t)
    Lambda_s = exponents.lambda_of(n, exponents.strong_exponent(p))
    terms = [(1 - t * t) * ddv, -(n - 1) * t * dv, mu / (t * t) * v,
             Lambda_s * v, -np.maximum(v, 0.0) ** p]
    scale = sum(np.abs(term) for term in terms)
    return np.abs(sum(terms)) / np.maximum(scale, np.finfo(float).tiny)


def polish(params, branch_name, closure_kind, level, w_zero, w_one,
           tol=DEFAULT_TOL):
    """Shoot from the finite-volume endpoint values and sample v until
    the ODE residual on the verification grid is at most tol."""
    branch = exponents.branch(branch_name)
    ode = ratio_ode(params, branch)
    shooting = Shooting(ode, closure_kind, level)
    guess = (0.0 if closure_kind == Closure.PINNED else w_zero, w_one)
    x, steps = shooting.solve(guess)

    radius = shooting.origin(x[0]).radius
    if radius <= ORIGIN_RADIUS_FLOOR:
        warning("origin series radius held at %g" % radius,
                LogCategory.SOLVER)
    t = mesh.verification_grid()
    for refinement in range(PROFILE_REFINEMENTS + 1):
        scale = 2 ** refinement
        grid = mesh.profile_grid(radius, AXIS_DELTA,
                                 ratio=1 + (mesh.DEFAULT_RATIO - 1) / scale,
                                 step=mesh.DEFAULT_STEP / scale)
        profile = shooting.sample(x, grid)
        residual = float(np.max(angular_residual(params, profile, t)))
        if residual <= tol:
            break
    else:
        warning("profile residual %g exceeds %g after %d refinements" %
                (residual, tol, PROFILE_REFINEMENTS), LogCategory.SOLVER)

    debug("shooting converged in %d steps (%d shots): origin %.12g, "
          "w(1)=%.12g, radius %g, residual %g" %
          (steps, shooting.evaluations, x[0], x[1], radius, residual),
          LogCategory.SOLVER)
    return profile, residual


def _check_containment(bracket, profile):
    t = mesh.verification_grid()
    w = profile.ratio(t)
    slack = CONTAINMENT_SLACK * np.max(np.abs(w))
    for side, outside in (("below subsolution", w < bracket.sub.ratio(t) -
                           slack),
                          ("above supersolution",
                           w > bracket.super.ratio(t) + slack)):
        if np.any(outside):
            warning("polished profile is %s at t=%.17g" %
                    (side, t[np.flatnonzero(outside)[0]]),
                    LogCategory.SOLVER)


def solve_profile(params, branch_name, tol=DEFAULT_TOL, nodes=SOLVE_NODES):
    exponents.require_p(params)
    branch = exponents.branch(branch_name)
    bracket = build_bracket(params, branch)
    table = exponents.derive_exponents(params)
    closure_kind = endpoint_closure(table, branch)
    if closure_kind == Closure.PINNED:
        warning("%s branch pinned at w(0)=%g; one member of a family of "
                "solutions" % (branch.value, bracket.c), LogCategory.SOLVER)

    volume = mesh.FiniteVolume(mesh.graded_nodes(nodes))
    refined = False
    while True:
        discretization = Discretization(params, branch, volume, closure_kind,
                                        bracket.c)
        start = _start(bracket, closure_kind, volume.nodes)
        try:
            w, iterations, _ = _solve(discretization, bracket, start, tol)
            break
        except MonotonicityViolation as e:
            if refined:
                raise
            warning("%s; refining the mesh once" % e, LogCategory.SOLVER)
            volume = volume.refined()
            refined = True

    profile, residual = polish(params, branch, closure_kind, bracket.c, w[0],
                               w[-1], tol)
    _check_containment(bracket, profile)
    deviation = np.max(np.abs(profile.ratio(volume.nodes) - w)) / \
        np.max(np.abs(w))
    debug("profile n=%d mu=%g p=%g %s (%s): w(0)=%.12g, finite-volume "
          "deviation %g" % (params.n, params.mu, params.p, branch.value,
                            closure_kind.value,
                            profile.expansion_at_0.w_zero, deviation),
          LogCategory.SOLVER)
    return NonlinearProfile(params, branch, bracket, closure_kind, profile,
                            volume.nodes, w, residual, iterations, refined)


def profile_residual(profile, t):
    """Scaled residual of the angular equation for the sampled v."""
    return angular_residual(profile.params, profile.profile, t)


def identity_defect(params, ratio, exponent):
    """Relative defect of the integral identity obtained by testing the
    angular equation with t^α₊, v = t^exponent·ratio(t).

    The boundary term at t=0 is kept: it vanishes for the plus branch and
    equals (α₋-α₊)·ratio(0) for the minus branch."""
    n, mu, p = params
    alpha_plus, _ = exponents.alphas(mu)
    b = (n - 3) / 2
    lambda_zero = exponents.lambda_of(n, exponents.strong_exponent(p)) - \
        exponents.lambda_of(n, alpha_plus)

    def integral(power, exponent_at_0):
        if exponent_at_0 <= -1:
            raise DivergentIntegral(exponent_at_0)
        # each half carries the algebraic weight of its own endpoint
        near_0, _ = scipy.integrate.quad(
            lambda t: float(ratio(t)) ** power * (1 - t * t) ** b,
            0, QUAD_SPLIT, weight='alg', wvar=(exponent_at_0, 0),
            limit=QUAD_LIMIT, epsabs=0, epsrel=QUAD_RELATIVE)
        near_1, _ = scipy.integrate.quad(
            lambda t: float(ratio(t)) ** power * t ** exponent_at_0 *
            (1 + t) ** b, QUAD_SPLIT, 1, weight='alg', wvar=(0, b),
            limit=QUAD_LIMIT, epsabs=0, epsrel=QUAD_RELATIVE)
        return near_0 + near_1

    first = integral(1, exponent + alpha_plus)
    second = integral(p, p * exponent + alpha_plus)

    boundary = 0.0
    if abs(exponent + alpha_plus - 1) <= exponents.CRITICAL_TOLERANCE:
        boundary = (exponent - alpha_plus) * float(ratio(0.0))

    total = abs(lambda_zero * first) + abs(second) + abs(boundary)
    return abs(lambda_zero * first - second - boundary) / total


def integral_identity_check(profile):
    return identity_defect(profile.params, profile.ratio, profile.exponent)


UniquenessReport = collections.namedtuple(
    'UniquenessReport', ['starts', 'methods', 'max_deviation', 'tol',
                         'agree', 'w_zero', 'w_zero_positive'])


def check_uniqueness_plus(params, n_starts=DEFAULT_STARTS, tol=1e-6,
                          rng=None, solve_tol=DEFAULT_TOL):
    """Solve from several starting iterates above the solution and compare
    the limits. Alternates monotone iteration from scaled supersolutions
    and damped Newton from randomized multiples of the supersolution."""
    exponents.require_p(params)
    table = exponents.derive_exponents(params)
    if table.lambda_zero(Branch.PLUS) <= 0:
        raise NoBracket(Branch.PLUS, "Λ₀=%g is not positive" %
                        table.lambda_zero(Branch.PLUS))
    if rng is None:
        rng = np.random.default_rng()

    base = solve_profile(params, Branch.PLUS, solve_tol)
    bracket = base.bracket
    volume = mesh.FiniteVolume(base.nodes)
    discretization = Discretization(params, Branch.PLUS, volume,
                                    Closure.FLUX_FREE, bracket.c)
    upper = bracket.super.ratio(volume.nodes)

    limits = [base.w]
    methods = ['monotone']
    for start in range(1, n_starts):
        if start % 2 == 1:
            initial = upper * rng.uniform(1.0, 4.0)
            w, _, _ = _solve(discretization, bracket, initial, solve_tol,
                             ceiling=initial)
            methods.append('monotone')
        else:
            initial = upper * rng.uniform(1.0, 2.0, size=len(upper))
            w, _, _ = discretization.newton(initial, solve_tol)
            methods.append('newton')
        limits.append(w)

    scale = np.max(np.abs(base.w))
    deviation = max(float(np.max(np.abs(w - base.w))) / scale
                    for w in limits)
    report = UniquenessReport(starts=n_starts, methods=methods,
                              max_deviation=deviation, tol=tol,
                              agree=deviation <= tol,
                              w_zero=base.v_limit,
                              w_zero_positive=base.v_limit > 0)
    debug("uniqueness n=%d mu=%g p=%g: deviation %g over %d starts" %
          (params.n, params.mu, params.p, deviation, n_starts),
          LogCategory.SOLVER)
    if not report.agree:
        raise NonUniqueLimit(report)
    return report


def eval_solution(profile, x):
    x = np.asarray(x, dtype=float)
    if np.any(x[..., 0] <= 0):
        raise exponents.ParameterError("point", x.tolist(),
                                       "inside the half-space x₁ > 0")
    r = np.linalg.norm(x, axis=-1)
    return r ** exponents.strong_exponent(profile.params.p) * \
        profile.value(x[..., 0] / r)
