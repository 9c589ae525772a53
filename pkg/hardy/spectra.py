# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

#
# Eigenpairs of the weighted angular problem and the separable
# harmonics r^γ k(cos θ₁) built from them.
#

import collections
import enum
import math

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.optimize

import hardy.angular_ode as angular_ode
import hardy.exponents as exponents
import hardy.mesh as mesh
import hardy.verify as verify
from hardy.logging import LogCategory, debug, warning

DEFAULT_TOL = 1e-10
MATCH_POINT = 0.5
SCAN_START = 1e-8
SCAN_STEP = 1.0
SCAN_MARGIN = 10.0
SCAN_CAP = 1e6

MATRIX_SIZE = 2000

GROWTH_RADII = 60
GROWTH_ANGLES = 60
GROWTH_R_MIN = 1e-3
GROWTH_R_MAX = 1e3

CLOSED_FORM_TOLERANCE = 1e-12


class Error(Exception):
    def __init__(self, message):
        Exception.__init__(self, message)


class BracketNotFound(Error):
    def __init__(self, s, m, Lambda_max, found):
        Error.__init__(self, "only %d sign changes of the shooting mismatch "
                       "below Λ=%g; cannot bracket eigenvalue (%d,%d)" %
                       (found, Lambda_max, s, m))
        self.s = s
        self.m = m
        self.Lambda_max = Lambda_max


class GammaOutOfRange(Error):
    def __init__(self, gamma, lower, upper):
        Error.__init__(self, "radial exponent %.17g outside (%.17g, %.17g) "
                       "where positive singular harmonics exist" %
                       (gamma, lower, upper))
        self.gamma = gamma
        self.lower = lower
        self.upper = upper


class HarmonicKind(enum.Enum):
    SMALL_PLUS = 'h_plus'
    SMALL_MINUS = 'h_minus'
    PLUS = 'H_plus'
    MINUS = 'H_minus'
    GAMMA = 'H_gamma'


def harmonic_kind(name):
    if isinstance(name, HarmonicKind):
        return name
    try:
        return HarmonicKind(name)
    except ValueError:
        raise exponents.ParameterError(
            "harmonic kind", name,
            "one of %s" % ", ".join(kind.value for kind in HarmonicKind))


EigenResult = collections.namedtuple(
    'EigenResult', ['s', 'm', 'Lambda_sm', 'gamma_plus', 'gamma_minus',
                    'profile'])


def _check_indices(n, s, m):
    if isinstance(s, bool) or not isinstance(s, int) or s < 1:
        raise exponents.ParameterError("eigenvalue index s", s,
                                       "an integer >= 1")
    if isinstance(m, bool) or not isinstance(m, int) or m < 0:
        raise exponents.ParameterError("azimuthal index m", m,
                                       "an integer >= 0")
    if n == 2 and m != 0:
        raise exponents.ParameterError("azimuthal index m", m, "0 when n=2")


class Shooter:
    """Two-sided shooting for one azimuthal family: the t^α₊ branch from
    t=0 and the regular branch from t=1 meet at MATCH_POINT."""

    def __init__(self, n, mu, m, tol=DEFAULT_TOL,
                 delta0=angular_ode.DEFAULT_DELTA,
                 delta1=angular_ode.DEFAULT_DELTA,
                 order=angular_ode.DEFAULT_ORDER):
        self.n = n
        self.mu = mu
        self.m = m
        self.tol = tol
        self.delta0 = delta0
        self.delta1 = delta1
        self.order = order
        self.alpha_plus, _ = exponents.alphas(mu)
        self.indices = exponents.angular_indices(n, mu, m, 0.0)
        self.evaluations = 0

    def ode(self, Lambda):
        return angular_ode.LinearAngularODE(self.n, self.mu,
                                            self.indices.nu_m, Lambda)

    def branches(self, Lambda):
        ode = self.ode(Lambda)
        small = angular_ode.frobenius_expansion(ode, 0, self.alpha_plus,
                                                self.order)
        regular = angular_ode.frobenius_expansion(
            ode, 1, self.indices.kappa_regular, self.order)
        start = self.delta0
        left = angular_ode.integrate_interior(
            ode, start, MATCH_POINT,
            (small.value(start), small.derivative(start)), self.tol)
        start = 1 - self.delta1
        right = angular_ode.integrate_interior(
            ode, start, MATCH_POINT,
            (regular.value(start), regular.derivative(start)), self.tol)
        self.evaluations += 1
        return ode, small, regular, left, right

    def mismatch(self, Lambda):
        _, _, _, left, right = self.branches(Lambda)
        k_left, dk_left = left.final
        k_right, dk_right = right.final
        # Wronskian of unit state vectors
        return (k_left * dk_right - dk_left * k_right) / \
            (math.hypot(k_left, dk_left) * math.hypot(k_right, dk_right))

    def roots(self, count):
        estimate = exponents.lambda_of(
            self.n, self.alpha_plus + self.m + 2 * (count - 1))
        upper = max(estimate, 0.0) + SCAN_MARGIN
        lower = SCAN_START
        f_lower = self.mismatch(lower)
        found = []
        while True:
            points = np.append(np.arange(lower + SCAN_STEP, upper, SCAN_STEP),
                               upper)
            for point in points:
                f_point = self.mismatch(point)
                if f_point == 0:
                    found.append(point)
                elif f_lower != 0 and (f_lower < 0) != (f_point < 0):
                    found.append(scipy.optimize.brentq(
                        self.mismatch, lower, point, xtol=1e-14,
                        rtol=1e-13, maxiter=200))
                lower, f_lower = point, f_point
            if len(found) >= count:
                return found
            if upper >= SCAN_CAP:
                raise BracketNotFound(count, self.m, upper, len(found))
            upper = min(2 * upper, SCAN_CAP)

    def eigenfunction(self, Lambda):
        ode, small, regular, left, right = self.branches(Lambda)
        k_left, dk_left = left.final
        k_right, dk_right = right.final
        scale = (k_left * k_right + dk_left * dk_right) / \
            (k_right * k_right + dk_right * dk_right)

        grid = mesh.profile_grid(self.delta0, self.delta1)
        lower = grid <= MATCH_POINT
        k = np.empty_like(grid)
        dk = np.empty_like(grid)
        k[lower], dk[lower] = left(grid[lower])
        k[~lower], dk[~lower] = scale * right(grid[~lower])
        ddk = ode.second_derivative(grid, k, dk)
        return angular_ode.AngularProfile(
            grid, k, dk, ddk,
            angular_ode.EndpointPatch([(1.0, small)]),
            angular_ode.EndpointPatch([(scale, regular)]),
            "unit coefficient of t^α₊ at t=0", ode)

    def result(self, s, Lambda):
        profile = self.eigenfunction(Lambda)
        gamma_plus, gamma_minus = exponents.radial_exponents(self.n, Lambda)
        return EigenResult(s=s, m=self.m, Lambda_sm=Lambda,
                           gamma_plus=gamma_plus, gamma_minus=gamma_minus,
                           profile=profile)


def _indexed(shooter, roots, count):
    """Index roots by the interior zero count of their eigenfunction."""
    results = {}
    for Lambda in roots:
        result = shooter.result(0, Lambda)
        s = result.profile.sign_changes() + 1
        if s in results:
            continue
        results[s] = result._replace(s=s)
    missing = [s for s in range(1, count + 1) if s not in results]
    if missing:
        raise BracketNotFound(missing[0], shooter.m, roots[-1], len(roots))
    for position, Lambda in enumerate(roots[:count]):
        if results[position + 1].Lambda_sm != Lambda:
            warning("bracket order and zero count disagree near Λ=%g" %
                    Lambda, LogCategory.SOLVER)
    return [results[s] for s in range(1, count + 1)]


def eigenvalues(n, mu, m, count, tol=DEFAULT_TOL):
    _check_indices(n, count, m)
    exponents.make_params(n, mu)
    shooter = Shooter(n, mu, m, tol)
    roots = shooter.roots(count)
    results = _indexed(shooter, roots, count)
    debug("eigenvalues n=%d mu=%g m=%d: %s (%d shots)" %
          (n, mu, m, ", ".join("%.12g" % r.Lambda_sm for r in results),
           shooter.evaluations), LogCategory.SOLVER)
    return results


def eigenvalue(n, mu, s, m, tol=DEFAULT_TOL):
    return eigenvalues(n, mu, m, s, tol)[s - 1]


def orthogonality(first, second):
    """Normalized weighted inner product of two eigenfunctions."""
    ode = first.profile.ode
    b = (ode.n - 3) / 2

    def inner(f, g):
        value, _ = scipy.integrate.quad(
            lambda t: f(t) * g(t) * (1 + t) ** b, 0, 1, weight='alg',
            wvar=(0, b), limit=400)
        return value

    f = first.profile.value
    g = second.profile.value
    return inner(f, g) / math.sqrt(inner(f, f) * inner(g, g))


def _matrix_spectrum(n, mu, m, count, size):
    # g = t^α₊(1-t²)^(m/2) is the first eigenfunction of family m; in
    # k = g·w the problem reads -(σ̃w')' = (Λ - Λ(α₊+m))ρ̃w, with
    # weights free of the ν/(1-t²) potential
    alpha_plus, _ = exponents.alphas(mu)
    a = alpha_plus
    b = (n - 3) / 2 + m
    volume = mesh.FiniteVolume(mesh.cosine_nodes(size))

    def flux(t):
        return t ** (2 * a) * (1 - t * t) ** (b + 1)

    diagonal, upper = volume.stiffness(flux)
    mass = volume.weights(2 * a, b, lambda t: (1 + t) ** b)

    scale = 1 / np.sqrt(mass)
    values = scipy.linalg.eigh_tridiagonal(
        diagonal * scale * scale, upper * scale[:-1] * scale[1:],
        eigvals_only=True, select='i', select_range=(0, count - 1))
    return exponents.lambda_of(n, alpha_plus + m) + values


def matrix_eigenvalues(n, mu, m, count, size=MATRIX_SIZE):
    """Finite-volume oracle for the first eigenvalues after factoring
    out the endpoint behaviour, extrapolated from two resolutions."""
    coarse = _matrix_spectrum(n, mu, m, count, size)
    fine = _matrix_spectrum(n, mu, m, count, 2 * size)
    return (4 * fine - coarse) / 3


class SeparableHarmonic:
    def __init__(self, kind, n, mu, gamma, angular, m=0, positive=True,
                 note=""):
        self.kind = kind
        self.n = n
        self.mu = mu
        self.gamma = gamma
        self.angular = angular
        self.m = m
        self.positive = positive
        self.note = note

    def azimuthal(self):
        return "1" if self.m == 0 else "p_m(η)"

    def boundary_exponent(self):
        alpha_plus, alpha_minus = exponents.alphas(self.mu)
        if self.kind in (HarmonicKind.SMALL_PLUS, HarmonicKind.SMALL_MINUS):
            return alpha_plus
        return alpha_minus

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        return r ** self.gamma * self.angular.value(x[..., 0] / r)

    def sampler(self):
        return verify.FieldSampler(self.evaluate, self.n, self.mu,
                                   radial_exponent=self.gamma,
                                   boundary_exponent=self.boundary_exponent(),
                                   name=self.kind.value)


def _equal(a, b):
    return abs(a - b) <= CLOSED_FORM_TOLERANCE * max(1.0, abs(b))


def _k_gamma(n, mu, m, gamma, tol):
    _, alpha_minus = exponents.alphas(mu)
    if m == 0 and (_equal(gamma, alpha_minus) or
                   _equal(gamma, exponents.reflect(n, alpha_minus))):
        return angular_ode.PowerProfile(n, mu, alpha_minus)
    return angular_ode.solve_k_gamma(n, mu, m, gamma, tol)


def harmonic(kind, n, mu, gamma=None, s=None, m=0, tol=DEFAULT_TOL):
    kind = harmonic_kind(kind)
    exponents.make_params(n, mu)
    alpha_plus, alpha_minus = exponents.alphas(mu)

    if kind in (HarmonicKind.SMALL_PLUS, HarmonicKind.SMALL_MINUS):
        plus = kind == HarmonicKind.SMALL_PLUS
        if s is None or (s == 1 and m == 0):
            angular = angular_ode.PowerProfile(n, mu, alpha_plus)
            radial = alpha_plus if plus else exponents.reflect(n, alpha_plus)
            return SeparableHarmonic(kind, n, mu, radial, angular, 0, True,
                                     "closed form")
        result = eigenvalue(n, mu, s, m, tol)
        radial = result.gamma_plus if plus else result.gamma_minus
        return SeparableHarmonic(kind, n, mu, radial, result.profile, m,
                                 False, "eigenfunction (%d,%d)" % (s, m))

    if gamma is None:
        raise exponents.ParameterError("radial exponent gamma", None,
                                       "given for kind %s" % kind.value)
    gamma = float(gamma)

    if kind == HarmonicKind.GAMMA:
        lower = exponents.reflect(n, alpha_plus)
        if not lower < gamma < alpha_plus or m != 0:
            raise GammaOutOfRange(gamma, lower, alpha_plus)
        angular = _k_gamma(n, mu, 0, gamma, tol)
        return SeparableHarmonic(kind, n, mu, gamma, angular, 0, True,
                                 "positive, in the singular class")

    angular = _k_gamma(n, mu, m, gamma, tol)
    radial = gamma if kind == HarmonicKind.PLUS else \
        exponents.reflect(n, gamma)
    positive = m == 0 and \
        exponents.lambda_of(n, gamma) < exponents.lambda_of(n, alpha_plus)
    return SeparableHarmonic(kind, n, mu, radial, angular, m, positive,
                             "k_gamma with gamma=%.17g" % gamma)


GrowthBound = collections.namedtuple('GrowthBound',
                                     ['c_best', 'passed', 'sup', 'inf'])


def verify_growth_bounds(h, gamma, radii=GROWTH_RADII, angles=GROWTH_ANGLES,
                         r_min=GROWTH_R_MIN, r_max=GROWTH_R_MAX):
    """Two-sided bound of h by x₁^α₋ |x|^(γ-α₋) on a polar grid."""
    _, alpha_minus = exponents.alphas(h.mu)
    r = np.geomspace(r_min, r_max, radii)
    theta = np.linspace(0, np.arccos(h.angular.grid[0]), angles)
    t = np.cos(theta)

    angular = h.angular.value(t) / t ** alpha_minus
    ratio = np.outer(r ** (h.gamma - gamma), angular)
    candidates = [ratio.ravel()]
    passed = True

    if not _equal(h.gamma, gamma):
        # radial mismatch sends the ratio to 0 or ∞ at one end
        passed = False
    limit = h.angular.leading_ratio(alpha_minus)
    if limit == 0 or math.isinf(limit):
        passed = False
    else:
        candidates.append(np.array([limit]))

    values = np.concatenate(candidates)
    sup = float(np.max(values))
    inf = float(np.min(values))
    if not (np.all(np.isfinite(values)) and inf > 0):
        passed = False
    c_best = max(sup, 1 / inf) if inf > 0 else math.inf

    debug("growth bound for %s: sup=%g inf=%g pass=%s" %
          (h.kind.value, sup, inf, passed), LogCategory.VERIFY)

    return GrowthBound(c_best=c_best, passed=passed, sup=sup, inf=inf)
