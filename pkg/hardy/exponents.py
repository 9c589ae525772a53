# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

#
# Closed-form quantities derived from an instance (n, mu, p) of the
# Hardy problem -Δu - μu/x₁² + uᵖ = 0 on the half-space x₁ > 0.
#

import collections
import enum
import math

MU_BOUND = 0.25
CRITICAL_TOLERANCE = 1e-12


class Error(Exception):
    def __init__(self, message):
        Exception.__init__(self, message)


class ParameterError(Error):
    def __init__(self, name, value, constraint):
        Error.__init__(self, "invalid %s: %s (must be %s)" %
                       (name, value, constraint))
        self.name = name
        self.value = value


class Branch(enum.Enum):
    PLUS = 'plus'
    MINUS = 'minus'


class PlusBranch(enum.Enum):
    EXISTS_UNIQUE = 'exists_unique'
    NONEXISTENT = 'nonexistent'
    CRITICAL = 'critical'


class MinusBranch(enum.Enum):
    EXISTS = 'exists'
    NONEXISTENT_KO = 'nonexistent_KO'
    CRITICAL = 'critical'


class Theorem(enum.Enum):
    PLUS_EXISTENCE_UNIQUENESS = 'plus_existence_uniqueness'
    PLUS_NONEXISTENCE = 'plus_nonexistence'
    MINUS_EXISTENCE = 'minus_existence'
    MINUS_NONEXISTENCE_KO = 'minus_nonexistence_ko'
    MINUS_DOMINATED_BY_H_GAMMA = 'minus_dominated_by_H_gamma'
    CONSTANT_PROFILE = 'constant_profile'
    CRITICAL_UNDETERMINED = 'critical_undetermined'


ProblemParams = collections.namedtuple('ProblemParams', ['n', 'mu', 'p'])


def branch(name):
    if isinstance(name, Branch):
        return name
    try:
        return Branch(name)
    except ValueError:
        raise ParameterError("branch", name, "'plus' or 'minus'")


def make_params(n, mu, p=None):
    if isinstance(n, bool) or not isinstance(n, int):
        raise ParameterError("dimension n", n, "an integer")
    if n < 2:
        raise ParameterError("dimension n", n, ">= 2")
    mu = float(mu)
    if not math.isfinite(mu) or mu >= MU_BOUND:
        raise ParameterError("Hardy coefficient mu", mu, "< 1/4")
    if p is not None:
        p = float(p)
        if not math.isfinite(p) or p <= 1:
            raise ParameterError("exponent p", p, "> 1")
    return ProblemParams(n, mu, p)


def require_p(params):
    if params.p is None:
        raise ParameterError("exponent p", None, "present for this operation")


def lambda_of(n, gamma):
    return gamma * (gamma + n - 2)


def reflect(n, gamma):
    return -(gamma + n - 2)


def alphas(mu):
    root = math.sqrt(MU_BOUND - mu)
    alpha_plus = 0.5 + root
    # product of the roots is mu; avoids cancellation for small |mu|
    alpha_minus = mu / alpha_plus
    return alpha_plus, alpha_minus


def radial_exponents(n, Lambda):
    half = (n - 2) / 2
    disc = Lambda + half * half
    if disc < 0:
        return None, None
    root = math.sqrt(disc)
    return root - half, -root - half


def strong_exponent(p):
    return -2 / (p - 1)


def _extended(denominator):
    if denominator <= 0:
        return math.inf
    return 1 + 2 / denominator


class ExponentTable(collections.namedtuple(
        'ExponentTable', ['n', 'mu', 'p', 'alpha_plus', 'alpha_minus',
                          'p_c', 'p_ko', 'p_c_minus', 'mu_star', 'c_pmu'])):
    def lambda_of(self, gamma):
        return lambda_of(self.n, gamma)

    def lambda_zero(self, branch_name):
        """Λ(-2/(p-1)) - Λ(α±), the sign that decides existence."""
        alpha = self.alpha_plus if branch(branch_name) == Branch.PLUS \
            else self.alpha_minus
        return self.lambda_of(strong_exponent(self.p)) - self.lambda_of(alpha)

    def alpha(self, branch_name):
        if branch(branch_name) == Branch.PLUS:
            return self.alpha_plus
        return self.alpha_minus


def derive_exponents(params):
    n, mu, p = params
    alpha_plus, alpha_minus = alphas(mu)
    p_ko = 1 - 2 / alpha_minus if alpha_minus < 0 else math.inf
    c_pmu = critical_constant(params) if p is not None else None
    return ExponentTable(n=n, mu=mu, p=p, alpha_plus=alpha_plus,
                         alpha_minus=alpha_minus,
                         p_c=_extended(n - 2 + alpha_plus), p_ko=p_ko,
                         p_c_minus=_extended(n - 2 + alpha_minus),
                         mu_star=-n * (n - 2) / 4, c_pmu=c_pmu)


def critical_constant(params):
    require_p(params)
    p = params.p
    radicand = 2 * (p + 1) / (p - 1) ** 2 + params.mu
    if radicand < 0:
        if -radicand > CRITICAL_TOLERANCE * max(1, abs(params.mu)):
            return None
        radicand = 0.0
    return radicand ** (1 / (p - 1))


SpectralIndices = collections.namedtuple(
    'SpectralIndices', ['m', 'nu_m', 'kappa_plus', 'kappa_minus',
                        'kappa_regular', 'Lambda', 'gamma_plus',
                        'gamma_minus'])


def nu(n, m):
    return m * (m + n - 3)


def angular_indices(n, mu, m, Lambda):
    if isinstance(m, bool) or not isinstance(m, int) or m < 0:
        raise ParameterError("azimuthal index m", m, "an integer >= 0")
    nu_m = nu(n, m)
    # roots of κ² + κ(n-3)/2 - ν/4 = 0
    b = (n - 3) / 2
    root = math.sqrt(b * b + nu_m)
    kappa_plus = (root - b) / 2
    kappa_minus = (-root - b) / 2
    # for n = 2 the roots are {0, 1/2} and the axis-regular one is 0
    kappa_regular = kappa_plus if n >= 3 else min(kappa_plus, kappa_minus)
    gamma_plus, gamma_minus = radial_exponents(n, Lambda)
    return SpectralIndices(m=m, nu_m=nu_m, kappa_plus=kappa_plus,
                           kappa_minus=kappa_minus,
                           kappa_regular=kappa_regular, Lambda=Lambda,
                           gamma_plus=gamma_plus, gamma_minus=gamma_minus)


def _at(p, critical):
    if math.isinf(critical):
        return False
    return abs(p - critical) <= CRITICAL_TOLERANCE * max(1, critical)


def bracket_row(params, branch_name):
    """Row of the sub/supersolution recipe for one branch (1 to 4)."""
    require_p(params)
    if branch(branch_name) == Branch.PLUS:
        return 1
    table = derive_exponents(params)
    if params.mu <= table.mu_star:
        return 4
    if table.lambda_zero(Branch.MINUS) <= 0:
        return 2
    return 3


RegimeClassification = collections.namedtuple(
    'RegimeClassification', ['plus_branch', 'minus_branch',
                             'strong_singularity_possible', 'table1_row',
                             'applicable_theorems'])


def classify_regime(params):
    require_p(params)
    table = derive_exponents(params)
    p = params.p
    theorems = []

    if _at(p, table.p_c):
        plus = PlusBranch.CRITICAL
    elif p < table.p_c:
        plus = PlusBranch.EXISTS_UNIQUE
        theorems.append(Theorem.PLUS_EXISTENCE_UNIQUENESS)
    else:
        plus = PlusBranch.NONEXISTENT
        theorems.append(Theorem.PLUS_NONEXISTENCE)

    if _at(p, table.p_ko):
        minus = MinusBranch.CRITICAL
    elif p < table.p_ko:
        minus = MinusBranch.EXISTS
        theorems.append(Theorem.MINUS_EXISTENCE)
        if p > table.p_c and plus != PlusBranch.CRITICAL:
            theorems.append(Theorem.MINUS_DOMINATED_BY_H_GAMMA)
    else:
        minus = MinusBranch.NONEXISTENT_KO
        theorems.append(Theorem.MINUS_NONEXISTENCE_KO)

    if plus == PlusBranch.CRITICAL or minus == MinusBranch.CRITICAL:
        theorems.append(Theorem.CRITICAL_UNDETERMINED)

    if params.mu == 0 and table.lambda_of(strong_exponent(p)) > 0:
        theorems.append(Theorem.CONSTANT_PROFILE)

    if minus == MinusBranch.EXISTS:
        row = bracket_row(params, Branch.MINUS)
    elif plus == PlusBranch.EXISTS_UNIQUE:
        row = 1
    else:
        row = None

    return RegimeClassification(plus_branch=plus, minus_branch=minus,
                                strong_singularity_possible=p < table.p_ko,
                                table1_row=row,
                                applicable_theorems=theorems)


def constant_profile(params):
    """Level of the constant angular solution when μ = 0, else None."""
    require_p(params)
    if params.mu != 0:
        return None
    level = lambda_of(params.n, strong_exponent(params.p))
    if level <= 0:
        return None
    return level ** (1 / (params.p - 1))
