# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

#
# JSON documents for computed objects: separable harmonics, nonlinear
# profiles and reports. Floats are written in shortest round-trip form,
# so a profile read back evaluates exactly as the one written.
#

import enum
import json
import math

import numpy as np

import hardy.angular_ode as angular_ode
import hardy.exponents as exponents
import hardy.nonlinear as nonlinear
import hardy.spectra as spectra

MAJOR_VERSION = 1
MINOR_VERSION = 0
PATCH_VERSION = 0

VERSION = "%d.%d.%d" % (MAJOR_VERSION, MINOR_VERSION, PATCH_VERSION)

FORMAT_NAME = 'hardy-artifact'
FORMAT_VERSION = 1


class Error(Exception):
    def __init__(self, message):
        Exception.__init__(self, message)


class FormatError(Error):
    def __init__(self, message):
        Error.__init__(self, message)


class ArtifactType(enum.Enum):
    HARMONIC = 'harmonic'
    NONLINEAR_PROFILE = 'nonlinear_profile'
    REPORT = 'report'


def number(value):
    """JSON has no infinities; they are written as strings."""
    if value is None:
        return None
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return value


def to_number(value):
    if isinstance(value, str):
        if value not in ("inf", "-inf", "nan"):
            raise FormatError("invalid number \"%s\"" % value)
        return float(value)
    return value


class Field:
    def __init__(self, name):
        self.name = name

    def pull(self, obj, opt=False):
        if self.name not in obj:
            if opt:
                return None
            raise FormatError("artifact is missing required field \"%s\"" %
                              self.name)
        return self.convert(obj[self.name])

    def convert(self, value):
        return value

    def put(self, value, obj):
        obj[self.name] = value


class NumberField(Field):
    def convert(self, value):
        value = to_number(value)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise FormatError("artifact field \"%s\" is not a number" %
                              self.name)
        return float(value)

    def put(self, value, obj):
        obj[self.name] = number(value)


class IntField(Field):
    def convert(self, value):
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise FormatError("artifact field \"%s\" is not an integer" %
                              self.name)
        return value


class StringField(Field):
    def convert(self, value):
        if not isinstance(value, str):
            raise FormatError("artifact field \"%s\" is not a string" %
                              self.name)
        return value


class ArrayField(Field):
    def convert(self, value):
        if not isinstance(value, list):
            raise FormatError("artifact field \"%s\" is not a list" %
                              self.name)
        try:
            return np.array([to_number(element) for element in value],
                            dtype=float)
        except (TypeError, ValueError):
            raise FormatError("artifact field \"%s\" holds a non-numeric "
                              "element" % self.name)

    def put(self, value, obj):
        obj[self.name] = [number(element) for element in value]


class EnumField(Field):
    def __init__(self, name, enum_type):
        Field.__init__(self, name)
        self.enum_type = enum_type

    def convert(self, value):
        try:
            return self.enum_type(value)
        except ValueError:
            raise FormatError("invalid %s \"%s\"" % (self.name, value))

    def put(self, value, obj):
        obj[self.name] = value.value


FIELD_N = IntField('n')
FIELD_MU = NumberField('mu')
FIELD_P = NumberField('p')
FIELD_M = IntField('m')
FIELD_S = IntField('s')
FIELD_NU = NumberField('nu')
FIELD_LAMBDA = NumberField('Lambda')
FIELD_GAMMA = NumberField('gamma')
FIELD_WEIGHT = NumberField('weight')
FIELD_ENDPOINT = IntField('endpoint')
FIELD_EXPONENT = NumberField('exponent')
FIELD_RADIUS = NumberField('radius')
FIELD_COEFFICIENTS = ArrayField('coefficients')
FIELD_GRID = ArrayField('grid')
FIELD_VALUES = ArrayField('values')
FIELD_DERIVATIVES = ArrayField('derivatives')
FIELD_SECOND_DERIVATIVES = ArrayField('second_derivatives')
FIELD_NORMALIZATION = StringField('normalization')
FIELD_NODES = ArrayField('nodes')
FIELD_W = ArrayField('w')
FIELD_W_ZERO = NumberField('w_zero')
FIELD_W_ONE = NumberField('w_one')
FIELD_FREE = NumberField('free')
FIELD_KIND = EnumField('kind', spectra.HarmonicKind)
FIELD_BRANCH = EnumField('branch', exponents.Branch)
FIELD_CLOSURE = EnumField('closure', nonlinear.Closure)


def _patch_to_json(patch):
    terms = []
    for weight, expansion in patch.terms:
        term = {}
        FIELD_WEIGHT.put(weight, term)
        FIELD_ENDPOINT.put(expansion.endpoint, term)
        FIELD_EXPONENT.put(expansion.exponent, term)
        FIELD_RADIUS.put(expansion.radius, term)
        FIELD_COEFFICIENTS.put(expansion.coefficients, term)
        terms.append(term)
    return terms


def _patch_from_json(terms):
    if not isinstance(terms, list):
        raise FormatError("endpoint patch is not a list")
    return angular_ode.EndpointPatch([
        (FIELD_WEIGHT.pull(term), angular_ode.FrobeniusExpansion(
            FIELD_ENDPOINT.pull(term), FIELD_EXPONENT.pull(term),
            FIELD_COEFFICIENTS.pull(term), FIELD_RADIUS.pull(term)))
        for term in terms])


def profile_to_json(profile):
    obj = {}
    ode = profile.ode
    if ode is not None:
        FIELD_N.put(ode.n, obj)
        FIELD_MU.put(ode.mu, obj)
        FIELD_NU.put(ode.nu, obj)
        FIELD_LAMBDA.put(ode.Lambda, obj)
    if isinstance(profile, angular_ode.PowerProfile):
        obj['closed_form'] = number(profile.exponent)
        return obj
    FIELD_NORMALIZATION.put(profile.normalization, obj)
    FIELD_GRID.put(profile.grid, obj)
    FIELD_VALUES.put(profile.values, obj)
    FIELD_DERIVATIVES.put(profile.derivatives, obj)
    FIELD_SECOND_DERIVATIVES.put(profile.second_derivatives, obj)
    obj['expansion_at_0'] = _patch_to_json(profile.expansion_at_0)
    obj['expansion_at_1'] = _patch_to_json(profile.expansion_at_1)
    return obj


def profile_from_json(obj):
    n = FIELD_N.pull(obj)
    mu = FIELD_MU.pull(obj)
    if 'closed_form' in obj:
        return angular_ode.PowerProfile(
            n, mu, NumberField('closed_form').pull(obj))
    ode = angular_ode.LinearAngularODE(n, mu, FIELD_NU.pull(obj),
                                       FIELD_LAMBDA.pull(obj))
    return angular_ode.AngularProfile(
        FIELD_GRID.pull(obj), FIELD_VALUES.pull(obj),
        FIELD_DERIVATIVES.pull(obj), FIELD_SECOND_DERIVATIVES.pull(obj),
        _patch_from_json(obj.get('expansion_at_0')),
        _patch_from_json(obj.get('expansion_at_1')),
        FIELD_NORMALIZATION.pull(obj), ode)


def harmonic_to_json(h):
    obj = {}
    FIELD_KIND.put(h.kind, obj)
    FIELD_N.put(h.n, obj)
    FIELD_MU.put(h.mu, obj)
    FIELD_GAMMA.put(h.gamma, obj)
    FIELD_M.put(h.m, obj)
    obj['positive'] = h.positive
    obj['note'] = h.note
    obj['azimuthal'] = h.azimuthal()
    FIELD_EXPONENT.put(h.boundary_exponent(), obj)
    obj['angular'] = profile_to_json(h.angular)
    return obj


def harmonic_from_json(obj):
    angular = obj.get('angular')
    if not isinstance(angular, dict):
        raise FormatError("harmonic artifact lacks an angular profile")
    return spectra.SeparableHarmonic(
        FIELD_KIND.pull(obj), FIELD_N.pull(obj), FIELD_MU.pull(obj),
        FIELD_GAMMA.pull(obj), profile_from_json(angular),
        FIELD_M.pull(obj), bool(obj.get('positive', False)),
        obj.get('note', ""))


def bracket_to_json(bracket):
    obj = {}
    FIELD_BRANCH.put(bracket.branch, obj)
    obj['row'] = bracket.row
    for name in ('tau', 'c', 'kappa_sub', 'kappa_super', 'epsilon',
                 'lambda_zero', 'lambda_epsilon'):
        NumberField(name).put(getattr(bracket, name), obj)
    return obj


def bracket_from_json(params, obj):
    values = [NumberField(name).pull(obj)
              for name in ('tau', 'c', 'kappa_sub', 'kappa_super',
                           'epsilon')]
    return nonlinear.Bracket(params, FIELD_BRANCH.pull(obj),
                             IntField('row').pull(obj), *values)


def ratio_profile_to_json(profile):
    obj = {}
    FIELD_GRID.put(profile.grid, obj)
    FIELD_VALUES.put(profile.values, obj)
    FIELD_DERIVATIVES.put(profile.derivatives, obj)
    FIELD_SECOND_DERIVATIVES.put(profile.second_derivatives, obj)
    FIELD_W_ZERO.put(profile.expansion_at_0.w_zero, obj)
    FIELD_FREE.put(profile.expansion_at_0.free, obj)
    FIELD_W_ONE.put(profile.expansion_at_1.w_one, obj)
    return obj


def ratio_profile_from_json(params, branch, closure_kind, obj):
    """The endpoint series are rebuilt from their free coefficients."""
    if not isinstance(obj, dict):
        raise FormatError("nonlinear profile artifact lacks an angular "
                          "profile")
    ode = nonlinear.ratio_ode(params, branch)
    try:
        origin = nonlinear.OriginSeries(
            ode, FIELD_W_ZERO.pull(obj), FIELD_FREE.pull(obj),
            pinned=closure_kind == nonlinear.Closure.PINNED)
    except nonlinear.Error as e:
        raise FormatError("invalid origin series: %s" % e)
    axis = nonlinear.AxisSeries(ode, FIELD_W_ONE.pull(obj))
    return nonlinear.RatioProfile(
        FIELD_GRID.pull(obj), FIELD_VALUES.pull(obj),
        FIELD_DERIVATIVES.pull(obj), FIELD_SECOND_DERIVATIVES.pull(obj),
        origin, axis)


def nonlinear_to_json(profile):
    obj = {}
    n, mu, p = profile.params
    FIELD_N.put(n, obj)
    FIELD_MU.put(mu, obj)
    FIELD_P.put(p, obj)
    FIELD_BRANCH.put(profile.branch, obj)
    FIELD_CLOSURE.put(profile.closure, obj)
    FIELD_EXPONENT.put(profile.exponent, obj)
    NumberField('v_limit').put(profile.v_limit, obj)
    NumberField('residual_sup').put(profile.residual_sup, obj)
    IntField('iterations').put(profile.iterations, obj)
    obj['refined'] = profile.refined
    obj['bracket'] = bracket_to_json(profile.bracket)
    FIELD_NODES.put(profile.nodes, obj)
    FIELD_W.put(profile.w, obj)
    obj['angular'] = ratio_profile_to_json(profile.profile)
    return obj


def nonlinear_from_json(obj):
    try:
        params = exponents.make_params(FIELD_N.pull(obj), FIELD_MU.pull(obj),
                                       FIELD_P.pull(obj))
    except exponents.ParameterError as e:
        raise FormatError("invalid problem parameters: %s" % e)
    bracket = obj.get('bracket')
    if not isinstance(bracket, dict):
        raise FormatError("nonlinear profile artifact lacks a bracket")
    branch = FIELD_BRANCH.pull(obj)
    closure_kind = FIELD_CLOSURE.pull(obj)
    profile = ratio_profile_from_json(params, branch, closure_kind,
                                      obj.get('angular'))
    return nonlinear.NonlinearProfile(
        params, branch, bracket_from_json(params, bracket), closure_kind,
        profile, FIELD_NODES.pull(obj), FIELD_W.pull(obj),
        NumberField('residual_sup').pull(obj),
        IntField('iterations').pull(obj, opt=True) or 0,
        bool(obj.get('refined', False)))


def document(artifact_type, data):
    return {
        'format': FORMAT_NAME,
        'format_version': FORMAT_VERSION,
        'version': VERSION,
        'type': artifact_type.value,
        'data': data
    }


def encode(obj):
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def dump(obj):
    """The artifact document of a harmonic or nonlinear profile."""
    if isinstance(obj, spectra.SeparableHarmonic):
        return document(ArtifactType.HARMONIC, harmonic_to_json(obj))
    if isinstance(obj, nonlinear.NonlinearProfile):
        return document(ArtifactType.NONLINEAR_PROFILE,
                        nonlinear_to_json(obj))
    raise Error("cannot serialize %s" % type(obj).__name__)


def write(obj, out):
    out.write(encode(dump(obj)))


def parse(text):
    try:
        root = json.loads(text)
    except ValueError as e:
        raise FormatError("artifact is not valid JSON: %s" % e)
    if not isinstance(root, dict) or root.get('format') != FORMAT_NAME:
        raise FormatError("not a %s document" % FORMAT_NAME)
    version = IntField('format_version').pull(root)
    if version != FORMAT_VERSION:
        raise FormatError("unsupported format version %d" % version)
    artifact_type = EnumField('type', ArtifactType).pull(root)
    data = root.get('data')
    if not isinstance(data, dict):
        raise FormatError("artifact has no data object")
    if artifact_type == ArtifactType.HARMONIC:
        return harmonic_from_json(data)
    if artifact_type == ArtifactType.NONLINEAR_PROFILE:
        return nonlinear_from_json(data)
    raise FormatError("artifact of type \"%s\" holds no field" %
                      artifact_type.value)


def load(filename):
    try:
        with open(filename) as f:
            return parse(f.read())
    except OSError as e:
        raise Error("unable to read artifact: %s" % e)
