# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import logging
import os

import hardy.exponents as exponents
import hardy.spectra as spectra

DEFAULT_LOG_CONSOLE = False
DEFAULT_LOG_FILE = None
DEFAULT_LOG_FILE_BACKUP = 0
DEFAULT_LOG_FILE_MAX_SIZE = 1000000
DEFAULT_LOG_FILTER = logging.INFO

DEFAULT_BRANCH = 'plus'
DEFAULT_S = 1
DEFAULT_M = 0
DEFAULT_COUNT = 3
DEFAULT_TOL = 1e-8
DEFAULT_EIGEN_TOL = 1e-10
DEFAULT_STARTS = 5
DEFAULT_SEED = 4711
DEFAULT_RESOLUTION = 100
DEFAULT_WORKERS = 1
DEFAULT_R_MIN = 0.25
DEFAULT_R_MAX = 1.0
DEFAULT_RADII = 4
DEFAULT_ANGLES = 8

WORKERS_ENV = 'HARDY_WORKERS'


class Error(Exception):
    def __init__(self, message):
        Exception.__init__(self, message)


class MissingFieldError(Error):
    def __init__(self, dict_path, dict_key):
        Error.__init__(self, "required parameter '%s' is missing" %
                       path(dict_path, dict_key))


class DuplicateFieldError(Error):
    def __init__(self, dict_path, dict_key):
        Error.__init__(self, "parameter '%s' was used in combination "
                       "with one of its aliases" % path(dict_path, dict_key))


class UnknownFieldError(Error):
    def __init__(self, dict_path, dict_key):
        Error.__init__(self, "unknown parameter '%s'" %
                       path(dict_path, dict_key))


class FormatError(Error):
    def __init__(self, field_name, illegal_value, valid_values=None):
        message = "invalid %s: '%s'" % (field_name, illegal_value)
        if valid_values is not None:
            message += " (valid values: %s)" % " ".join(valid_values)
        Error.__init__(self, message)


LOG_LEVELS = {
    'debug': logging.DEBUG,
    'info': logging.INFO,
    'warning': logging.WARNING,
    'error': logging.ERROR,
    'critical': logging.CRITICAL
}

BRANCHES = [branch.value for branch in exponents.Branch]
KINDS = [kind.value for kind in spectra.HarmonicKind]

NUMBER = (int, float)


def path(*args):
    return ".".join([arg for arg in args if len(arg) > 0])


def _fmt(value):
    return "-" if value is None else "%s" % value


def _positive(field_name, value):
    if value <= 0:
        raise FormatError(field_name, value)
    return value


def _at_least(field_name, value, lower):
    if value < lower:
        raise FormatError(field_name, value)
    return value


def default_workers():
    value = os.environ.get(WORKERS_ENV)
    if value is None:
        return DEFAULT_WORKERS
    try:
        return _at_least("%s value" % WORKERS_ENV, int(value), 1)
    except ValueError:
        raise FormatError("%s value" % WORKERS_ENV, value)


class LogConf:
    def __init__(self):
        self.console = DEFAULT_LOG_CONSOLE
        self.log_file = DEFAULT_LOG_FILE
        self.log_file_backup = DEFAULT_LOG_FILE_BACKUP
        self.log_file_max_size = DEFAULT_LOG_FILE_MAX_SIZE
        self.filter = DEFAULT_LOG_FILTER

    def set_console(self, console):
        self.console = console

    def set_log_file(self, log_file):
        self.log_file = log_file

    def set_log_file_backup(self, log_file_backup):
        self.log_file_backup = log_file_backup

    def set_log_file_max_size(self, log_file_max_size):
        self.log_file_max_size = log_file_max_size

    def set_filter(self, level_name):
        try:
            self.filter = LOG_LEVELS[level_name]
        except KeyError:
            raise FormatError("filter level", level_name, LOG_LEVELS.keys())

    def filter_name(self):
        for name, code in LOG_LEVELS.items():
            if code == self.filter:
                return name

    def __str__(self):
        if self.log_file is None:
            log_file_s = "-"
        else:
            log_file_s = "%s, log_file_backup: %d" % \
                (self.log_file, self.log_file_backup)
            if self.log_file_backup > 0:
                log_file_s += ", log_file_max_size: %d" % \
                    self.log_file_max_size

        return "{ console: %s, log_file: '%s', filter: %s }" % \
            (str(self.console).lower(), log_file_s, self.filter_name())


class ProblemConf:
    def __init__(self):
        self.n = None
        self.mu = None
        self.p = None
        self.branch = DEFAULT_BRANCH
        self.kind = None
        self.gamma = None
        self.s = DEFAULT_S
        self.m = DEFAULT_M
        self.count = DEFAULT_COUNT

    def set_n(self, n):
        self.n = _at_least("dimension", n, 2)

    def set_mu(self, mu):
        self.mu = float(mu)

    def set_p(self, p):
        self.p = float(p)

    def set_branch(self, branch):
        if branch not in BRANCHES:
            raise FormatError("branch", branch, BRANCHES)
        self.branch = branch

    def set_kind(self, kind):
        if kind not in KINDS:
            raise FormatError("harmonic kind", kind, KINDS)
        self.kind = kind

    def set_gamma(self, gamma):
        self.gamma = float(gamma)

    def set_s(self, s):
        self.s = _at_least("eigenvalue index", s, 1)

    def set_m(self, m):
        self.m = _at_least("azimuthal index", m, 0)

    def set_count(self, count):
        self.count = _at_least("eigenvalue count", count, 1)

    def params(self):
        """The validated (n, μ, p) triple, p optional."""
        if self.n is None:
            raise MissingFieldError("problem", "n")
        if self.mu is None:
            raise MissingFieldError("problem", "mu")
        return exponents.make_params(self.n, self.mu, self.p)

    def __str__(self):
        return "{ n: %s, mu: %s, p: %s, branch: %s, kind: %s, gamma: %s, " \
            "s: %d, m: %d, count: %d }" % \
            (_fmt(self.n), _fmt(self.mu), _fmt(self.p), self.branch,
             _fmt(self.kind), _fmt(self.gamma), self.s, self.m, self.count)


class SolverConf:
    def __init__(self):
        self.tol = None
        self.starts = DEFAULT_STARTS
        self.seed = DEFAULT_SEED

    def set_tol(self, tol):
        self.tol = float(_positive("tolerance", tol))

    def set_starts(self, starts):
        self.starts = _at_least("start count", starts, 1)

    def set_seed(self, seed):
        self.seed = _at_least("seed", seed, 0)

    def tolerance(self, default):
        return default if self.tol is None else self.tol

    def __str__(self):
        return "{ tol: %s, starts: %d, seed: %d }" % \
            (_fmt(self.tol), self.starts, self.seed)


class SweepConf:
    def __init__(self):
        self.mu_min = None
        self.mu_max = None
        self.p_min = None
        self.p_max = None
        self.resolution = DEFAULT_RESOLUTION
        self.workers = None

    def set_mu_min(self, mu_min):
        self.mu_min = float(mu_min)

    def set_mu_max(self, mu_max):
        self.mu_max = float(mu_max)

    def set_p_min(self, p_min):
        self.p_min = float(p_min)

    def set_p_max(self, p_max):
        self.p_max = float(p_max)

    def set_resolution(self, resolution):
        self.resolution = _at_least("resolution", resolution, 2)

    def set_workers(self, workers):
        self.workers = _at_least("worker count", workers, 1)

    def worker_count(self):
        if self.workers is None:
            return default_workers()
        return self.workers

    def ranges(self):
        for name in ('mu_min', 'mu_max', 'p_min', 'p_max'):
            if getattr(self, name) is None:
                raise MissingFieldError("sweep", name)
        if self.mu_min > self.mu_max:
            raise Error("empty mu range [%g, %g]" %
                        (self.mu_min, self.mu_max))
        if self.mu_max >= exponents.MU_BOUND:
            raise FormatError("mu_max", self.mu_max)
        if self.p_min <= 1 or self.p_min > self.p_max:
            raise Error("invalid p range [%g, %g]" %
                        (self.p_min, self.p_max))
        return (self.mu_min, self.mu_max), (self.p_min, self.p_max)

    def __str__(self):
        return "{ mu: [%s, %s], p: [%s, %s], resolution: %d, workers: %s }" \
            % (_fmt(self.mu_min), _fmt(self.mu_max), _fmt(self.p_min),
               _fmt(self.p_max), self.resolution, _fmt(self.workers))


class SampleConf:
    def __init__(self):
        self.artifact = None
        self.r_min = DEFAULT_R_MIN
        self.r_max = DEFAULT_R_MAX
        self.radii = DEFAULT_RADII
        self.angles = DEFAULT_ANGLES

    def set_artifact(self, artifact):
        self.artifact = artifact

    def set_r_min(self, r_min):
        self.r_min = float(_positive("minimum radius", r_min))

    def set_r_max(self, r_max):
        self.r_max = float(_positive("maximum radius", r_max))

    def set_radii(self, radii):
        self.radii = _at_least("radius count", radii, 1)

    def set_angles(self, angles):
        self.angles = _at_least("angle count", angles, 1)

    def artifact_file(self):
        if self.artifact is None:
            raise MissingFieldError("sample", "artifact")
        return self.artifact

    def __str__(self):
        return "{ artifact: '%s', r: [%g, %g], radii: %d, angles: %d }" % \
            (_fmt(self.artifact), self.r_min, self.r_max, self.radii,
             self.angles)


class OutputConf:
    def __init__(self):
        self.output = None
        self.boundaries = None

    def set_output(self, output):
        self.output = output

    def set_boundaries(self, boundaries):
        self.boundaries = boundaries

    def __str__(self):
        return "{ output: '%s', boundaries: '%s' }" % \
            (_fmt(self.output), _fmt(self.boundaries))


class Conf:
    def __init__(self):
        self.log = LogConf()
        self.problem = ProblemConf()
        self.solver = SolverConf()
        self.sweep = SweepConf()
        self.sample = SampleConf()
        self.output = OutputConf()

    def __str__(self):
        sections = []
        for name in ("problem", "solver", "sweep", "sample", "output", "log"):
            sections.append("%s: %s" % (name, getattr(self, name)))
        return ", ".join(sections)


def assure_type(value, value_type, path):
    if isinstance(value, bool) and value_type is not bool:
        raise Error("parameter '%s' has invalid value type: '%s'" %
                    (path, type(value)))
    if not isinstance(value, value_type):
        raise Error("parameter '%s' has invalid value type: '%s' (expected "
                    "'%s')" % (path, type(value), value_type))


def assure_known(dict_value, dict_keys, dict_path):
    for dict_key in dict_value:
        if dict_key not in dict_keys:
            raise UnknownFieldError(dict_path, str(dict_key))


def dict_lookup(dict_value, dict_keys, value_type, dict_path, required=False,
                default=None):
    if (isinstance(dict_keys, str)):
        dict_keys = [dict_keys]

    value = None

    for dict_key in dict_keys:
        if dict_key in dict_value:
            if value is not None:
                raise DuplicateFieldError(dict_path, dict_key)
            value = dict_value.get(dict_key)

    if value is None:
        if required:
            assert default is None
            raise MissingFieldError(dict_path, dict_key)
        return default

    assure_type(value, value_type, path(dict_path, dict_key))

    return value


def dict_copy(dict_value, dict_key, value_type, dict_path, set_value,
              required=False):
    value = dict_lookup(dict_value, dict_key, value_type, dict_path,
                        required=required)
    if value is not None:
        set_value(value)


def section_populate(section, source, fields, path):
    """Copy typed fields into a section; fields maps key to type."""
    if source is None:
        return
    assure_known(source, fields.keys(), path)
    for key, value_type in fields.items():
        dict_copy(source, key, value_type, path,
                  getattr(section, "set_%s" % key))


LOG_FIELDS = {
    "console": bool,
    "log_file": str,
    "log_file_backup": int,
    "log_file_max_size": int,
    "filter": str
}

PROBLEM_FIELDS = {
    "n": int,
    "mu": NUMBER,
    "p": NUMBER,
    "branch": str,
    "kind": str,
    "gamma": NUMBER,
    "s": int,
    "m": int,
    "count": int
}

SOLVER_FIELDS = {
    "tol": NUMBER,
    "starts": int,
    "seed": int
}

SWEEP_FIELDS = {
    "mu_min": NUMBER,
    "mu_max": NUMBER,
    "p_min": NUMBER,
    "p_max": NUMBER,
    "resolution": int,
    "workers": int
}

SAMPLE_FIELDS = {
    "artifact": str,
    "r_min": NUMBER,
    "r_max": NUMBER,
    "radii": int,
    "angles": int
}

OUTPUT_FIELDS = {
    "output": str,
    "boundaries": str
}

SECTIONS = {
    "log": LOG_FIELDS,
    "problem": PROBLEM_FIELDS,
    "solver": SOLVER_FIELDS,
    "sweep": SWEEP_FIELDS,
    "sample": SAMPLE_FIELDS,
    "output": OUTPUT_FIELDS
}


def populate(conf, source):
    if source is None:
        return
    assure_type(source, dict, "")
    assure_known(source, SECTIONS.keys(), "")
    for name, fields in SECTIONS.items():
        section_populate(getattr(conf, name),
                         dict_lookup(source, name, dict, ""), fields, name)


def default():
    return Conf()


def load(conf_file):
    conf = Conf()
    import yaml
    try:
        with open(conf_file) as f:
            source = yaml.safe_load(f.read())
    except yaml.YAMLError as e:
        raise Error("unable to parse '%s': %s" % (conf_file, e))
    populate(conf, source)
    return conf
