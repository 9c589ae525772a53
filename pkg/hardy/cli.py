# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import concurrent.futures
import contextlib
import csv
import getopt
import io
import math
import sys

import numpy as np

import hardy.angular_ode as angular_ode
import hardy.artifact as artifact
import hardy.conf as conf_mod
import hardy.exponents as exponents
import hardy.logging
import hardy.mesh as mesh
import hardy.nonlinear as nonlinear
import hardy.spectra as spectra
import hardy.verify as verify
from hardy.logging import LogCategory, debug, exception, info

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_SOLVER = 3

VERIFY_POINTS = 100
VERIFY_SCALE = 2.0
VERIFY_SCALE_POINTS = 10
KO_RADIUS = 1.0

HARMONIC_RESIDUAL_LIMIT = 1e-5
PROFILE_RESIDUAL_LIMIT = 1e-4
ANGULAR_RESIDUAL_LIMIT = 1e-6
IDENTITY_LIMIT = 1e-6
SCALING_LIMIT = 1e-6
UNIQUENESS_LIMIT = 1e-6

COMMANDS = ('params', 'eigs', 'harmonic', 'profile', 'phase', 'sample',
            'verify')

SHORT_OPTIONS = 'f:o:sl:w:vh'
LONG_OPTIONS = ['n=', 'mu=', 'p=', 'm=', 's=', 'gamma=', 'kind=', 'branch=',
                'count=', 'tol=', 'starts=', 'seed=', 'mu-min=', 'mu-max=',
                'p-min=', 'p-max=', 'resolution=', 'workers=', 'boundaries=',
                'artifact=', 'r-min=', 'r-max=', 'radii=', 'angles=',
                'log-file=']


def usage(name):
    print("Usage:")
    print("%s <command> [-f <conf-file>] [-o <file>] [-s] [-l <level>] "
          "[<options>]" % name)
    print("%s -v" % name)
    print("%s -h" % name)
    print("Commands:")
    print("  params    Print exponents and the regime classification of "
          "(n, mu[, p]).")
    print("  eigs      Compute the first eigenvalues of one azimuthal "
          "family.")
    print("  harmonic  Construct a separable harmonic and write it as an "
          "artifact.")
    print("  profile   Solve for a nonlinear angular profile and write it "
          "as an artifact.")
    print("  phase     Sweep (mu, p) and write the regime grid as CSV.")
    print("  sample    Sample an artifact on a polar grid and write CSV.")
    print("  verify    Run all checks that apply to an artifact.")
    print("Problem options:")
    print("  --n <dim>           Dimension (>= 2).")
    print("  --mu <coefficient>  Hardy coefficient (< 1/4).")
    print("  --p <exponent>      Nonlinearity exponent (> 1).")
    print("  --branch <branch>   Boundary behavior: %s. Default is %s." %
          (" or ".join(conf_mod.BRANCHES), conf_mod.DEFAULT_BRANCH))
    print("  --kind <kind>       Harmonic kind: %s." %
          ", ".join(conf_mod.KINDS))
    print("  --gamma <exponent>  Radial exponent of H_plus, H_minus and "
          "H_gamma.")
    print("  --s <index>         Eigenvalue index. Default is %d." %
          conf_mod.DEFAULT_S)
    print("  --m <index>         Azimuthal index. Default is %d." %
          conf_mod.DEFAULT_M)
    print("  --count <count>     Number of eigenvalues. Default is %d." %
          conf_mod.DEFAULT_COUNT)
    print("Solver options:")
    print("  --tol <tol>         Solver tolerance. Default is %g for "
          "eigenvalues and" % conf_mod.DEFAULT_EIGEN_TOL)
    print("                      %g for profiles." % conf_mod.DEFAULT_TOL)
    print("  --starts <count>    Uniqueness starts. Default is %d." %
          conf_mod.DEFAULT_STARTS)
    print("  --seed <seed>       Random seed. Default is %d." %
          conf_mod.DEFAULT_SEED)
    print("Sweep options:")
    print("  --mu-min, --mu-max, --p-min, --p-max <value>")
    print("                      Ranges of the phase sweep.")
    print("  --resolution <num>  Points per axis. Default is %d." %
          conf_mod.DEFAULT_RESOLUTION)
    print("  -w, --workers <num> Worker processes. Default is $%s or %d." %
          (conf_mod.WORKERS_ENV, conf_mod.DEFAULT_WORKERS))
    print("  --boundaries <file> Also write the boundary curves as CSV.")
    print("Sample options:")
    print("  --artifact <file>   Artifact to sample or verify; may also "
          "be given as")
    print("                      the only argument.")
    print("  --r-min, --r-max <radius>")
    print("                      Radial range. Default is [%g, %g]." %
          (conf_mod.DEFAULT_R_MIN, conf_mod.DEFAULT_R_MAX))
    print("  --radii <num>       Number of radii. Default is %d." %
          conf_mod.DEFAULT_RADII)
    print("  --angles <num>      Number of angles. Default is %d." %
          conf_mod.DEFAULT_ANGLES)
    print("General options:")
    print("  -f <conf-file>      Read configuration from <conf-file>.")
    print("  -o <file>           Write output to <file> instead of "
          "stdout.")
    print("  -s                  Enable logging to console (stderr).")
    print("  --log-file <file>   Enable logging to file.")
    print("  -l <level>          Filter log levels below <level>.")
    print("  -v                  Print version information.")
    print("  -h                  Print this text.")


def _int(option, value):
    try:
        return int(value)
    except ValueError:
        raise conf_mod.FormatError("value of %s" % option, value)


def _float(option, value):
    try:
        return float(value)
    except ValueError:
        raise conf_mod.FormatError("value of %s" % option, value)


def _setters(conf):
    problem = conf.problem
    solver = conf.solver
    sweep = conf.sweep
    sample = conf.sample
    return {
        '--n': (_int, problem.set_n),
        '--mu': (_float, problem.set_mu),
        '--p': (_float, problem.set_p),
        '--m': (_int, problem.set_m),
        '--s': (_int, problem.set_s),
        '--gamma': (_float, problem.set_gamma),
        '--kind': (None, problem.set_kind),
        '--branch': (None, problem.set_branch),
        '--count': (_int, problem.set_count),
        '--tol': (_float, solver.set_tol),
        '--starts': (_int, solver.set_starts),
        '--seed': (_int, solver.set_seed),
        '--mu-min': (_float, sweep.set_mu_min),
        '--mu-max': (_float, sweep.set_mu_max),
        '--p-min': (_float, sweep.set_p_min),
        '--p-max': (_float, sweep.set_p_max),
        '--resolution': (_int, sweep.set_resolution),
        '--workers': (_int, sweep.set_workers),
        '-w': (_int, sweep.set_workers),
        '--boundaries': (None, conf.output.set_boundaries),
        '--artifact': (None, sample.set_artifact),
        '--r-min': (_float, sample.set_r_min),
        '--r-max': (_float, sample.set_r_max),
        '--radii': (_int, sample.set_radii),
        '--angles': (_int, sample.set_angles),
        '--log-file': (None, conf.log.set_log_file),
        '-o': (None, conf.output.set_output),
        '-l': (None, conf.log.set_filter)
    }


def apply_options(conf, optlist, args):
    setters = _setters(conf)
    for opt, optval in optlist:
        if opt == '-s':
            conf.log.set_console(True)
        elif opt in setters:
            convert, set_value = setters[opt]
            set_value(optval if convert is None else convert(opt, optval))
    if len(args) > 1:
        raise conf_mod.Error("unexpected arguments: %s" % " ".join(args))
    if len(args) == 1:
        conf.sample.set_artifact(args[0])


def _number(value):
    if value is None:
        return ""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    # shortest representation that reads back to the same double
    return repr(value)


def _csv(header, rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


@contextlib.contextmanager
def _output(filename):
    if filename is None:
        yield sys.stdout
        sys.stdout.flush()
        return
    with open(filename, 'w', newline='') as f:
        yield f


def _emit(text, filename):
    with _output(filename) as out:
        out.write(text)


def _report(conf, command, data):
    data['command'] = command
    _emit(artifact.encode(artifact.document(artifact.ArtifactType.REPORT,
                                            data)), conf.output.output)


def _exponents_json(table):
    return {
        'alpha_plus': artifact.number(table.alpha_plus),
        'alpha_minus': artifact.number(table.alpha_minus),
        'lambda_alpha_plus': artifact.number(
            table.lambda_of(table.alpha_plus)),
        'lambda_alpha_minus': artifact.number(
            table.lambda_of(table.alpha_minus)),
        'p_c': artifact.number(table.p_c),
        'p_ko': artifact.number(table.p_ko),
        'p_c_minus': artifact.number(table.p_c_minus),
        'mu_star': artifact.number(table.mu_star),
        'c_pmu': artifact.number(table.c_pmu)
    }


def _regime_json(params):
    regime = exponents.classify_regime(params)
    return {
        'plus_branch': regime.plus_branch.value,
        'minus_branch': regime.minus_branch.value,
        'strong_singularity_possible': bool(
            regime.strong_singularity_possible),
        'table1_row': regime.table1_row,
        'applicable_theorems': [theorem.value for theorem in
                                regime.applicable_theorems],
        'constant_profile': artifact.number(
            exponents.constant_profile(params))
    }


def cmd_params(conf):
    params = conf.problem.params()
    data = {
        'n': params.n,
        'mu': artifact.number(params.mu),
        'p': artifact.number(params.p),
        'exponents': _exponents_json(exponents.derive_exponents(params))
    }
    if params.p is not None:
        data['regime'] = _regime_json(params)
    _report(conf, 'params', data)
    return EXIT_OK


def cmd_eigs(conf):
    params = conf.problem.params()
    problem = conf.problem
    results = spectra.eigenvalues(
        params.n, params.mu, problem.m, problem.count,
        conf.solver.tolerance(conf_mod.DEFAULT_EIGEN_TOL))
    pairs = [{
        's': result.s,
        'm': result.m,
        'Lambda': artifact.number(result.Lambda_sm),
        'gamma_plus': artifact.number(result.gamma_plus),
        'gamma_minus': artifact.number(result.gamma_minus)
    } for result in results]
    _report(conf, 'eigs', {
        'n': params.n,
        'mu': artifact.number(params.mu),
        'm': problem.m,
        'eigenpairs': pairs
    })
    return EXIT_OK


def cmd_harmonic(conf):
    params = conf.problem.params()
    problem = conf.problem
    if problem.kind is None:
        raise conf_mod.MissingFieldError("problem", "kind")
    kind = spectra.harmonic_kind(problem.kind)
    s = None
    if kind in (spectra.HarmonicKind.SMALL_PLUS,
                spectra.HarmonicKind.SMALL_MINUS):
        s = problem.s
    h = spectra.harmonic(kind, params.n, params.mu, problem.gamma, s,
                         problem.m,
                         conf.solver.tolerance(conf_mod.DEFAULT_EIGEN_TOL))
    with _output(conf.output.output) as out:
        artifact.write(h, out)
    return EXIT_OK


def cmd_profile(conf):
    params = conf.problem.params()
    profile = nonlinear.solve_profile(
        params, conf.problem.branch,
        conf.solver.tolerance(conf_mod.DEFAULT_TOL))
    with _output(conf.output.output) as out:
        artifact.write(profile, out)
    return EXIT_OK


def phase_row(task):
    """Classify one μ row of the sweep; runs in a worker process."""
    n, mu, p_values = task
    rows = []
    for p in p_values:
        regime = exponents.classify_regime(exponents.make_params(n, mu, p))
        row = regime.table1_row
        rows.append([_number(mu), _number(p), regime.plus_branch.value,
                     regime.minus_branch.value,
                     "" if row is None else "%d" % row])
    return rows


def _boundary_rows(n, mu_values):
    rows = []
    for mu in mu_values:
        table = exponents.derive_exponents(exponents.make_params(n, mu))
        rows.append([_number(mu), _number(table.p_c), _number(table.p_ko),
                     _number(table.p_c_minus), _number(table.mu_star)])
    return rows


def cmd_phase(conf):
    problem = conf.problem
    sweep = conf.sweep
    if problem.n is None:
        raise conf_mod.MissingFieldError("problem", "n")
    (mu_min, mu_max), (p_min, p_max) = sweep.ranges()
    mu_values = np.linspace(mu_min, mu_max, sweep.resolution)
    p_values = np.linspace(p_min, p_max, sweep.resolution)
    tasks = [(problem.n, float(mu), p_values) for mu in mu_values]
    workers = sweep.worker_count()

    info("Sweeping %d x %d points with %d worker(s)." %
         (len(mu_values), len(p_values), workers), LogCategory.CORE)

    if workers == 1:
        results = [phase_row(task) for task in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(workers) as executor:
            # map() yields in submission order
            results = list(executor.map(phase_row, tasks))

    rows = [row for result in results for row in result]
    _emit(_csv(['mu', 'p', 'plus_branch', 'minus_branch', 'table1_row'],
               rows), conf.output.output)

    if conf.output.boundaries is not None:
        _emit(_csv(['mu', 'p_c', 'p_ko', 'p_c_minus', 'mu_star'],
                   _boundary_rows(problem.n, mu_values)),
              conf.output.boundaries)
    return EXIT_OK


def _load(conf):
    obj = artifact.load(conf.sample.artifact_file())
    debug("loaded %s from '%s'" % (type(obj).__name__, conf.sample.artifact),
          LogCategory.CORE)
    return obj


def polar_points(n, r_min, r_max, radii, angles):
    """Points of the upper quarter plane of (x₁, x₂), ordered by radius
    and then by angle from the x₁-axis."""
    if r_min > r_max:
        raise conf_mod.Error("empty radial range [%g, %g]" % (r_min, r_max))
    r = np.geomspace(r_min, r_max, radii)
    theta = (np.arange(angles) + 0.5) * np.pi / (2 * angles)
    x = np.zeros((radii, angles, n))
    x[..., 0] = r[:, None] * np.cos(theta)[None, :]
    x[..., 1] = r[:, None] * np.sin(theta)[None, :]
    return x.reshape(-1, n)


def cmd_sample(conf):
    u = _load(conf).sampler()
    sample = conf.sample
    x = polar_points(u.n, sample.r_min, sample.r_max, sample.radii,
                     sample.angles)
    values = u(x)
    b = u.boundary_exponent
    r = np.linalg.norm(x, axis=-1)
    envelope = x[:, 0] ** b * r ** (u.radial_exponent - b)
    ratio = values / envelope
    rows = [[_number(point[0]), _number(np.linalg.norm(point[1:])),
             _number(value), _number(q)]
            for point, value, q in zip(x, values, ratio)]
    _emit(_csv(['x1', 'x_prime', 'value', 'envelope_ratio'], rows),
          conf.output.output)
    return EXIT_OK


def _check(name, value, limit, passed=None, **details):
    if passed is None:
        passed = bool(np.isfinite(value) and value <= limit)
    check = {
        'name': name,
        'value': artifact.number(value),
        'limit': artifact.number(limit),
        'passed': bool(passed)
    }
    check.update(details)
    return check


def _residual_check(u, rng, limit):
    points = verify.random_points(u.n, VERIFY_POINTS, rng)
    return _check('pde_residual', verify.max_residual(u, points), limit,
                  points=VERIFY_POINTS)


def _pl_check(u):
    verdict = verify.phragmen_lindelof_check(u)
    # the principle is refuted only by hypotheses that hold without the
    # conclusion
    consistent = verdict.conclusion_holds or not verdict.hypotheses_hold
    return _check('phragmen_lindelof', None, None, consistent,
                  hypothesis_a=verdict.hypothesis_a,
                  hypothesis_b=verdict.hypothesis_b,
                  hypotheses_hold=verdict.hypotheses_hold,
                  conclusion_holds=verdict.conclusion_holds,
                  inconclusive=verdict.inconclusive)


def _harmonic_checks(h, rng):
    u = h.sampler()
    checks = []
    if h.positive:
        checks.append(_residual_check(u, rng, HARMONIC_RESIDUAL_LIMIT))
    grid = mesh.verification_grid(VERIFY_POINTS)
    residual = angular_ode.ode_residual(h.angular, grid)
    checks.append(_check('angular_residual', float(np.max(residual)),
                         ANGULAR_RESIDUAL_LIMIT))
    if h.kind in (spectra.HarmonicKind.GAMMA, spectra.HarmonicKind.PLUS) \
       and h.positive:
        bound = spectra.verify_growth_bounds(h, h.gamma)
        checks.append(_check('growth_bound', bound.c_best, None,
                             bound.passed, sup=artifact.number(bound.sup),
                             inf=artifact.number(bound.inf)))
    if h.positive:
        checks.append(_pl_check(u))
    return checks


def _profile_checks(profile, conf, rng):
    n, mu, p = profile.params
    u = profile.sampler()
    checks = [_residual_check(u, rng, PROFILE_RESIDUAL_LIMIT)]

    residual = nonlinear.profile_residual(profile, mesh.verification_grid())
    checks.append(_check('profile_residual', float(np.max(residual)),
                         nonlinear.DEFAULT_TOL))

    points = verify.random_points(n, VERIFY_SCALE_POINTS, rng)
    checks.append(_check('scaling', verify.scaling_check(u, p, VERIFY_SCALE,
                                                         points),
                         SCALING_LIMIT, a=VERIFY_SCALE))

    report = verify.ko_bound_check(u, n, mu, p, KO_RADIUS)
    checks.append(_check('ko_bound', report.constant_found, report.bound,
                         report.passed, grid=report.grid_spec,
                         boundary_trend=report.boundary_trend.value,
                         worst_point=[artifact.number(c) for c in
                                      report.worst_point]))

    if profile.branch == exponents.Branch.PLUS:
        checks.append(_check('integral_identity',
                             nonlinear.integral_identity_check(profile),
                             IDENTITY_LIMIT))
        try:
            uniqueness = nonlinear.check_uniqueness_plus(
                profile.params, conf.solver.starts, UNIQUENESS_LIMIT, rng)
            deviation = uniqueness.max_deviation
            w_zero_positive = uniqueness.w_zero_positive
        except nonlinear.NonUniqueLimit as e:
            deviation = e.report.max_deviation
            w_zero_positive = e.report.w_zero_positive
        checks.append(_check('uniqueness', deviation, UNIQUENESS_LIMIT,
                             starts=conf.solver.starts))
        checks.append(_check('w_zero_positive', profile.v_limit, None,
                             w_zero_positive))
    return checks


def cmd_verify(conf):
    obj = _load(conf)
    rng = np.random.default_rng(conf.solver.seed)
    if isinstance(obj, spectra.SeparableHarmonic):
        checks = _harmonic_checks(obj, rng)
    else:
        checks = _profile_checks(obj, conf, rng)

    failed = [check['name'] for check in checks if not check['passed']]
    _report(conf, 'verify', {
        'artifact': conf.sample.artifact,
        'seed': conf.solver.seed,
        'checks': checks,
        'failed': failed,
        'passed': len(failed) == 0
    })
    if failed:
        info("Failed checks: %s." % ", ".join(failed), LogCategory.VERIFY)
        return EXIT_CHECK_FAILED
    return EXIT_OK


HANDLERS = {
    'params': cmd_params,
    'eigs': cmd_eigs,
    'harmonic': cmd_harmonic,
    'profile': cmd_profile,
    'phase': cmd_phase,
    'sample': cmd_sample,
    'verify': cmd_verify
}


INPUT_ERRORS = (conf_mod.Error, exponents.ParameterError,
                spectra.GammaOutOfRange, artifact.Error, OSError)

SOLVER_ERRORS = (angular_ode.Error, spectra.Error, nonlinear.Error,
                 verify.Error)


def run(command, conf):
    """Execute one command and return its exit code."""
    info("hardy %s %s started with configuration: %s" %
         (artifact.VERSION, command, conf), LogCategory.CORE)
    try:
        return HANDLERS[command](conf)
    except INPUT_ERRORS as e:
        print("Error: %s." % e, file=sys.stderr)
        return EXIT_INPUT
    except SOLVER_ERRORS as e:
        print("Error: %s." % e, file=sys.stderr)
        return EXIT_SOLVER
    except Exception as e:
        # numpy and scipy failures outside the solvers' own checks
        exception("Terminating due to exception.")
        print("Error: %s." % e, file=sys.stderr)
        return EXIT_SOLVER


def main(argv):
    if len(argv) < 2:
        usage(argv[0])
        return EXIT_INPUT
    if argv[1] == '-v':
        print("hardy version: %s" % artifact.VERSION)
        print("Artifact format version: %d" % artifact.FORMAT_VERSION)
        return EXIT_OK
    if argv[1] == '-h':
        usage(argv[0])
        return EXIT_OK

    command = argv[1]
    if command not in COMMANDS:
        print("Error: unknown command '%s'." % command, file=sys.stderr)
        return EXIT_INPUT

    try:
        optlist, args = getopt.getopt(argv[2:], SHORT_OPTIONS, LONG_OPTIONS)
    except getopt.GetoptError as e:
        print("Error parsing command line: %s." % e, file=sys.stderr)
        return EXIT_INPUT

    for opt, optval in optlist:
        if opt == '-h':
            usage(argv[0])
            return EXIT_OK
        if opt == '-v':
            print("hardy version: %s" % artifact.VERSION)
            return EXIT_OK

    conf_filename = None
    for opt, optval in optlist:
        if opt == '-f':
            conf_filename = optval
    try:
        if conf_filename is None:
            conf = conf_mod.default()
        else:
            conf = conf_mod.load(conf_filename)
        apply_options(conf, optlist, args)
    except (OSError, conf_mod.Error) as e:
        print("Error reading configuration: %s." % e, file=sys.stderr)
        return EXIT_INPUT

    try:
        hardy.logging.configure(conf.log.console, conf.log.log_file,
                                conf.log.log_file_backup,
                                conf.log.log_file_max_size, conf.log.filter)
    except Exception as e:
        print("Error configuring logging: %s." % e, file=sys.stderr)
        return EXIT_INPUT

    return run(command, conf)


if __name__ == "__main__":
    sys.exit(main(sys.argv))
