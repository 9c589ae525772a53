# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

import csv
import json

import pytest
import yaml

import hardy.artifact as artifact
import hardy.cli as cli


def run(*args):
    return cli.main(['hardy'] + [str(arg) for arg in args])


def report(capsys):
    root = json.loads(capsys.readouterr().out)
    assert root['format'] == artifact.FORMAT_NAME
    assert root['type'] == artifact.ArtifactType.REPORT.value
    return root['data']


def read_csv(filename):
    with open(filename, newline='') as f:
        return list(csv.reader(f))


def write_harmonic(tmp_path, name, *args):
    filename = str(tmp_path / name)
    assert run('harmonic', '-o', filename, *args) == cli.EXIT_OK
    return filename


@pytest.mark.fast
def test_usage(capsys):
    assert run() == cli.EXIT_INPUT
    assert "Usage:" in capsys.readouterr().out
    assert run('-h') == cli.EXIT_OK
    assert "Commands:" in capsys.readouterr().out
    assert run('params', '-h') == cli.EXIT_OK


@pytest.mark.fast
def test_version(capsys):
    assert run('-v') == cli.EXIT_OK
    assert artifact.VERSION in capsys.readouterr().out


@pytest.mark.fast
def test_input_errors():
    assert run('solve') == cli.EXIT_INPUT
    assert run('params', '--n') == cli.EXIT_INPUT
    assert run('params', '--dimension', '3') == cli.EXIT_INPUT
    assert run('params', '--n', 'three', '--mu', 0) == cli.EXIT_INPUT
    assert run('params', '--n', 3) == cli.EXIT_INPUT
    assert run('params', '--n', 3, '--mu', 0.3) == cli.EXIT_INPUT
    assert run('params', '--n', 3, '--mu', 0, 'a', 'b') == cli.EXIT_INPUT
    assert run('params', '-f', '/nonexistent/hardy.yaml') == cli.EXIT_INPUT


@pytest.mark.fast
def test_params(capsys):
    assert run('params', '--n', 3, '--mu', -2, '--p', 4) == cli.EXIT_OK
    data = report(capsys)
    assert data['command'] == 'params'
    assert data['n'] == 3
    table = data['exponents']
    assert table['alpha_plus'] == pytest.approx(2)
    assert table['alpha_minus'] == pytest.approx(-1)
    assert table['p_ko'] == pytest.approx(3)
    assert table['mu_star'] == pytest.approx(-0.75)
    regime = data['regime']
    assert regime['minus_branch'] == 'nonexistent_KO'
    assert regime['plus_branch'] == 'nonexistent'
    assert not regime['strong_singularity_possible']
    assert 'minus_nonexistence_ko' in regime['applicable_theorems']


@pytest.mark.fast
def test_params_without_p(capsys):
    assert run('params', '--n', 2, '--mu', 0) == cli.EXIT_OK
    data = report(capsys)
    assert data['p'] is None
    assert 'regime' not in data
    assert data['exponents']['alpha_plus'] == 1
    assert data['exponents']['alpha_minus'] == 0
    # no negative α₋, so no Keller-Osserman threshold
    assert data['exponents']['p_ko'] == "inf"


@pytest.mark.fast
def test_params_from_conf_file(tmp_path, capsys):
    conf_file = tmp_path / "hardy.yaml"
    with open(conf_file, 'w') as f:
        yaml.dump({"problem": {"n": 3, "mu": 0.0, "p": 2.0}}, f)
    assert run('params', '-f', str(conf_file), '--p', 1.5) == cli.EXIT_OK
    data = report(capsys)
    assert data['p'] == 1.5
    assert data['regime']['plus_branch'] == 'exists_unique'
    assert data['regime']['table1_row'] == 3


@pytest.mark.fast
def test_params_output_is_deterministic(tmp_path):
    outputs = []
    for name in ("first.json", "second.json"):
        filename = tmp_path / name
        assert run('params', '--n', 4, '--mu', -1, '--p', 2.5,
                   '-o', str(filename)) == cli.EXIT_OK
        outputs.append(filename.read_bytes())
    assert outputs[0] == outputs[1]


def test_eigs(capsys):
    assert run('eigs', '--n', 2, '--mu', 0, '--count', 2) == cli.EXIT_OK
    data = report(capsys)
    assert [pair['s'] for pair in data['eigenpairs']] == [1, 2]
    assert [pair['Lambda'] for pair in data['eigenpairs']] == \
        pytest.approx([1, 9], rel=1e-7)


@pytest.mark.fast
def test_phase(tmp_path):
    output = tmp_path / "phase.csv"
    boundaries = tmp_path / "boundaries.csv"
    assert run('phase', '--n', 3, '--mu-min', -2, '--mu-max', 0,
               '--p-min', 2, '--p-max', 4, '--resolution', 3,
               '-o', str(output), '--boundaries', str(boundaries)) == \
        cli.EXIT_OK

    rows = read_csv(output)
    assert rows[0] == ['mu', 'p', 'plus_branch', 'minus_branch',
                       'table1_row']
    assert len(rows) == 1 + 9
    assert ['-2.0', '3.0', 'nonexistent', 'critical', ''] in rows
    assert ['-2.0', '4.0', 'nonexistent', 'nonexistent_KO', ''] in rows

    rows = read_csv(boundaries)
    assert rows[0] == ['mu', 'p_c', 'p_ko', 'p_c_minus', 'mu_star']
    assert len(rows) == 1 + 3
    assert rows[1][0] == '-2.0'
    assert float(rows[1][2]) == 3
    assert rows[3][2] == 'inf'


def test_phase_workers_agree(tmp_path):
    outputs = []
    for workers in (1, 2):
        output = tmp_path / ("phase-%d.csv" % workers)
        assert run('phase', '--n', 4, '--mu-min', -3, '--mu-max', 0.2,
                   '--p-min', 1.1, '--p-max', 5, '--resolution', 7,
                   '-w', workers, '-o', str(output)) == cli.EXIT_OK
        outputs.append(output.read_bytes())
    assert outputs[0] == outputs[1]


@pytest.mark.fast
def test_phase_invalid_range():
    assert run('phase', '--n', 3, '--mu-min', 0, '--mu-max', -1,
               '--p-min', 2, '--p-max', 4) == cli.EXIT_INPUT
    assert run('phase', '--mu-min', -1, '--mu-max', 0,
               '--p-min', 2, '--p-max', 4) == cli.EXIT_INPUT


@pytest.mark.fast
def test_harmonic_sample(tmp_path):
    filename = write_harmonic(tmp_path, "h.json", '--n', 3, '--mu', -1,
                              '--kind', 'h_plus')
    output = tmp_path / "sample.csv"
    assert run('sample', '--artifact', filename, '--radii', 3, '--angles', 5,
               '-o', str(output)) == cli.EXIT_OK
    rows = read_csv(output)
    assert rows[0] == ['x1', 'x_prime', 'value', 'envelope_ratio']
    assert len(rows) == 1 + 15
    for row in rows[1:]:
        assert float(row[0]) > 0
        assert float(row[2]) > 0
        assert float(row[3]) == pytest.approx(1, rel=1e-12)


@pytest.mark.fast
def test_harmonic_is_deterministic(tmp_path):
    first = write_harmonic(tmp_path, "first.json", '--n', 4, '--mu', -1,
                           '--kind', 'h_minus')
    second = write_harmonic(tmp_path, "second.json", '--n', 4, '--mu', -1,
                            '--kind', 'h_minus')
    with open(first, 'rb') as f, open(second, 'rb') as g:
        assert f.read() == g.read()
    with open(first) as f:
        assert f.read() == artifact.encode(artifact.dump(artifact.load(first)))


@pytest.mark.fast
def test_harmonic_input_errors():
    assert run('harmonic', '--n', 3, '--mu', -1) == cli.EXIT_INPUT
    assert run('harmonic', '--n', 3, '--mu', -1, '--kind', 'H_delta') == \
        cli.EXIT_INPUT
    assert run('harmonic', '--n', 3, '--mu', -1, '--kind', 'H_gamma',
               '--gamma', 5) == cli.EXIT_INPUT


@pytest.mark.fast
def test_verify_harmonic(tmp_path, capsys):
    filename = write_harmonic(tmp_path, "h.json", '--n', 3, '--mu', -1,
                              '--kind', 'h_plus')
    capsys.readouterr()
    assert run('verify', filename) == cli.EXIT_OK
    data = report(capsys)
    assert data['passed']
    assert data['failed'] == []
    assert data['seed'] == 4711
    names = [check['name'] for check in data['checks']]
    assert names == ['pde_residual', 'angular_residual', 'phragmen_lindelof']


def test_verify_h_gamma(tmp_path, capsys):
    filename = write_harmonic(tmp_path, "h.json", '--n', 3, '--mu', -1,
                              '--kind', 'H_gamma', '--gamma', 0.3)
    capsys.readouterr()
    assert run('verify', '--artifact', filename) == cli.EXIT_OK
    data = report(capsys)
    assert 'growth_bound' in [check['name'] for check in data['checks']]


@pytest.mark.fast
def test_verify_detects_tampering(tmp_path, capsys):
    filename = write_harmonic(tmp_path, "h.json", '--n', 3, '--mu', -1,
                              '--kind', 'h_plus')
    with open(filename) as f:
        root = json.load(f)
    root['data']['gamma'] += 0.5
    with open(filename, 'w') as f:
        json.dump(root, f)
    capsys.readouterr()
    assert run('verify', filename) == cli.EXIT_CHECK_FAILED
    data = report(capsys)
    assert not data['passed']
    assert 'pde_residual' in data['failed']


@pytest.mark.fast
def test_missing_artifact(tmp_path):
    assert run('verify') == cli.EXIT_INPUT
    assert run('verify', str(tmp_path / "missing.json")) == cli.EXIT_INPUT
    assert run('sample', '--artifact', str(tmp_path / "missing.json")) == \
        cli.EXIT_INPUT
    broken = tmp_path / "broken.json"
    broken.write_text("{\"format\": \"other\"}")
    assert run('sample', str(broken)) == cli.EXIT_INPUT


@pytest.mark.fast
def test_profile_without_bracket():
    # p above p_c leaves the plus branch without positive solutions
    assert run('profile', '--n', 3, '--mu', 0, '--p', 2.5,
               '--branch', 'plus') == cli.EXIT_SOLVER
    assert run('profile', '--n', 3, '--mu', 0) == cli.EXIT_INPUT


@pytest.mark.slow
def test_constant_profile_sample(tmp_path):
    filename = str(tmp_path / "u.json")
    assert run('profile', '--n', 3, '--mu', 0, '--p', 2, '--branch', 'minus',
               '-o', filename) == cli.EXIT_OK
    output = tmp_path / "sample.csv"
    assert run('sample', '-o', str(output), filename) == cli.EXIT_OK
    rows = read_csv(output)
    assert len(rows) == 1 + 32
    for row in rows[1:]:
        x1, x_prime, value = (float(v) for v in row[:3])
        assert value * (x1 ** 2 + x_prime ** 2) == pytest.approx(2, rel=1e-6)


@pytest.mark.slow
def test_verify_profile(tmp_path, capsys):
    filename = str(tmp_path / "u.json")
    assert run('profile', '--n', 3, '--mu', 0, '--p', 1.5, '-o',
               filename) == cli.EXIT_OK
    status = run('verify', '--starts', 3, filename)
    assert status in (cli.EXIT_OK, cli.EXIT_CHECK_FAILED)
    data = report(capsys)
    assert data['passed'] == (status == cli.EXIT_OK)
    checks = {check['name']: check for check in data['checks']}
    assert list(checks) == ['pde_residual', 'profile_residual', 'scaling',
                            'ko_bound', 'integral_identity', 'uniqueness',
                            'w_zero_positive']
    for name in ('profile_residual', 'scaling', 'ko_bound',
                 'integral_identity', 'w_zero_positive'):
        assert checks[name]['passed']
