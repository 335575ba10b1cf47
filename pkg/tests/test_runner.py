import pytest
from coqe.exceptions import ManifestError
from coqe.manifest import load_manifest, loads_manifest
from coqe.report import EXIT_FAIL, EXIT_OK
from coqe.runner import run_checks
from coqe.verdict import Verdict

PASS, FLAGGED, FAIL = Verdict.PASS, Verdict.FLAGGED, Verdict.FAIL

GODEL_WITHOUT_B34 = '''
use: godel
name: godel-without-b34
structure:
  b:
    "1,1": -1/k^2
    "2,2": -3/(2*k^2)
    "3,3": 3/k^2
    "4,4": 5/(2*k^2)
    "2,3": sqrt(2)/k^2
checks: [coqe-verify, classify]
'''


def verdicts(report) -> dict:
    return {c.name: c.verdict for c in report.checks}


@pytest.fixture(scope='module')
def godel_report():
    return run_checks(load_manifest('godel'))


def test_godel(godel_report):
    got = verdicts(godel_report)
    assert got['curvature'] is FLAGGED
    assert got['coqe-verify'] is PASS
    assert got['classify'] is PASS
    assert got['trace-identity'] is FLAGGED
    assert got['constraints'] is FLAGGED
    assert got['fluid'] is FLAGGED
    assert got['fit'] is FLAGGED
    for name in ('riemann-symmetries', 'bianchi', 'killing'):
        assert got[name] is PASS, name
    assert FAIL not in got.values()
    assert godel_report.exit_code == EXIT_OK


def test_godel_notes(godel_report):
    checks = {c.name: c for c in godel_report.checks}
    assert 'class: comprehensive QE' in checks['classify'].notes
    assert 'declared scalar curvature' in checks['curvature'].error
    assert any('omega_r(W_r) = -1: 2' == n for n in checks['fluid'].notes)


def test_dropping_b34_fails():
    report = run_checks(loads_manifest(GODEL_WITHOUT_B34))
    got = verdicts(report)
    assert got == {'coqe-verify': FAIL, 'classify': FAIL}
    verify = report.checks[0]
    assert {'indices': [1, 3], 'expr': '2*exp(x)'} in verify.residuals
    assert report.exit_code == EXIT_FAIL


def test_request_order_is_kept(godel):
    report = run_checks(godel, ['classify', 'curvature'])
    assert [c.name for c in report.checks] == ['classify', 'curvature']


def test_unknown_check_name(godel):
    with pytest.raises(ManifestError):
        run_checks(godel, ['nope'])


def test_library_errors_become_failures(sphere2):
    report = run_checks(sphere2, ['weyl', 'qcc', 'sectional'])
    got = verdicts(report)
    assert got == {'weyl': FAIL, 'qcc': FAIL, 'sectional': PASS}
    weyl = report.checks[0]
    assert 'dimension' in weyl.error
    assert report.checks[1].error == 'manifest has no qcc block'


@pytest.mark.parametrize('name, expected', [
    ('flat-euclidean', {}),
    ('flat-minkowski', {}),
    ('round-sphere-2', {}),
    ('round-sphere-4', {}),
    ('einstein-desitter', {'trace-identity': FLAGGED}),
    ('polynomial-random-template', {}),
])
def test_fixture_verdicts(name, expected):
    m = load_manifest(name)
    report = run_checks(m)
    want = {n: expected.get(n, PASS) for n in m.checks}
    assert verdicts(report) == want
    assert report.exit_code == EXIT_OK


def test_seed_is_threaded(godel):
    a = run_checks(godel, ['trace-identity'], seed=1)
    b = run_checks(godel, ['trace-identity'], seed=2)
    assert a.checks[0].verdict is b.checks[0].verdict is FLAGGED


def test_vector_fields_report_ricci_conditions(godel):
    report = run_checks(godel, ['vector-fields'])
    check, = report.checks
    assert check.verdict is PASS
    assert 'Ricci tensor: not Codazzi, cyclic parallel' in check.notes


def test_cotton_reports_harmonic_weyl(godel):
    check, = run_checks(godel, ['cotton']).checks
    assert check.verdict is PASS
    assert 'Weyl tensor not harmonic' in check.notes
