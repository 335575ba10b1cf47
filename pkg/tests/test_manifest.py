import pytest
import sympy
from coqe.checks import CHECKS
from coqe.exceptions import ManifestError
from coqe.fixtures import FIXTURE_NAMES
from coqe.manifest import (
    dump_manifest,
    load_manifest,
    loads_manifest,
    parse_plane,
    parse_sample_point,
    validate_checks,
)

MINIMAL = '''
name: tiny
chart:
  coords: [x, y]
metric:
  "1,1": 1
  "2,2": 1
'''


@pytest.mark.parametrize('name', FIXTURE_NAMES)
def test_fixtures_load(name):
    m = load_manifest(name)
    assert m.name == name
    assert m.checks
    assert m.metric.dim == m.chart.dim


def test_godel_blocks(godel, k):
    assert godel.chart.sample['k'] == 2
    assert godel.structure.declared_r == -1 / k**2
    assert godel.structure.b[2, 3] == godel.structure.b[3, 2]
    assert godel.constants.Lambda == 1 / (2 * k**2)
    assert set(godel.vectors) == {'U', 'dt', 'dy', 'dz', 'dilation'}
    assert godel.expected['class'] == 'comprehensive QE'
    assert (0, 0, 1) in godel.expected['christoffel']


class TestUse:

    def test_inherits_blocks(self):
        m = loads_manifest('use: godel\nname: mine\nchecks: [classify]\n')
        assert m.name == 'mine'
        assert m.checks == ['classify']
        assert m.structure is not None
        assert m.chart.coords[0].name == 't'

    def test_sample_merges(self):
        m = loads_manifest('use: godel\nchart:\n  sample: {k: 3}\n')
        assert m.chart.sample['k'] == 3
        assert m.chart.dim == 4

    def test_unknown_fixture(self):
        with pytest.raises(ManifestError, match='unknown fixture'):
            loads_manifest('use: no-such-fixture\n')


class TestInvalid:

    def test_duplicate_key(self):
        text = MINIMAL + '  "1,1": 2\n'
        with pytest.raises(ManifestError, match='duplicate'):
            loads_manifest(text)

    def test_duplicate_symmetric_entry(self):
        text = MINIMAL + '  "1,2": 0\n  "2,1": 0\n'
        with pytest.raises(ManifestError):
            loads_manifest(text)

    def test_lower_triangle_metric_key(self):
        with pytest.raises(ManifestError, match='give component'):
            loads_manifest(MINIMAL + '  "2,1": 0\n')

    def test_out_of_range(self):
        with pytest.raises(ManifestError, match='out of range'):
            loads_manifest(MINIMAL + '  "3,3": 1\n')

    def test_unknown_block(self):
        with pytest.raises(ManifestError, match='unknown blocks'):
            loads_manifest(MINIMAL + 'extra: 1\n')

    def test_unknown_check(self):
        with pytest.raises(ManifestError) as info:
            loads_manifest(MINIMAL + 'checks: [curvature, nope]\n')
        assert 'nope' in str(info.value)
        assert 'coqe-verify' in str(info.value)

    def test_invalid_yaml(self):
        with pytest.raises(ManifestError, match='invalid YAML'):
            loads_manifest('chart: [x\n')

    def test_not_a_mapping(self):
        with pytest.raises(ManifestError):
            loads_manifest('- x\n')

    def test_bad_expression(self):
        with pytest.raises(ManifestError) as info:
            loads_manifest(MINIMAL.replace('"2,2": 1', '"2,2": foo(x)'))
        assert 'metric' in str(info.value)

    def test_missing_metric(self):
        with pytest.raises(ManifestError, match='missing block'):
            loads_manifest('chart:\n  coords: [x, y]\n')

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError, match='no such manifest'):
            load_manifest(tmp_path / 'absent.yaml')

    @pytest.mark.parametrize('text', [
        'use: godel\nstructure:\n  b: [1, 2]\n',
        'use: godel\nexpected:\n  christoffel: 1\n',
        'use: godel\nexpected:\n  ricci: [1]\n',
        'use: godel\nexpected:\n  character: x\n',
        'use: godel\nexpected:\n  killing: 3\n',
        MINIMAL.replace('coords: [x, y]', 'coords: [x, y]\n  sample: 2'),
    ])
    def test_block_of_wrong_type(self, text):
        with pytest.raises(ManifestError, match='expected a'):
            loads_manifest(text)

    def test_zero_kappa(self):
        with pytest.raises(ManifestError):
            loads_manifest('use: godel\nconstants: {kappa: 0}\n')


def test_all_alias_skips_heavy():
    names = validate_checks(['all'], 'checks')
    assert 'cotton' not in names
    assert 'coqe-verify' in names
    assert len(names) == sum(not c.heavy for c in CHECKS.values())
    assert validate_checks(['cotton', 'cotton'], 'checks') == ['cotton']


class TestCommandLineValues:

    def test_sample_point(self):
        assert parse_sample_point('x=1/3, k=2') == {'x': '1/3', 'k': '2'}
        assert parse_sample_point('') == {}

    @pytest.mark.parametrize('text', ['x', 'x=', '=1', 'x=pi'])
    def test_bad_sample_point(self, text):
        with pytest.raises(ManifestError):
            parse_sample_point(text)

    def test_plane(self, godel):
        X, Y = parse_plane(godel, '1,0,0,0;dy')
        assert list(X.components) == [1, 0, 0, 0]
        assert Y is godel.vectors['dy']
        assert parse_plane(godel, None) is None
        with pytest.raises(ManifestError):
            parse_plane(godel, '1,0,0,0')
        with pytest.raises(ManifestError):
            parse_plane(godel, '1,0;0,1')


def test_sample_override():
    m = load_manifest('godel', {'x': '1/2'})
    assert m.chart.sample['x'] == sympy.Rational(1, 2)
    assert m.chart.sample['k'] == 2


def test_dump_and_load(tmp_path, godel):
    path = tmp_path / 'godel.yaml'
    path.write_text(dump_manifest(godel))
    m = load_manifest(path)
    assert m.name == 'godel'
    assert m.checks == godel.checks
    assert m.chart.sample == godel.chart.sample
    assert m.structure.a == godel.structure.a
