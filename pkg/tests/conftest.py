import pytest
import sympy
from coqe.geometry import CurvatureBundle
from coqe.manifest import load_manifest
from coqe.quasi_einstein import CoQEStructure
from coqe.tensor import COV, Chart, Metric, OneForm, Tensor


def coordinate_structure(chart: Chart, a=1, b=None, c1=0, c2=0):
    """Structure on the coordinate coframe with vanishing d1, d2."""
    n = chart.dim
    forms = tuple(
        OneForm(chart, [int(i == k) for i in range(n)]) for k in range(4))
    zero = Tensor.zeros(chart, (COV, COV))
    return CoQEStructure(
        sympy.sympify(a),
        sympy.ImmutableMatrix(b if b is not None else sympy.zeros(4, 4)),
        sympy.sympify(c1), sympy.sympify(c2), forms, zero, zero)


def euclidean(n: int = 4) -> Metric:
    chart = Chart([f'x{i}' for i in range(1, n + 1)])
    return Metric(chart, sympy.eye(n).tolist())


@pytest.fixture(scope='session')
def godel():
    return load_manifest('godel')


@pytest.fixture(scope='session')
def godel_bundle(godel):
    return CurvatureBundle(godel.metric)


@pytest.fixture(scope='session')
def k(godel):
    return godel.chart.symbols['k']


@pytest.fixture(scope='session')
def x(godel):
    return godel.chart.symbols['x']


@pytest.fixture(scope='session')
def flat4():
    return euclidean(4)


@pytest.fixture(scope='session')
def flat4_bundle(flat4):
    return CurvatureBundle(flat4)


@pytest.fixture(scope='session')
def minkowski():
    return load_manifest('flat-minkowski')


@pytest.fixture(scope='session')
def sphere2():
    return load_manifest('round-sphere-2')


@pytest.fixture(scope='session')
def sphere2_bundle(sphere2):
    return CurvatureBundle(sphere2.metric)


@pytest.fixture(scope='session')
def sphere4():
    return load_manifest('round-sphere-4')


@pytest.fixture(scope='session')
def sphere4_bundle(sphere4):
    return CurvatureBundle(sphere4.metric)


@pytest.fixture(scope='session')
def eds():
    return load_manifest('einstein-desitter')


@pytest.fixture(scope='session')
def eds_bundle(eds):
    return CurvatureBundle(eds.metric)
