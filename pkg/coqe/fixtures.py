"""Bundled manifests and generated test metrics."""
import itertools
import numpy as np
import sympy
from pathlib import Path
from typing import Optional, Sequence
from .tensor import Chart, Metric

FIXTURES_DIR = Path(__file__).parent / 'manifests'

FIXTURE_NAMES = (
    'godel',
    'flat-euclidean',
    'flat-minkowski',
    'round-sphere-2',
    'round-sphere-4',
    'einstein-desitter',
    'polynomial-random-template',
)


def fixture_path(name: str) -> Optional[Path]:
    path = FIXTURES_DIR / f'{name}.yaml'
    return path if path.is_file() else None


def _monomials(coords: Sequence[sympy.Symbol], degree: int):
    for d in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(coords, d):
            yield sympy.Mul(*combo)


def random_polynomial_metric(
        chart: Chart,
        seed: int = 42,
        degree: int = 1,
        signature: Optional[Sequence[int]] = None,
        off_diagonal: bool = False) -> Metric:
    """Seeded metric with polynomial components in the chart coordinates.

    Diagonal entries are ±(2 + small polynomial); off-diagonal entries, when
    requested, are small polynomials. Coefficients are rationals in
    [-1/4, 1/4], so the metric stays non-degenerate near the sample point.
    The metric does not simplify its derived objects.
    """
    rng = np.random.default_rng(seed)
    n = chart.dim
    signs = list(signature) if signature is not None else [1] * n
    if len(signs) != n:
        raise ValueError(f'signature needs {n} entries, got {len(signs)}')
    monomials = list(_monomials(chart.coords, degree))

    def poly() -> sympy.Expr:
        return sympy.Add(*(
            sympy.Rational(int(rng.integers(-3, 4)), 12) * m
            for m in monomials))

    comps = [[sympy.Integer(0)] * n for _ in range(n)]
    for i in range(n):
        comps[i][i] = signs[i] * (2 + poly())
    if off_diagonal:
        for i, j in itertools.combinations(range(n), 2):
            comps[i][j] = comps[j][i] = poly() / 4
    return Metric(chart, comps, simplify=False)
