"""Coordinate charts and variance-tagged tensors of symbolic components."""
from __future__ import annotations
import itertools
import logging
import numpy as np
import sympy
from functools import cached_property
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence
from . import symexpr
from .exceptions import (
    AsymmetricTensor,
    DimensionError,
    GeometryError,
    NonInvertibleMetric,
)

COV, CON = 'cov', 'con'

DEFAULT_COORD_SAMPLE = sympy.Rational(1, 3)
DEFAULT_PARAM_SAMPLE = sympy.Integer(2)


class Chart:
    """Coordinate chart: coordinate symbols, parameter symbols with their
    assumptions, and the sample point used to certify invertibility and
    signature.
    """

    def __init__(
            self,
            coords: Sequence[str],
            params: Optional[Mapping[str, Mapping[str, bool]]] = None,
            sample: Optional[Mapping[str, Any]] = None):
        if len(coords) < 2:
            raise DimensionError(
                f'a chart needs at least 2 coordinates, got {len(coords)}')
        if len(set(coords)) != len(coords):
            raise GeometryError(f'coordinate names not distinct: {coords}')
        params = params or {}
        clash = set(coords) & set(params)
        if clash:
            raise GeometryError(
                f'names used both as coordinate and parameter: '
                f'{sorted(clash)}')

        self.coords: tuple[sympy.Symbol, ...] = tuple(
            sympy.Symbol(name, real=True) for name in coords)
        self.params: tuple[sympy.Symbol, ...] = tuple(
            sympy.Symbol(
                name,
                real=True,
                nonzero=flags.get('nonzero') or None,
                positive=flags.get('positive') or None)
            for name, flags in params.items())

        point = {s.name: DEFAULT_COORD_SAMPLE for s in self.coords}
        point.update({s.name: DEFAULT_PARAM_SAMPLE for s in self.params})
        for name, value in (sample or {}).items():
            if name not in point:
                raise GeometryError(f'sample point names unknown `{name}`')
            point[name] = sympy.Rational(str(value))
        self.sample: dict[str, sympy.Rational] = point

    @property
    def dim(self) -> int:
        return len(self.coords)

    @cached_property
    def symbols(self) -> dict[str, sympy.Symbol]:
        return {s.name: s for s in self.coords + self.params}

    def parse(self, text) -> sympy.Expr:
        return symexpr.parse(text, self.symbols)

    def random_point(self, rng: np.random.Generator) -> dict:
        """Random rational binding near the sample point, honoring the
        parameter assumptions.
        """
        point = {}
        for s in self.coords:
            num = int(rng.choice((-1, 1))) * int(rng.integers(1, 10))
            point[s.name] = sympy.Rational(num, 12)
        for s in self.params:
            num = int(rng.integers(3, 13))
            point[s.name] = sympy.Rational(num, 4)
        return point

    def __eq__(self, other) -> bool:
        return isinstance(other, Chart) and \
            self.coords == other.coords and self.params == other.params

    def __hash__(self) -> int:
        return hash((self.coords, self.params))

    def __repr__(self) -> str:
        coords = ','.join(s.name for s in self.coords)
        params = ','.join(s.name for s in self.params)
        return f'<Chart ({coords}) params: ({params})>'


def _as_array(components, rank: int, n: int) -> sympy.ImmutableDenseNDimArray:
    arr = sympy.ImmutableDenseNDimArray(components)
    if rank == 0 or arr.shape != (n,) * rank:
        raise DimensionError(
            f'expected shape {(n,) * rank}, got {arr.shape}')
    return arr


class Tensor:
    """Dense tensor over a chart; `variance` holds 'cov' or 'con' per slot."""

    __slots__ = ('chart', 'variance', 'components')

    def __init__(self, chart: Chart, variance: Sequence[str], components):
        assert all(v in (COV, CON) for v in variance), variance
        self.chart = chart
        self.variance = tuple(variance)
        self.components = _as_array(components, len(variance), chart.dim)

    @classmethod
    def zeros(cls, chart: Chart, variance: Sequence[str]) -> Tensor:
        n = chart.dim
        return Tensor(
            chart, variance,
            sympy.MutableDenseNDimArray.zeros(*((n,) * len(variance))))

    @classmethod
    def from_function(
            cls,
            chart: Chart,
            variance: Sequence[str],
            fun: Callable[..., Any]) -> Tensor:
        n = chart.dim
        rank = len(variance)
        arr = sympy.MutableDenseNDimArray.zeros(*((n,) * rank))
        for idx in itertools.product(range(n), repeat=rank):
            arr[idx] = fun(*idx)
        return cls._wrap(chart, variance, arr)

    @classmethod
    def _wrap(cls, chart, variance, arr) -> Tensor:
        if cls is VectorField or cls is OneForm:
            return cls(chart, arr)
        return Tensor(chart, variance, arr)

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def indices(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(range(self.dim), repeat=self.rank)

    def __getitem__(self, idx):
        return self.components[idx]

    def map(self, fun: Callable[[sympy.Expr], sympy.Expr]) -> Tensor:
        return self.from_function(
            self.chart, self.variance, lambda *i: fun(self.components[i]))

    def simplify(self) -> Tensor:
        return self.map(symexpr.simplify)

    def nonzero(self) -> list[tuple[tuple[int, ...], sympy.Expr]]:
        """Index/value pairs of the components that do not simplify to 0."""
        out = []
        for idx in self.indices():
            value = symexpr.simplify(self.components[idx])
            if value != 0:
                out.append((idx, value))
        return out

    def is_zero(self) -> bool:
        return not self.nonzero()

    def evaluate(self, bindings: symexpr.Bindings) -> np.ndarray:
        out = np.zeros((self.dim,) * self.rank)
        for idx in self.indices():
            out[idx] = float(symexpr.eval_at(self.components[idx], bindings))
        return out

    def _check_compatible(self, other: Tensor):
        if self.chart != other.chart or self.variance != other.variance:
            raise GeometryError(
                f'incompatible tensors {self.variance} and {other.variance}')

    def __add__(self, other: Tensor) -> Tensor:
        self._check_compatible(other)
        return self._wrap(
            self.chart, self.variance, self.components + other.components)

    def __sub__(self, other: Tensor) -> Tensor:
        self._check_compatible(other)
        return self._wrap(
            self.chart, self.variance, self.components - other.components)

    def __neg__(self) -> Tensor:
        return self._wrap(self.chart, self.variance, -self.components)

    def __mul__(self, scalar) -> Tensor:
        if isinstance(scalar, Tensor):
            return NotImplemented
        return self._wrap(
            self.chart, self.variance,
            self.components.applyfunc(lambda c: c * scalar))

    __rmul__ = __mul__

    def is_symmetric(self, i: int = 0, j: int = 1) -> bool:
        for idx in self.indices():
            if idx[i] >= idx[j]:
                continue
            swapped = list(idx)
            swapped[i], swapped[j] = swapped[j], swapped[i]
            diff = self.components[idx] - self.components[tuple(swapped)]
            if symexpr.simplify(diff) != 0:
                return False
        return True

    def require_symmetric(self, name: str = 'tensor') -> Tensor:
        if self.rank != 2 or not self.is_symmetric():
            raise AsymmetricTensor(f'{name} must be a symmetric (0,2) tensor')
        return self

    def as_matrix(self) -> sympy.Matrix:
        assert self.rank == 2
        return sympy.Matrix(self.components.tolist())

    def __repr__(self) -> str:
        return f'<Tensor {self.variance} on {self.chart}>'


class VectorField(Tensor):

    __slots__ = ()

    def __init__(self, chart: Chart, components):
        super().__init__(chart, (CON,), components)

    def apply(self, form: OneForm) -> sympy.Expr:
        return sum(
            (self[i] * form[i] for i in range(self.dim)), sympy.Integer(0))


class OneForm(Tensor):

    __slots__ = ()

    def __init__(self, chart: Chart, components):
        super().__init__(chart, (COV,), components)

    def __call__(self, vector: VectorField) -> sympy.Expr:
        return vector.apply(self)


def outer(a: Tensor, b: Tensor) -> Tensor:
    """Tensor product; the slots of `a` come first."""
    arr = sympy.tensorproduct(a.components, b.components)
    return Tensor(a.chart, a.variance + b.variance, arr)


def symmetric_product(a: OneForm, b: OneForm) -> Tensor:
    """a⊗b + b⊗a (no factor 1/2)."""
    return outer(a, b) + outer(b, a)


def contract(t: Tensor, i: int, j: int) -> Tensor | sympy.Expr:
    """Contract an upper and a lower slot."""
    if {t.variance[i], t.variance[j]} != {COV, CON}:
        raise GeometryError('contraction needs one upper and one lower slot')
    arr = sympy.tensorcontraction(t.components, (i, j))
    variance = [v for k, v in enumerate(t.variance) if k not in (i, j)]
    if not variance:
        return arr if isinstance(arr, sympy.Expr) else sympy.sympify(arr)
    cls = _CLASS_FOR.get(tuple(variance))
    if cls is not None:
        return cls(t.chart, arr)
    return Tensor(t.chart, variance, arr)


_CLASS_FOR: dict[tuple[str, ...], type] = {
    (CON,): VectorField,
    (COV,): OneForm,
}


class Metric(Tensor):
    """Symmetric non-degenerate (0,2) tensor.

    Invertibility and signature are certified numerically at the chart's
    sample point.
    """

    __slots__ = ('_simplify', '__dict__')

    def __init__(self, chart: Chart, components, simplify: bool = True):
        super().__init__(chart, (COV, COV), components)
        self._simplify = simplify
        if not self.is_symmetric():
            raise AsymmetricTensor('metric components are not symmetric')
        det = self.numeric_at(chart.sample)
        if abs(np.linalg.det(det)) < 1e-12:
            raise NonInvertibleMetric(
                f'metric is degenerate at the sample point {chart.sample}')

    @classmethod
    def from_matrix(
            cls,
            chart: Chart,
            matrix,
            simplify: bool = True) -> Metric:
        return cls(chart, sympy.Matrix(matrix).tolist(), simplify=simplify)

    def numeric_at(self, point: Mapping[str, Any]) -> np.ndarray:
        return self.evaluate(point)

    @property
    def matrix(self) -> sympy.Matrix:
        return self.as_matrix()

    @cached_property
    def inverse(self) -> sympy.ImmutableMatrix:
        inv = self.matrix.inv(method='LU')
        if self._simplify:
            inv = inv.applyfunc(symexpr.simplify)
        logging.debug(f'metric inverse computed on {self.chart}')
        return sympy.ImmutableMatrix(inv)

    @cached_property
    def det(self) -> sympy.Expr:
        det = self.matrix.det(method='berkowitz')
        return symexpr.simplify(det) if self._simplify else det

    @cached_property
    def signature(self) -> tuple[int, ...]:
        values = np.linalg.eigvalsh(self.numeric_at(self.chart.sample))
        return tuple(int(np.sign(v)) for v in sorted(values))

    @property
    def simplifies(self) -> bool:
        return self._simplify

    def lower(self, v: VectorField) -> OneForm:
        n = self.dim
        return OneForm(self.chart, [
            sum((self[i, j] * v[j] for j in range(n)), sympy.Integer(0))
            for i in range(n)])

    def raise_(self, w: OneForm) -> VectorField:
        n = self.dim
        inv = self.inverse
        return VectorField(self.chart, [
            self._s(sum((inv[i, j] * w[j] for j in range(n)),
                        sympy.Integer(0)))
            for i in range(n)])

    def inner(self, x: VectorField, y: VectorField) -> sympy.Expr:
        n = self.dim
        return self._s(sum(
            (self[i, j] * x[i] * y[j]
             for i in range(n) for j in range(n)), sympy.Integer(0)))

    def inner_forms(self, a: OneForm, b: OneForm) -> sympy.Expr:
        n = self.dim
        inv = self.inverse
        return self._s(sum(
            (inv[i, j] * a[i] * b[j]
             for i in range(n) for j in range(n)), sympy.Integer(0)))

    def trace(self, t: Tensor) -> sympy.Expr:
        """Metric trace g^{ij} t_ij of a (0,2) tensor."""
        n = self.dim
        inv = self.inverse
        return self._s(sum(
            (inv[i, j] * t[i, j]
             for i in range(n) for j in range(n)), sympy.Integer(0)))

    def tensor(self) -> Tensor:
        return Tensor(self.chart, self.variance, self.components)

    def _s(self, e: sympy.Expr) -> sympy.Expr:
        return symexpr.simplify(e) if self._simplify else e


def plain_trace(t: Tensor) -> sympy.Expr:
    """Diagonal sum of a rank 2 tensor, ignoring the metric."""
    assert t.rank == 2
    return symexpr.simplify(
        sum((t[i, i] for i in range(t.dim)), sympy.Integer(0)))
