"""Manifest files.

Example manifest:

    name: godel
    use: godel            # optional; inherit the blocks of a bundled fixture
    chart:
      coords: [t, x, y, z]
      params:
        k: {nonzero: true, positive: true}
      sample: {x: 1/3}
    metric:
      "1,1": k^2
      "1,3": k^2*exp(x)
    checks: [curvature, coqe-verify]

Component keys are 1-based; "1,2" and "2,1" name the same entry.
"""
from __future__ import annotations
import copy
import logging
import sympy
import yaml
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union
from .checks import ALL_ALIAS, CHECKS
from .exceptions import CoqeError, ManifestError
from .fixtures import fixture_path, random_polynomial_metric
from .quasi_einstein import CoQEStructure, QCCCoefficients
from .relativity import FluidComponent, Fluids, GravConstants
from .tensor import COV, Chart, Metric, OneForm, Tensor, VectorField

MAX_USE_DEPTH = 8

BLOCKS = (
    'name', 'use', 'chart', 'metric', 'structure', 'qcc', 'fluids',
    'constants', 'vectors', 'plane', 'sigma', 'expected', 'checks')


class _UniqueKeyLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader: yaml.SafeLoader, node: yaml.MappingNode):
    loader.flatten_mapping(node)
    out = {}
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node)
        if key in out:
            mark = key_node.start_mark
            raise ManifestError(
                f'duplicate entry `{key}`',
                f'line {mark.line + 1} column {mark.column + 1}')
        out[key] = loader.construct_object(value_node)
    return out


_UniqueKeyLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _read_yaml(text: str, source: str) -> dict:
    try:
        data = yaml.load(text, Loader=_UniqueKeyLoader)
    except yaml.YAMLError as e:
        raise ManifestError(f'invalid YAML: {e}', source)
    if not isinstance(data, dict):
        raise ManifestError('manifest must be a mapping', source)
    return data


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_use(data: dict, source: str, depth: int = 0) -> dict:
    """Merge the bundled fixture named by `use`, block by block."""
    use = data.get('use')
    if not use:
        return data
    if not isinstance(use, str):
        raise ManifestError('`use` must name a bundled fixture', source)
    if depth >= MAX_USE_DEPTH:
        raise ManifestError(f'`use` chain deeper than {MAX_USE_DEPTH}', source)
    path = fixture_path(use)
    if path is None:
        raise ManifestError(f'unknown fixture `{use}`', f'{source}: use')
    base = resolve_use(
        _read_yaml(path.read_text(), str(path)), str(path), depth + 1)
    merged = _merge(base, {k: v for k, v in data.items() if k != 'use'})
    merged.pop('use', None)
    return merged


@dataclass
class Manifest:
    name: str
    chart: Chart
    metric: Metric
    checks: list[str]
    structure: Optional[CoQEStructure] = None
    qcc: Optional[QCCCoefficients] = None
    fluids: Optional[Fluids] = None
    constants: Optional[GravConstants] = None
    vectors: dict[str, VectorField] = field(default_factory=dict)
    plane: Optional[tuple[VectorField, VectorField]] = None
    sigma: Optional[sympy.Expr] = None
    expected: dict[str, Any] = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)
    source: str = '<string>'

    @property
    def dim(self) -> int:
        return self.chart.dim


class _Builder:
    """Turns the raw blocks into domain objects; every error names its
    block."""

    def __init__(self, raw: dict, source: str):
        self.raw = raw
        self.source = source
        self.chart: Chart = None  # type: ignore

    def error(self, msg: str, where: str) -> ManifestError:
        return ManifestError(msg, f'{self.source}: {where}')

    def expr(self, value, where: str) -> sympy.Expr:
        if isinstance(value, bool) or value is None:
            raise self.error(f'expected an expression, got {value!r}', where)
        try:
            return self.chart.parse(str(value))
        except CoqeError as e:
            raise self.error(str(e), where)

    def block(self, name: str, kind=dict, required: bool = False):
        value = self.raw.get(name)
        if value is None:
            if required:
                raise self.error('missing block', name)
            return None
        if not isinstance(value, kind):
            raise self.error(
                f'expected {kind.__name__}, got {type(value).__name__}', name)
        return value

    def mapping(self, value, where: str) -> dict:
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise self.error(
                f'expected a mapping, got {type(value).__name__}', where)
        return value

    def index(self, key, rank: int, where: str) -> tuple[int, ...]:
        parts = [p.strip() for p in str(key).split(',')]
        try:
            idx = tuple(int(p) for p in parts)
        except ValueError:
            raise self.error(f'invalid component key `{key}`', where)
        n = self.chart.dim
        if len(idx) != rank or any(not 1 <= i <= n for i in idx):
            raise self.error(
                f'component key `{key}` out of range for dimension {n}',
                where)
        return tuple(i - 1 for i in idx)

    def symmetric(
            self,
            entries: Mapping,
            where: str,
            upper_only: bool = False) -> list[list[sympy.Expr]]:
        n = self.chart.dim
        comps = [[sympy.Integer(0)] * n for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        for key, value in entries.items():
            i, j = self.index(key, 2, where)
            if upper_only and i > j:
                raise self.error(
                    f'give component `{key}` as `{j + 1},{i + 1}`', where)
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise self.error(f'duplicate entry `{key}`', where)
            seen.add(pair)
            comps[i][j] = comps[j][i] = self.expr(value, f'{where}.{key}')
        return comps

    def vector(self, value, where: str) -> list[sympy.Expr]:
        n = self.chart.dim
        if not isinstance(value, (list, tuple)) or len(value) != n:
            raise self.error(f'expected a list of {n} components', where)
        return [self.expr(v, f'{where}[{i}]') for i, v in enumerate(value)]

    def build_chart(self, sample: Optional[Mapping[str, Any]]) -> Chart:
        block = self.block('chart', required=True)
        coords = block.get('coords')
        if not isinstance(coords, list) or \
                not all(isinstance(c, str) for c in coords):
            raise self.error('expected a list of names', 'chart.coords')
        params = block.get('params') or {}
        if not isinstance(params, dict):
            raise self.error('expected a mapping', 'chart.params')
        flags = {}
        for name, spec in params.items():
            spec = spec or {}
            if not isinstance(spec, dict):
                raise self.error('expected a mapping', f'chart.params.{name}')
            flags[str(name)] = {
                'nonzero': bool(spec.get('nonzero')),
                'positive': bool(spec.get('positive'))}
        point = {str(k): str(v) for k, v in self.mapping(
            block.get('sample'), 'chart.sample').items()}
        point.update({k: str(v) for k, v in (sample or {}).items()})
        try:
            return Chart(coords, flags, point)
        except (CoqeError, ValueError, TypeError) as e:
            raise self.error(str(e), 'chart')

    def build_metric(self) -> Metric:
        block = self.block('metric', required=True)
        gen = block.get('random_polynomial')
        try:
            if gen is not None:
                if not isinstance(gen, dict):
                    raise self.error(
                        'expected a mapping', 'metric.random_polynomial')
                return random_polynomial_metric(
                    self.chart,
                    seed=int(gen.get('seed', 42)),
                    degree=int(gen.get('degree', 1)),
                    signature=gen.get('signature'),
                    off_diagonal=bool(gen.get('off_diagonal', False)))
            return Metric(
                self.chart, self.symmetric(block, 'metric', upper_only=True))
        except ManifestError:
            raise
        except (CoqeError, ValueError) as e:
            raise self.error(str(e), 'metric')

    def build_structure(self) -> Optional[CoQEStructure]:
        block = self.block('structure')
        if block is None:
            return None
        n = self.chart.dim
        b = sympy.zeros(4, 4)
        seen: set[tuple[int, int]] = set()
        for key, value in self.mapping(
                block.get('b'), 'structure.b').items():
            parts = str(key).split(',')
            try:
                i, j = (int(p) - 1 for p in parts)
            except ValueError:
                raise self.error(f'invalid key `{key}`', 'structure.b')
            if not (0 <= i < 4 and 0 <= j < 4):
                raise self.error(f'key `{key}` out of range', 'structure.b')
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise self.error(f'duplicate entry `{key}`', 'structure.b')
            seen.add(pair)
            b[i, j] = b[j, i] = self.expr(value, f'structure.b.{key}')
        omegas = block.get('omega')
        if not isinstance(omegas, list) or len(omegas) != 4:
            raise self.error('expected four 1-forms', 'structure.omega')
        forms = tuple(
            OneForm(self.chart, self.vector(w, f'structure.omega[{k}]'))
            for k, w in enumerate(omegas))

        def scalar(name):
            return self.expr(block.get(name, 0), f'structure.{name}')

        def sym(name):
            entries = block.get(name) or {}
            if not isinstance(entries, dict):
                raise self.error('expected a mapping', f'structure.{name}')
            return Tensor(
                self.chart, (COV, COV),
                self.symmetric(entries, f'structure.{name}'))

        declared = block.get('declared_r')
        if n < 4:
            raise self.error(
                f'a structure needs dimension >= 4, got {n}', 'structure')
        return CoQEStructure(
            scalar('a'), sympy.ImmutableMatrix(b), scalar('c1'),
            scalar('c2'), forms, sym('d1'), sym('d2'),
            None if declared is None else
            self.expr(declared, 'structure.declared_r'))

    def build_qcc(self) -> Optional[QCCCoefficients]:
        block = self.block('qcc')
        if block is None:
            return None
        unknown = set(block) - {f'a{k}' for k in range(1, 14)}
        if unknown:
            raise self.error(f'unknown coefficients {sorted(unknown)}', 'qcc')
        return QCCCoefficients(tuple(
            self.expr(block.get(f'a{k}', 0), f'qcc.a{k}')
            for k in range(1, 14)))

    def build_fluid(self, block: Optional[dict], where: str) -> FluidComponent:
        if block is None:
            return FluidComponent.vacuum(self.chart)
        if not isinstance(block, dict):
            raise self.error('expected a mapping', where)
        n = self.chart.dim
        zero = [0] * n
        e = block.get('e') or {}
        return FluidComponent(
            self.expr(block.get('sigma', 0), f'{where}.sigma'),
            self.expr(block.get('p', 0), f'{where}.p'),
            self.expr(block.get('varsigma', 0), f'{where}.varsigma'),
            Tensor(self.chart, (COV, COV),
                   self.symmetric(e, f'{where}.e')),
            OneForm(self.chart, self.vector(
                block.get('omega', zero), f'{where}.omega')),
            OneForm(self.chart, self.vector(
                block.get('q', zero), f'{where}.q')))

    def build_fluids(self) -> Optional[Fluids]:
        block = self.block('fluids')
        if block is None:
            return None
        return Fluids(
            self.build_fluid(block.get('r'), 'fluids.r'),
            self.build_fluid(block.get('m'), 'fluids.m'))

    def build_constants(self) -> Optional[GravConstants]:
        block = self.block('constants')
        if block is None:
            return None
        try:
            return GravConstants(
                self.expr(block.get('kappa', 1), 'constants.kappa'),
                self.expr(block.get('Lambda', 0), 'constants.Lambda'))
        except CoqeError as e:
            raise self.error(str(e), 'constants')

    def build_vectors(self) -> dict[str, VectorField]:
        block = self.block('vectors') or {}
        return {
            str(name): VectorField(
                self.chart, self.vector(comps, f'vectors.{name}'))
            for name, comps in block.items()}

    def build_plane(
            self,
            vectors: Mapping[str, VectorField]
    ) -> Optional[tuple[VectorField, VectorField]]:
        block = self.block('plane', kind=list)
        if block is None:
            return None
        if len(block) != 2:
            raise self.error('expected two vectors', 'plane')
        out = []
        for k, item in enumerate(block):
            if isinstance(item, str):
                if item not in vectors:
                    raise self.error(f'unknown vector `{item}`', 'plane')
                out.append(vectors[item])
            else:
                out.append(VectorField(
                    self.chart, self.vector(item, f'plane[{k}]')))
        return out[0], out[1]

    def build_expected(self) -> dict[str, Any]:
        block = self.block('expected') or {}
        out: dict[str, Any] = {}
        chris = block.get('christoffel')
        if chris is not None:
            seen = set()
            out['christoffel'] = {}
            for key, value in self.mapping(
                    chris, 'expected.christoffel').items():
                a, b, c = self.index(key, 3, 'expected.christoffel')
                idx = (a, min(b, c), max(b, c))
                if idx in seen:
                    raise self.error(
                        f'duplicate entry `{key}`', 'expected.christoffel')
                seen.add(idx)
                out['christoffel'][idx] = self.expr(
                    value, f'expected.christoffel.{key}')
        ricci = block.get('ricci')
        if ricci is not None:
            out['ricci'] = self.symmetric(
                self.mapping(ricci, 'expected.ricci'), 'expected.ricci')
        killing = block.get('killing')
        if killing is not None:
            if not isinstance(killing, list):
                raise self.error(
                    'expected a list of names', 'expected.killing')
            out['killing'] = [str(k) for k in killing]
        character = block.get('character')
        if character is not None:
            out['character'] = {
                str(k): [str(label) for label in v]
                for k, v in self.mapping(
                    character, 'expected.character').items()}
        if block.get('class') is not None:
            out['class'] = str(block['class'])
        if block.get('sectional') is not None:
            out['sectional'] = self.expr(
                block['sectional'], 'expected.sectional')
        if block.get('divergence_free') is not None:
            out['divergence_free'] = bool(block['divergence_free'])
        return out

    def build_checks(self) -> list[str]:
        checks = self.raw.get('checks') or []
        if isinstance(checks, str):
            checks = [checks]
        if not isinstance(checks, list):
            raise self.error('expected a list of check names', 'checks')
        return validate_checks(
            [str(c) for c in checks], f'{self.source}: checks')


def validate_checks(names: Sequence[str], where: str) -> list[str]:
    out: list[str] = []
    for name in names:
        if name == ALL_ALIAS:
            out.extend(
                n for n, c in CHECKS.items() if not c.heavy and n not in out)
            continue
        if name not in CHECKS:
            available = ', '.join(CHECKS)
            raise ManifestError(
                f'unknown check `{name}`; available checks: {available}',
                where)
        if name not in out:
            out.append(name)
    return out


def build_manifest(
        raw: dict,
        source: str = '<string>',
        sample: Optional[Mapping[str, Any]] = None) -> Manifest:
    raw = resolve_use(raw, source)
    unknown = set(raw) - set(BLOCKS)
    if unknown:
        raise ManifestError(f'unknown blocks {sorted(unknown)}', source)
    b = _Builder(raw, source)
    b.chart = b.build_chart(sample)
    metric = b.build_metric()
    vectors = b.build_vectors()
    sigma = raw.get('sigma')
    m = Manifest(
        name=str(raw.get('name') or Path(source).stem),
        chart=b.chart,
        metric=metric,
        checks=b.build_checks(),
        structure=b.build_structure(),
        qcc=b.build_qcc(),
        fluids=b.build_fluids(),
        constants=b.build_constants(),
        vectors=vectors,
        plane=b.build_plane(vectors),
        sigma=None if sigma is None else b.expr(sigma, 'sigma'),
        expected=b.build_expected(),
        raw=raw,
        source=source)
    logging.debug(f'manifest loaded; manifest: {m.name}')
    return m


def loads_manifest(
        text: str,
        source: str = '<string>',
        sample: Optional[Mapping[str, Any]] = None) -> Manifest:
    return build_manifest(_read_yaml(text, source), source, sample)


def load_manifest(
        path: Union[str, Path],
        sample: Optional[Mapping[str, Any]] = None) -> Manifest:
    """Load a manifest file; a bare fixture name loads the bundled fixture."""
    p = Path(path)
    if not p.is_file():
        bundled = fixture_path(str(path))
        if bundled is None:
            raise ManifestError('no such manifest or fixture', str(path))
        p = bundled
    try:
        text = p.read_text()
    except OSError as e:
        raise ManifestError(str(e), str(p))
    return loads_manifest(text, str(p), sample)


def manifest_to_dict(m: Manifest) -> dict:
    """The resolved manifest blocks; the chart sample is made explicit."""
    raw = copy.deepcopy(m.raw)
    raw['name'] = m.name
    chart = dict(raw.get('chart') or {})
    chart['sample'] = {k: str(v) for k, v in m.chart.sample.items()}
    raw['chart'] = chart
    raw['checks'] = list(m.checks)
    return {k: raw[k] for k in BLOCKS if k in raw}


def dump_manifest(m: Manifest) -> str:
    return yaml.safe_dump(
        manifest_to_dict(m), sort_keys=False, allow_unicode=True)


def parse_sample_point(text: Optional[str]) -> dict[str, str]:
    """`x=1/3,k=2` to a binding of rational strings."""
    out: dict[str, str] = {}
    if not text:
        return out
    for item in text.split(','):
        name, sep, value = item.partition('=')
        name, value = name.strip(), value.strip()
        if not sep or not name or not value:
            raise ManifestError(f'invalid sample point entry `{item}`',
                                '--sample-point')
        try:
            sympy.Rational(value)
        except (TypeError, ValueError, sympy.SympifyError):
            raise ManifestError(f'`{value}` is not a rational',
                                '--sample-point')
        out[name] = value
    return out


def parse_plane(
        m: Manifest,
        text: Optional[str]) -> Optional[tuple[VectorField, VectorField]]:
    """`1,0,0,0;0,1,0,0` or two vector names separated by `;`."""
    if not text:
        return None
    parts = [p.strip() for p in text.split(';')]
    if len(parts) != 2:
        raise ManifestError(
            'a plane needs two vectors separated by `;`', '--plane')
    out = []
    for part in parts:
        if part in m.vectors:
            out.append(m.vectors[part])
            continue
        try:
            out.append(VectorField(
                m.chart, [m.chart.parse(c) for c in part.split(',')]))
        except CoqeError as e:
            raise ManifestError(str(e), '--plane')
    return out[0], out[1]
