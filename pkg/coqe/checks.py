"""Named checks.

A check takes a Session and returns a result dictionary:

    {'residuals': [{'indices': [1, 3], 'expr': '2*exp(x)'}], 'notes': [...]}

A check fails by raising CheckException and is flagged by raising
FlaggedException; both may carry the result dictionary.
"""
from __future__ import annotations
import itertools
import logging
import numpy as np
import sympy
from functools import cached_property
from typing import TYPE_CHECKING, Callable, NamedTuple, Optional
from . import geometry, quasi_einstein as qe, relativity, symexpr
from .check import CheckRef
from .exceptions import (
    CheckException,
    FlaggedException,
    NoExactFit,
    NonZeroTensorScalars,
)
from .tensor import COV, OneForm, Tensor
from .verdict import Verdict

if TYPE_CHECKING:
    from .manifest import Manifest

ALL_ALIAS = 'all'
NUMERIC_ATOL = 1e-8
NUMERIC_POINTS = 4

STAGE_BUNDLE, STAGE_CURVATURE, STAGE_STRUCTURE, STAGE_PHYSICS = range(4)


class Check(NamedTuple):
    stage: int
    fun: Callable[[Session], dict]
    heavy: bool = False


CHECKS: dict[str, Check] = {}


def register(name: str, stage: int, heavy: bool = False):
    def wrap(fun: Callable[[Session], dict]):
        CHECKS[name] = Check(stage, fun, heavy)
        return fun
    return wrap


class Session:
    """Per manifest state shared by the checks of a run."""

    def __init__(self, manifest: Manifest, seed: int = 42):
        self.manifest = manifest
        self.seed = seed

    @cached_property
    def bundle(self) -> geometry.CurvatureBundle:
        return geometry.CurvatureBundle(self.manifest.metric)

    @property
    def symbolic(self) -> bool:
        return self.bundle.simplifies

    def ref(self, name: str) -> CheckRef:
        return CheckRef(self.manifest.name, name)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def points(self) -> list[dict]:
        rng = self.rng()
        chart = self.manifest.chart
        return [chart.sample] + [
            chart.random_point(rng) for _ in range(NUMERIC_POINTS - 1)]

    def structure(self) -> qe.CoQEStructure:
        st = self.manifest.structure
        if st is None:
            raise CheckException('manifest has no structure block')
        return st

    def nonzero(self, t: Tensor) -> list[tuple[tuple[int, ...], object]]:
        """Components that do not vanish: symbolically, or numerically at
        seeded points for metrics that do not simplify."""
        if self.symbolic:
            return t.nonzero()
        worst: dict[tuple[int, ...], float] = {}
        for point in self.points():
            values = t.evaluate(point)
            for idx in t.indices():
                v = float(values[idx])
                if abs(v) > max(NUMERIC_ATOL, abs(worst.get(idx, 0))):
                    worst[idx] = v
        return sorted(worst.items())


def text(value) -> str:
    if isinstance(value, float):
        return f'{value:.10g}'
    return symexpr.to_text(sympy.sympify(value))


def residuals(entries) -> list[dict]:
    return [
        {'indices': [i + 1 for i in idx], 'expr': text(value)}
        for idx, value in entries]


def result(entries=(), notes=()) -> dict:
    return {'residuals': residuals(entries), 'notes': list(notes)}


def _generator_pair(i: int, j: int) -> str:
    return f'W{i + 1},W{j + 1}'


@register('curvature', STAGE_CURVATURE)
def check_curvature(s: Session) -> dict:
    b, m = s.bundle, s.manifest
    n = b.n
    notes: list[str] = []
    mismatches = []
    if not s.symbolic:
        r = float(symexpr.eval_at(b.scalar, m.chart.sample))
        notes.append(f'metric does not simplify; r = {r:.10g} at the sample '
                     'point')
        return result(notes=notes)

    G = b.christoffel
    expected = m.expected.get('christoffel')
    for a, i, j in itertools.product(range(n), repeat=3):
        if i > j:
            continue
        value = G[a, i, j]
        if value != 0:
            notes.append(
                f'G^{a + 1}_{i + 1}{j + 1} = {symexpr.to_text(value)}')
        if expected is not None:
            want = expected.get((a, i, j), sympy.Integer(0))
            if not symexpr.equivalent(value, want, seed=s.seed):
                mismatches.append(
                    ((a, i, j), symexpr.simplify(value - want)))

    S = b.ricci
    expected_ricci = m.expected.get('ricci')
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        if S[i, j] != 0:
            notes.append(f'S_{i + 1}{j + 1} = {symexpr.to_text(S[i, j])}')
        if expected_ricci is not None:
            want = expected_ricci[i][j]
            if not symexpr.equivalent(S[i, j], want, seed=s.seed):
                mismatches.append(
                    ((i, j), symexpr.simplify(S[i, j] - want)))

    notes.append(f'r = {symexpr.to_text(b.scalar)}')
    res = result(mismatches, notes)
    if mismatches:
        raise CheckException(
            f'{len(mismatches)} components differ from the expected values',
            result=res)

    st = m.structure
    if st is not None and st.declared_r is not None and \
            not symexpr.equivalent(st.declared_r, b.scalar, seed=s.seed):
        res['notes'].append(
            f'declared r = {symexpr.to_text(st.declared_r)}')
        raise FlaggedException(
            f'declared scalar curvature {symexpr.to_text(st.declared_r)} '
            f'differs from the computed {symexpr.to_text(b.scalar)}', res)
    return res


@register('riemann-symmetries', STAGE_CURVATURE)
def check_riemann_symmetries(s: Session) -> dict:
    b = s.bundle
    failures = []
    notes = []
    if s.symbolic:
        for name, defect in geometry.riemann_symmetry_defects(b).items():
            bad = defect.nonzero()
            notes.append(f'{name}: {"fail" if bad else "pass"}')
            failures.extend(bad)
    else:
        for point in s.points():
            R = b.riemann.evaluate(point)
            defects = {
                'antisymmetry-first-pair': R + R.transpose(1, 0, 2, 3),
                'antisymmetry-last-pair': R + R.transpose(0, 1, 3, 2),
                'pair-symmetry': R - R.transpose(2, 3, 0, 1),
                'first-bianchi':
                    R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2),
            }
            for name, arr in defects.items():
                worst = float(np.max(np.abs(arr)))
                if worst > NUMERIC_ATOL:
                    idx = np.unravel_index(np.argmax(np.abs(arr)), arr.shape)
                    failures.append((tuple(int(i) for i in idx), worst))
                    notes.append(f'{name}: {worst:.3e} at {point}')
        notes.append(f'checked numerically at {NUMERIC_POINTS} points')
    res = result(failures, notes)
    if failures:
        raise CheckException('Riemann tensor symmetries violated', result=res)
    return res


@register('bianchi', STAGE_CURVATURE)
def check_bianchi(s: Session) -> dict:
    b = s.bundle
    bad = s.nonzero(geometry.contracted_bianchi_defect(b))
    compat = s.nonzero(geometry.metric_compatibility_defect(b))
    notes = [
        f'div S - dr/2: {"fail" if bad else "pass"}',
        f'metric compatibility: {"fail" if compat else "pass"}',
    ]
    res = result(bad + compat, notes)
    if bad or compat:
        raise CheckException('Bianchi identity violated', result=res)
    return res


@register('weyl', STAGE_CURVATURE)
def check_weyl(s: Session) -> dict:
    b = s.bundle
    W = geometry.weyl(b)
    trace = qe.curvature_contraction(W, b.metric)
    bad = s.nonzero(trace)
    notes = []
    if b.n > 3:
        flat = not s.nonzero(W)
        notes.append('conformally flat' if flat else 'not conformally flat')
    res = result(bad, notes)
    if bad:
        raise CheckException('Weyl tensor is not trace-free', result=res)
    return res


@register('cotton', STAGE_CURVATURE, heavy=True)
def check_cotton(s: Session) -> dict:
    b = s.bundle
    n = b.n
    C = geometry.cotton(b)
    brute = geometry.weyl_divergence(b)
    k = sympy.Rational(n - 3, n - 2)
    defect = Tensor.from_function(
        b.chart, (COV,) * 3, lambda *i: brute[i] + k * C[i])
    bad = s.nonzero(defect)
    if s.symbolic:
        harmonic = geometry.harmonic_weyl(b)
    else:
        harmonic = n == 3 or not s.nonzero(C)
    res = result(bad, [
        f'div W = -{k} * Cotton: {"fail" if bad else "pass"}',
        'harmonic Weyl tensor' if harmonic else 'Weyl tensor not harmonic',
    ])
    if bad:
        raise CheckException(
            'divergence of the Weyl tensor differs from the Cotton form',
            result=res)
    return res


@register('coqe-verify', STAGE_STRUCTURE)
def check_coqe_verify(s: Session) -> dict:
    b = s.bundle
    st = s.structure()
    bad = qe.decomposition_residual(b, st).nonzero()
    res = result(bad, [
        'residual S - [a g + b_ij w^i w^j + c1 d1 + c2 d2]'])
    if bad:
        raise CheckException(
            'Ricci tensor differs from the decomposition', result=res)
    return res


@register('constraints', STAGE_STRUCTURE)
def check_constraints(s: Session) -> dict:
    rep = qe.verify_structure_constraints(s.bundle, s.structure())
    entries = []
    notes = []
    for c in rep.constraints:
        line = f'{c.name}: {c.verdict.value}'
        if c.convention:
            line += f' ({c.convention} trace)'
        if c.note:
            line += f'; {c.note}'
        notes.append(line)
        entries.extend(c.residuals)
    for k, name in enumerate(('d1', 'd2')):
        notes.append(
            f'{name} plain trace = {text(rep.plain_traces[k])}, '
            f'metric trace = {text(rep.metric_traces[k])}')
    gram = ', '.join(
        f'g({_generator_pair(i, j)}) = {text(rep.gram[i, j])}'
        for i in range(4) for j in range(i, 4) if rep.gram[i, j] != 0)
    notes.append(f'gram: {gram}')
    res = result(entries, notes)
    if rep.verdict is Verdict.FAIL:
        raise CheckException('structure constraints violated', result=res)
    if rep.verdict is Verdict.FLAGGED:
        flagged = [c.name for c in rep.constraints
                   if c.verdict is Verdict.FLAGGED]
        raise FlaggedException(
            f'decomposition holds but {", ".join(flagged)} not satisfied',
            res)
    return res


@register('classify', STAGE_STRUCTURE)
def check_classify(s: Session) -> dict:
    label = qe.classify(s.structure(), s.bundle)
    res = result(notes=[f'class: {label.value}'])
    expected = s.manifest.expected.get('class')
    if expected is not None and expected != label.value:
        raise CheckException(
            f'classified as {label.value}, expected {expected}', result=res)
    return res


@register('trace-identity', STAGE_STRUCTURE)
def check_trace_identity(s: Session) -> dict:
    t = qe.trace_identity(s.bundle, s.structure(), seed=s.seed)
    notes = [
        f'computed r = {text(t.computed_r)}',
        f'a n + sum b_ii = {text(t.unit_value)}',
        f'a n + sum b_ij g(W_i,W_j) + c1 tr d1 + c2 tr d2 = '
        f'{text(t.corrected_value)}',
    ]
    if t.declared_r is not None:
        notes.append(f'declared r = {text(t.declared_r)}')
    for label, eq in (('unit-generator form', t.unit_matches),
                      ('signature-aware form', t.corrected_matches)):
        if eq.probabilistic:
            notes.append(
                f'{label} compared numerically at {len(eq.points)} points')
    res = result(notes=notes)
    if not t.corrected_matches:
        raise CheckException(
            'trace of the decomposition differs from r', result=res)
    issues = []
    if not t.unit_matches:
        issues.append('unit-generator trace form differs from r')
    if t.declared_matches is not None and not t.declared_matches:
        issues.append('declared r differs from the computed r')
    if issues:
        raise FlaggedException('; '.join(issues), res)
    return res


@register('generator-ricci', STAGE_STRUCTURE)
def check_generator_ricci(s: Session) -> dict:
    gr = qe.generator_ricci_values(s.bundle, s.structure(), seed=s.seed)
    notes = []
    bad = []
    for p in qe.EXPANDED_PAIRS:
        pair = _generator_pair(*p)
        notes.append(
            f'S({pair}) = {text(gr.direct[p])}; unit form '
            f'{"holds" if gr.expanded_holds[p] else "differs"}')
        if not gr.corrected_holds[p]:
            bad.append((p, symexpr.simplify(gr.direct[p] - gr.corrected[p])))
    for (i, j), ok in gr.orthogonality().items():
        if ok:
            notes.append(f'QW{i + 1} is orthogonal to W{j + 1}')
    res = result(bad, notes)
    if bad:
        raise CheckException(
            'generator Ricci values differ from the decomposition',
            result=res)
    if not all(gr.expanded_holds.values()):
        raise FlaggedException(
            'unit-generator closed forms do not hold for this Gram matrix',
            res)
    return res


@register('length-identity', STAGE_STRUCTURE)
def check_length_identity(s: Session) -> dict:
    li = qe.length_identity(s.bundle, s.structure(), seed=s.seed)
    chart = s.manifest.chart
    s2_num = float(symexpr.eval_at(li.s2, chart.sample))
    notes = [
        f'|S|^2 = {text(li.s2)}',
        f'frame sum at the sample point = {li.frame_s2:.10g}',
    ]
    res = result(notes=notes)
    if not li.corrected_holds:
        raise CheckException(
            '|S|^2 differs from the expansion of the decomposition',
            result=res)
    if abs(s2_num - li.frame_s2) > NUMERIC_ATOL * max(1.0, abs(s2_num)):
        raise CheckException(
            'orthonormal frame sum differs from the metric contraction',
            result=res)
    if not li.unit_holds:
        raise FlaggedException(
            'unit-generator length identity does not hold', res)
    return res


@register('fit', STAGE_STRUCTURE)
def check_fit(s: Session) -> dict:
    st = s.structure()
    b = s.bundle
    try:
        fit = qe.fit_decomposition(
            b, st.omegas, st.d1, st.d2, seed=s.seed)
    except NoExactFit as e:
        raise CheckException(
            str(e), result=result(notes=[
                f'least squares residual norm {e.residual_norm:.6g}']))
    notes = [
        f'rank {fit.rank} (numeric {fit.numeric_rank}), '
        f'nullity {fit.nullity}',
    ]
    notes += [f'{k} = {text(v)}' for k, v in fit.scalars.items() if v != 0]
    fitted = fit.structure(st.omegas, st.d1, st.d2)
    bad = qe.decomposition_residual(b, fitted).nonzero()
    res = result(bad, notes)
    if bad:
        raise CheckException('fitted scalars do not reproduce S', result=res)
    if fit.nullity:
        raise FlaggedException(
            f'decomposition is not unique; null space dimension '
            f'{fit.nullity}', res)
    return res


@register('synthesize', STAGE_STRUCTURE)
def check_synthesize(s: Session) -> dict:
    vectors = s.manifest.vectors
    if 'U' not in vectors:
        raise CheckException('synthesize needs a vector named `U`')
    gens = qe.synthesize_generators(s.bundle, vectors['U'])
    notes = [
        f'w{k + 1} = [{", ".join(text(c) for c in w.components)}]'
        for k, w in enumerate(gens.omegas)]
    res = result(notes=notes)
    if gens.degenerate:
        raise FlaggedException(
            'degenerate generators '
            f'{", ".join(f"w{k + 1}" for k in gens.degenerate)}', res)
    return res


def _qcc_frame(s: Session) -> tuple[tuple[OneForm, ...], Tensor, Tensor]:
    m = s.manifest
    if m.structure is not None:
        st = m.structure
        return st.omegas, st.d1, st.d2
    n = m.dim
    if n < 4:
        raise CheckException('the ansatz needs four 1-forms and n >= 4')
    forms = tuple(
        OneForm(m.chart, [int(i == k) for i in range(n)]) for k in range(4))
    zero = Tensor.zeros(m.chart, (COV, COV))
    return forms, zero, zero


@register('qcc', STAGE_STRUCTURE)
def check_qcc(s: Session) -> dict:
    m = s.manifest
    if m.qcc is None:
        raise CheckException('manifest has no qcc block')
    omegas, d1, d2 = _qcc_frame(s)
    notes = [f'case: {qe.classify_qcc(m.qcc)}']
    W = qe.qcc_weyl(m.qcc, m.metric, omegas, d1, d2, simplify=False)
    worst = float(np.max(np.abs(W.evaluate(m.chart.sample))))
    notes.append(f'max |W| at the sample point = {worst:.3e}')
    if worst > 1e-9:
        raise CheckException(
            'the ansatz is not conformally flat', result=result(notes=notes))
    contraction = qe.qcc_contract(m.qcc, m.metric, omegas, d1, d2)
    bad = contraction.residual.nonzero()
    b_map = m.qcc.contracted(m.dim)
    notes.append('b = [' + ', '.join(text(v) for v in b_map) + ']')
    res = result(bad, notes)
    if bad:
        raise FlaggedException(
            'contraction differs from the b-map; generators are not '
            'orthonormal or d1, d2 are not trace-free', res)
    return res


@register('sectional', STAGE_STRUCTURE)
def check_sectional(s: Session) -> dict:
    m = s.manifest
    if m.plane is None:
        raise CheckException('no plane given')
    X, Y = m.plane
    K = geometry.sectional_curvature(s.bundle, X, Y)
    notes = [f'K = {text(K)}']
    st = m.structure
    if st is not None:
        try:
            forms = qe.sectional_from_structure(st, m.dim)
        except NonZeroTensorScalars as e:
            notes.append(f'closed forms skipped: {e}')
        else:
            notes.append(
                f'orthogonal plane K = {text(forms.orthogonal_plane)}')
            notes += [
                f'plane containing W{i + 1} K = {text(v)}'
                for i, v in enumerate(forms.with_generator)]
    res = result(notes=notes)
    want = m.expected.get('sectional')
    if want is not None and not symexpr.equivalent(K, want, seed=s.seed):
        res['residuals'] = residuals([((), symexpr.simplify(K - want))])
        raise CheckException(
            f'sectional curvature {text(K)} differs from {text(want)}',
            result=res)
    return res


def _constants(s: Session) -> relativity.GravConstants:
    consts = s.manifest.constants
    if consts is None:
        raise CheckException('manifest has no constants block')
    return consts


@register('fluid', STAGE_PHYSICS)
def check_fluid(s: Session) -> dict:
    m, b = s.manifest, s.bundle
    if m.fluids is None:
        raise CheckException('manifest has no fluids block')
    consts = _constants(s)
    T = relativity.stress_energy(m.fluids, m.metric)
    bad = relativity.efe_residual(b, T, consts).nonzero()
    notes = [
        'kappa multiplies T and Lambda multiplies g in the field equations']
    norm = relativity.fluid_normalization(m.fluids, m.metric)
    off = {k: v for k, v in norm.items() if v is not None and v != 0}
    for k, v in norm.items():
        if v is None:
            notes.append(f'{k}: skipped, zero form')
        else:
            notes.append(f'{k}: {"holds" if v == 0 else text(v)}')

    ident = relativity.ricci_from_fluids(
        m.fluids, consts, m.metric, b.scalar).identification
    notes.append(f'identified a = {text(ident.a)}')
    r, mf = m.fluids
    expanded = relativity.energy_densities(ident, consts, r.p, mf.p)
    rederived = relativity.energy_densities_rederived(
        ident, consts, r.p, mf.p)
    notes += [
        f'sigma_r closed form = {text(expanded.sigma_r)}',
        f'sigma_m closed form = {text(expanded.sigma_m)}',
        f'sigma_r unit-generator solve = {text(rederived.sigma_r)}',
        f'sigma_m unit-generator solve = {text(rederived.sigma_m)}',
    ]
    if mf.is_zero() and not r.omega.is_zero():
        fb = relativity.perfect_fluid_balance(b, r.omega)
        notes.append(
            f'perfect fluid balance: Lambda - kappa p = {fb.alpha:.10g}, '
            f'kappa (sigma + p) = {fb.beta:.10g}, '
            f'residual {fb.residual_norm:.3e}')
    res = result(bad, notes)
    if bad:
        raise CheckException(
            'field equations do not hold for the given fluids', result=res)
    if off:
        raise FlaggedException(
            f'normalization conditions not met: {", ".join(off)}', res)
    return res


@register('spacematter', STAGE_PHYSICS)
def check_spacematter(s: Session) -> dict:
    m, b = s.manifest, s.bundle
    if m.sigma is None:
        raise CheckException('manifest has no sigma')
    consts = _constants(s)
    T = relativity.stress_energy_from_geometry(b, consts)
    closed = relativity.div_space_matter(b, m.sigma)
    brute = relativity.space_matter_divergence(b, T, consts.kappa, m.sigma)
    point = m.chart.sample
    gap = float(np.max(np.abs(closed.evaluate(point) - brute.evaluate(point))))
    nonzero = closed.nonzero()
    dsigma = relativity.sigma_gradient_from_divP(b)
    law = relativity.contracted_divergence_law(b.n)
    notes = [
        f'closed form vs direct divergence at the sample point: {gap:.3e}',
        'div P = 0' if not nonzero else 'div P does not vanish',
        f'div P = 0 forces dsigma = {text(law)} dr',
        'dsigma from the contraction = [' +
        ', '.join(text(c) for c in dsigma.components) + ']',
    ]
    res = result(nonzero, notes)
    if gap > NUMERIC_ATOL:
        raise CheckException(
            'closed form of div P differs from direct differentiation',
            result=res)
    want = m.expected.get('divergence_free')
    if want is not None and bool(want) == bool(nonzero):
        raise CheckException(
            'div P does not vanish' if nonzero else 'div P vanishes',
            result=res)
    return res


@register('killing', STAGE_BUNDLE)
def check_killing(s: Session) -> dict:
    m = s.manifest
    if not m.vectors:
        raise CheckException('manifest has no vectors')
    notes = []
    failed = []
    entries = []
    expected = m.expected.get('killing', [])
    for name, X in m.vectors.items():
        bad = s.nonzero(geometry.killing_defect(m.metric, X))
        notes.append(f'{name}: {"not Killing" if bad else "Killing"}')
        if bad and name in expected:
            failed.append(name)
            entries.extend(bad)
    res = result(entries, notes)
    if failed:
        raise CheckException(
            f'not Killing: {", ".join(failed)}', result=res)
    return res


@register('vector-fields', STAGE_PHYSICS)
def check_vector_fields(s: Session) -> dict:
    m = s.manifest
    if not m.vectors:
        raise CheckException('manifest has no vectors')
    notes = []
    failed = []
    expected = m.expected.get('character', {})
    for name, U in m.vectors.items():
        ch = geometry.vector_field_character(s.bundle, U)
        d = ch.to_dict()
        line = f'{name}: {", ".join(d["labels"])}'
        for key in ('rho', 'mu'):
            if d[key] is not None:
                line += f'; {key} = {d[key]}'
        notes.append(line)
        want = expected.get(name)
        if want is not None and sorted(want) != sorted(ch.labels):
            failed.append(name)
    S = s.bundle.ricci
    codazzi = not s.nonzero(geometry.codazzi_defect(S, s.bundle))
    cyclic = not s.nonzero(geometry.cyclic_parallel_defect(S, s.bundle))
    notes.append(
        f'Ricci tensor: {"" if codazzi else "not "}Codazzi, '
        f'{"" if cyclic else "not "}cyclic parallel')
    res = result(notes=notes)
    if failed:
        raise CheckException(
            f'unexpected character for {", ".join(failed)}', result=res)
    return res


def ordered(names: list[str]) -> list[str]:
    """Execution order: by stage, then manifest order."""
    return sorted(names, key=lambda n: CHECKS[n].stage)


def run_check(s: Session, name: str) -> dict:
    logging.debug(f'run check; {s.ref(name)}')
    return CHECKS[name].fun(s)

