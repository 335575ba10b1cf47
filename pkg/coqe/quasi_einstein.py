"""Comprehensive quasi-Einstein structures.

A structure is the data (a, b, c1, c2, ω¹..ω⁴, d1, d2) of the Ricci
decomposition

    S = a·g + Σ_ij b_ij ω^i⊗ω^j + c1·d1 + c2·d2,     b_ij = b_ji,

with generators W_i dual to ω^i. This module verifies, classifies and fits
such decompositions, and builds the matching quasi-constant curvature
ansatz.
"""
from __future__ import annotations
import itertools
import logging
import numpy as np
import sympy
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple, Optional, Sequence
from . import symexpr
from .exceptions import (
    DefinitionViolation,
    DimensionError,
    NoExactFit,
    NonZeroTensorScalars,
    RankDeficient,
    UnverifiedStructure,
    ZeroField,
)
from .geometry import (
    CurvatureBundle,
    conformally_flat_curvature,
    g_tensor,
    kulkarni_nomizu,
    orthonormal_frame,
    ricci_power,
    weyl_from_curvature,
)
from .tensor import (
    COV,
    Metric,
    OneForm,
    Tensor,
    VectorField,
    outer,
    plain_trace,
    symmetric_product,
)
from .verdict import Verdict

Scalar = sympy.Expr
_ZERO = sympy.Integer(0)

# unordered generator pairs in the order the 13 fit unknowns use them
B_PAIRS = tuple((i, j) for i in range(4) for j in range(i, 4))
FIT_UNKNOWNS = ('a',) + tuple(f'b{i + 1}{j + 1}' for i, j in B_PAIRS) + \
    ('c1', 'c2')


@dataclass(frozen=True)
class CoQEStructure:
    a: Scalar
    b: sympy.ImmutableMatrix
    c1: Scalar
    c2: Scalar
    omegas: tuple[OneForm, ...]
    d1: Tensor
    d2: Tensor
    declared_r: Optional[Scalar] = None

    def __post_init__(self):
        if self.b.shape != (4, 4):
            raise DimensionError(f'b must be 4x4, got {self.b.shape}')
        if len(self.omegas) != 4:
            raise DimensionError(
                f'four associated 1-forms needed, got {len(self.omegas)}')

    @property
    def chart(self):
        return self.d1.chart

    def bij(self, i: int, j: int) -> Scalar:
        return self.b[i, j]

    def generators(self, metric: Metric) -> list[VectorField]:
        return [metric.raise_(w) for w in self.omegas]

    def scaled(self, lam) -> CoQEStructure:
        """Scale the associated scalars; the zero pattern is unchanged."""
        return replace(
            self, a=self.a * lam, b=sympy.ImmutableMatrix(self.b * lam),
            c1=self.c1 * lam, c2=self.c2 * lam)

    def with_b(self, i: int, j: int, value) -> CoQEStructure:
        """Copy with b_ij = b_ji = value (0-based indices)."""
        b = sympy.Matrix(self.b)
        b[i, j] = b[j, i] = sympy.sympify(value)
        return replace(self, b=sympy.ImmutableMatrix(b))

    def scalars(self) -> dict[str, Scalar]:
        out = {'a': self.a}
        for i, j in B_PAIRS:
            out[f'b{i + 1}{j + 1}'] = self.b[i, j]
        out['c1'] = self.c1
        out['c2'] = self.c2
        return out


def model_ricci(metric: Tensor, st: CoQEStructure) -> Tensor:
    """a·g + Σ b_ij ω^i⊗ω^j + c1·d1 + c2·d2."""
    w = st.omegas

    def comp(x, y):
        val = st.a * metric[x, y] + st.c1 * st.d1[x, y] + st.c2 * st.d2[x, y]
        for i, j in itertools.product(range(4), repeat=2):
            if st.b[i, j] != 0:
                val += st.b[i, j] * w[i][x] * w[j][y]
        return val

    return Tensor.from_function(metric.chart, (COV, COV), comp)


def _require_nonzero_ricci(bundle: CurvatureBundle):
    if bundle.ricci.is_zero():
        raise DefinitionViolation(
            'Ricci tensor is zero; definition requires non-zero')


def decomposition_residual(
        bundle: CurvatureBundle,
        st: CoQEStructure) -> Tensor:
    """S − [a·g + Σ b_ij ω^i⊗ω^j + c1·d1 + c2·d2]."""
    if bundle.n < 4:
        raise DimensionError(
            f'four generators need dimension >= 4, got {bundle.n}')
    _require_nonzero_ricci(bundle)
    model = model_ricci(bundle.metric, st)
    S = bundle.ricci
    return Tensor.from_function(
        bundle.chart, (COV, COV),
        lambda x, y: symexpr.simplify(S[x, y] - model[x, y]))


def gram_matrix(metric: Metric, st: CoQEStructure) -> sympy.Matrix:
    """g(W_i, W_j) = g^{-1}(ω^i, ω^j)."""
    return sympy.Matrix(4, 4, lambda i, j: metric.inner_forms(
        st.omegas[i], st.omegas[j]))


@dataclass
class Constraint:
    name: str
    verdict: Verdict
    residuals: list[tuple[tuple[int, ...], Scalar]] = field(
        default_factory=list)
    convention: Optional[str] = None
    note: str = ''


@dataclass
class StructureReport:
    constraints: list[Constraint]
    gram: sympy.Matrix
    plain_traces: tuple[Scalar, Scalar]
    metric_traces: tuple[Scalar, Scalar]
    residual: Optional[Tensor]
    residual_zero: bool

    @property
    def verdict(self) -> Verdict:
        return Verdict.worst(c.verdict for c in self.constraints)

    def constraint(self, name: str) -> Constraint:
        return next(c for c in self.constraints if c.name == name)


def _nonzero_entries(values) -> list[tuple[tuple[int, ...], Scalar]]:
    out = []
    for idx, value in values:
        value = symexpr.simplify(value)
        if value != 0:
            out.append((idx, value))
    return out


def verify_structure_constraints(
        bundle: CurvatureBundle,
        st: CoQEStructure) -> StructureReport:
    """Check every structural requirement of the definition.

    Hard requirements fail. Unit length, orthogonality and the metric trace
    are flagged when the decomposition still holds and fail otherwise.
    """
    g = bundle.metric
    constraints: list[Constraint] = []

    residual: Optional[Tensor] = None
    try:
        residual = decomposition_residual(bundle, st)
    except DefinitionViolation as e:
        constraints.append(
            Constraint('non-zero-ricci', Verdict.FAIL, note=str(e)))
        residual_zero = False
    else:
        bad = residual.nonzero()
        residual_zero = not bad
        constraints.append(Constraint(
            'decomposition',
            Verdict.PASS if residual_zero else Verdict.FAIL, bad))
    soft = Verdict.FLAGGED if residual_zero else Verdict.FAIL

    def hard(name, entries, convention=None, note=''):
        constraints.append(Constraint(
            name, Verdict.FAIL if entries else Verdict.PASS, entries,
            convention, note))

    def flagged(name, entries, convention=None, note=''):
        constraints.append(Constraint(
            name, soft if entries else Verdict.PASS, entries,
            convention, note))

    hard('b-symmetric', _nonzero_entries(
        ((i, j), st.b[i, j] - st.b[j, i])
        for i in range(4) for j in range(i + 1, 4)))
    for name, d in (('d1', st.d1), ('d2', st.d2)):
        hard(f'{name}-symmetric', _nonzero_entries(
            ((i, j), d[i, j] - d[j, i])
            for i in range(d.dim) for j in range(i + 1, d.dim)))
    hard('omega-nonzero', [
        ((i,), _ZERO) for i, w in enumerate(st.omegas) if w.is_zero()],
        note='listed 1-forms vanish identically')

    plain = (plain_trace(st.d1), plain_trace(st.d2))
    metric_tr = (g.trace(st.d1), g.trace(st.d2))
    for k, name in enumerate(('d1', 'd2')):
        hard(f'{name}-trace-plain', _nonzero_entries([((), plain[k])]),
             convention='plain')
    for k, name in enumerate(('d1', 'd2')):
        flagged(f'{name}-trace-metric', _nonzero_entries([((), metric_tr[k])]),
                convention='metric')

    W1 = g.raise_(st.omegas[0])
    for name, d in (('d1', st.d1), ('d2', st.d2)):
        hard(f'{name}-annihilates-W1', _nonzero_entries(
            ((x,), sum((d[x, y] * W1[y] for y in range(g.dim)), _ZERO))
            for x in range(g.dim)))

    gram = gram_matrix(g, st)
    flagged('unit-generators', _nonzero_entries(
        ((i, i), sympy.Abs(gram[i, i]) - 1) for i in range(4)),
        note='|g(W_i, W_i)| = 1')
    flagged('orthogonal-generators', _nonzero_entries(
        ((i, j), gram[i, j]) for i in range(4) for j in range(i + 1, 4)),
        note='g(W_i, W_j) = 0 for i != j')

    return StructureReport(
        constraints, gram, plain, metric_tr, residual, residual_zero)


class ClassLabel(Enum):
    EINSTEIN = 'Einstein'
    QUASI_EINSTEIN = 'quasi-Einstein'
    GENERALIZED = 'generalized QE'
    MIXED_GENERALIZED = 'mixed generalized QE'
    NEARLY = 'nearly QE'
    PSEUDO = 'pseudo QE'
    PSEUDO_GENERALIZED = 'pseudo generalized QE'
    SUPER = 'super QE'
    MIXED = 'mixed QE'
    MIXED_SUPER = 'mixed super QE'
    HYPER_GENERALIZED = 'hyper-generalized QE'
    COMPREHENSIVE = 'comprehensive QE'
    NONE = 'none-of-listed'


# (nonzero unordered b pairs, c1 nonzero, c2 nonzero); a is always nonzero
_TABLE: tuple[tuple[ClassLabel, frozenset, bool, bool], ...] = tuple(
    (label, frozenset(pairs), c1, c2) for label, pairs, c1, c2 in (
        (ClassLabel.EINSTEIN, (), False, False),
        (ClassLabel.QUASI_EINSTEIN, ((1, 1),), False, False),
        (ClassLabel.GENERALIZED, ((1, 1), (2, 2)), False, False),
        (ClassLabel.MIXED_GENERALIZED,
         ((1, 1), (2, 2), (1, 2)), False, False),
        (ClassLabel.NEARLY, (), True, False),
        (ClassLabel.PSEUDO, ((1, 1),), True, False),
        (ClassLabel.PSEUDO_GENERALIZED, ((1, 1), (2, 2)), True, False),
        (ClassLabel.SUPER, ((1, 1), (1, 2)), True, False),
        (ClassLabel.MIXED, ((1, 2),), False, False),
        (ClassLabel.MIXED_SUPER, ((1, 1), (2, 2), (1, 2)), True, False),
        (ClassLabel.HYPER_GENERALIZED,
         ((1, 1), (1, 2), (1, 3)), False, False),
    ))


def _nz(e: Scalar) -> bool:
    return symexpr.simplify(e) != 0


def classify_pattern(st: CoQEStructure) -> ClassLabel:
    """Match the zero pattern of (a, b, c1, c2) against the table rows,
    most specific row first."""
    pairs = frozenset(
        (i + 1, j + 1) for i, j in B_PAIRS
        if _nz(st.b[i, j]) or _nz(st.b[j, i]))
    c1, c2 = _nz(st.c1), _nz(st.c2)
    a = _nz(st.a)
    if not (a or pairs or c1 or c2):
        return ClassLabel.NONE
    if a:
        rows = sorted(_TABLE, key=lambda r: -(len(r[1]) + r[2] + r[3]))
        for label, row_pairs, row_c1, row_c2 in rows:
            if pairs == row_pairs and c1 == row_c1 and c2 == row_c2:
                return label
    return ClassLabel.COMPREHENSIVE


def classify(st: CoQEStructure, bundle: CurvatureBundle) -> ClassLabel:
    """Classify a structure whose decomposition residual vanishes."""
    residual = decomposition_residual(bundle, st)
    if not residual.is_zero():
        raise UnverifiedStructure(
            'decomposition residual is not zero; structure is not verified')
    return classify_pattern(st)


@dataclass
class TraceIdentity:
    unit_value: Scalar
    corrected_value: Scalar
    computed_r: Scalar
    declared_r: Optional[Scalar]
    unit_matches: symexpr.Equivalence
    corrected_matches: symexpr.Equivalence
    declared_matches: Optional[symexpr.Equivalence]


def trace_identity(
        bundle: CurvatureBundle,
        st: CoQEStructure,
        seed: int = 42) -> TraceIdentity:
    """Compare r = g^{ij}S_ij with a·n + Σ b_ii (δ-normalized generators)
    and with a·n + Σ b_ij g(W_i,W_j) + c1·tr_g d1 + c2·tr_g d2."""
    n, g = bundle.n, bundle.metric
    gram = gram_matrix(g, st)
    unit = symexpr.simplify(
        st.a * n + sum((st.b[i, i] for i in range(4)), _ZERO))
    corrected = symexpr.simplify(
        st.a * n +
        sum((st.b[i, j] * gram[i, j]
             for i in range(4) for j in range(4)), _ZERO) +
        st.c1 * g.trace(st.d1) + st.c2 * g.trace(st.d2))
    r = bundle.scalar
    declared = st.declared_r
    return TraceIdentity(
        unit, corrected, r, declared,
        symexpr.equivalent(unit, r, seed=seed),
        symexpr.equivalent(corrected, r, seed=seed),
        None if declared is None else
        symexpr.equivalent(declared, r, seed=seed))


# pairs with a closed form for S(W_i, W_j), 0-based
EXPANDED_PAIRS = (
    (0, 0), (1, 1), (2, 2), (3, 3), (0, 1),
    (1, 2), (2, 3), (2, 0), (3, 0), (1, 3))


@dataclass
class GeneratorRicci:
    direct: sympy.Matrix
    expanded: dict[tuple[int, int], Scalar]
    corrected: dict[tuple[int, int], Scalar]
    expanded_holds: dict[tuple[int, int], bool]
    corrected_holds: dict[tuple[int, int], bool]
    gram_is_identity: bool

    def orthogonality(self) -> dict[tuple[int, int], bool]:
        """QW_i ⊥ W_j, that is S(W_i, W_j) = 0, for i < j."""
        return {
            (i, j): symexpr.simplify(self.direct[i, j]) == 0
            for i in range(4) for j in range(i + 1, 4)}


def generator_ricci_values(
        bundle: CurvatureBundle,
        st: CoQEStructure,
        seed: int = 42) -> GeneratorRicci:
    g, S = bundle.metric, bundle.ricci
    Ws = st.generators(g)
    n = bundle.n

    def bil(T: Tensor, X: VectorField, Y: VectorField) -> Scalar:
        return symexpr.simplify(sum((
            T[x, y] * X[x] * Y[y]
            for x in range(n) for y in range(n)
            if T[x, y] != 0), _ZERO))

    direct = sympy.Matrix(4, 4, lambda i, j: bil(S, Ws[i], Ws[j]))
    gram = gram_matrix(g, st)
    d1w = sympy.Matrix(4, 4, lambda i, j: bil(st.d1, Ws[i], Ws[j]))
    d2w = sympy.Matrix(4, 4, lambda i, j: bil(st.d2, Ws[i], Ws[j]))

    expanded: dict[tuple[int, int], Scalar] = {}
    for i, j in EXPANDED_PAIRS:
        if i == j:
            val = st.a + st.b[i, i]
            if i > 0:
                val += st.c1 * d1w[i, i] + st.c2 * d2w[i, j]
        elif 0 in (i, j):
            val = st.b[i, j]
        else:
            val = st.b[i, j] + st.c1 * d1w[i, j] + st.c2 * d2w[i, j]
        expanded[(i, j)] = symexpr.simplify(val)

    corrected = {
        (i, j): symexpr.simplify(
            st.a * gram[i, j] +
            sum((st.b[k, m] * gram[k, i] * gram[m, j]
                 for k in range(4) for m in range(4)), _ZERO) +
            st.c1 * d1w[i, j] + st.c2 * d2w[i, j])
        for i, j in EXPANDED_PAIRS}

    return GeneratorRicci(
        direct,
        expanded,
        corrected,
        {p: bool(symexpr.equivalent(v, direct[p], seed=seed))
         for p, v in expanded.items()},
        {p: bool(symexpr.equivalent(v, direct[p], seed=seed))
         for p, v in corrected.items()},
        (gram - sympy.eye(4)).applyfunc(symexpr.simplify).is_zero_matrix
        is True)


def generator_orthogonality(
        bundle: CurvatureBundle,
        st: CoQEStructure) -> dict[tuple[int, int], Scalar]:
    """S(W_i, W_j) for i < j; QW_i is orthogonal to W_j where it vanishes."""
    g, S, n = bundle.metric, bundle.ricci, bundle.n
    Ws = st.generators(g)
    return {
        (i, j): symexpr.simplify(sum((
            S[x, y] * Ws[i][x] * Ws[j][y]
            for x in range(n) for y in range(n)), _ZERO))
        for i in range(4) for j in range(i + 1, 4)}


@dataclass
class LengthIdentity:
    s2: Scalar
    t1_2: Scalar
    t2_2: Scalar
    unit_lhs: Scalar
    unit_rhs: Scalar
    corrected_rhs: Scalar
    frame_s2: float
    unit_holds: symexpr.Equivalence
    corrected_holds: symexpr.Equivalence


def _norm2(g: Metric, A: Tensor, B: Tensor) -> Scalar:
    """g^{ik} g^{jl} A_ij B_kl, the trace of the endomorphism product."""
    n, inv = g.dim, g.inverse
    Am = inv * A.as_matrix()
    Bm = inv * B.as_matrix()
    return symexpr.simplify((Am * Bm).trace()) if n else _ZERO


def length_identity_for(
        g: Metric,
        S: Tensor,
        st: CoQEStructure,
        seed: int = 42) -> LengthIdentity:
    """Length identities of a decomposition with Ricci tensor S."""
    n = g.dim
    gram = gram_matrix(g, st)
    Ws = st.generators(g)
    a, b, c1, c2 = st.a, st.b, st.c1, st.c2

    s2 = _norm2(g, S, S)
    t1 = _norm2(g, st.d1, st.d1)
    t2 = _norm2(g, st.d2, st.d2)

    def dW(d, i, j):
        return sum((d[x, y] * Ws[i][x] * Ws[j][y]
                    for x in range(n) for y in range(n)), _ZERO)

    # expansion with the generators taken orthonormal
    unit_lhs = s2 - c1 * t1 - c2 * t2
    unit_rhs = n * a**2 + sum((b[i, i]**2 for i in range(4)), _ZERO) + \
        2 * a * sum((b[i, i] for i in range(4)), _ZERO) + \
        2 * sum((b[i, j]**2 for i, j in (
            (0, 1), (1, 2), (0, 3), (2, 3), (0, 2), (1, 3))), _ZERO)
    for c, d in ((c1, st.d1), (c2, st.d2)):
        unit_rhs += 2 * c * (
            b[1, 1] * dW(d, 1, 1) + b[2, 2] * dW(d, 2, 2) +
            b[3, 3] * dW(d, 3, 3) + 2 * b[1, 2] * dW(d, 1, 2) +
            2 * b[2, 3] * dW(d, 3, 2) + 2 * b[1, 3] * dW(d, 1, 3))
    unit_rhs += (c1 + c2) * _norm2(g, st.d1, st.d2)

    # exact expansion of |S|² for any Gram matrix
    trB = sum((b[i, j] * gram[i, j]
               for i in range(4) for j in range(4)), _ZERO)
    B2 = sum((b[i, j] * b[k, m] * gram[i, k] * gram[j, m]
              for i, j, k, m in itertools.product(range(4), repeat=4)),
             _ZERO)
    Bd1 = sum((b[i, j] * dW(st.d1, i, j)
               for i in range(4) for j in range(4)), _ZERO)
    Bd2 = sum((b[i, j] * dW(st.d2, i, j)
               for i in range(4) for j in range(4)), _ZERO)
    corrected = n * a**2 + \
        2 * a * (trB + c1 * g.trace(st.d1) + c2 * g.trace(st.d2)) + \
        B2 + c1**2 * t1 + c2**2 * t2 + 2 * c1 * Bd1 + 2 * c2 * Bd2 + \
        2 * c1 * c2 * _norm2(g, st.d1, st.d2)

    frame, eps = orthonormal_frame(g)
    Sm = S.evaluate(g.chart.sample)
    Gm = g.numeric_at(g.chart.sample)
    Qm = np.linalg.solve(Gm, Sm)
    frame_s2 = float(sum(
        e * (Qm @ v) @ Sm @ v for v, e in zip(frame, eps)))

    unit_rhs = symexpr.simplify(unit_rhs)
    corrected = symexpr.simplify(corrected)
    return LengthIdentity(
        s2, t1, t2, symexpr.simplify(unit_lhs), unit_rhs, corrected,
        frame_s2,
        symexpr.equivalent(unit_lhs, unit_rhs, seed=seed),
        symexpr.equivalent(s2, corrected, seed=seed))


def length_identity(
        bundle: CurvatureBundle,
        st: CoQEStructure,
        seed: int = 42) -> LengthIdentity:
    return length_identity_for(bundle.metric, bundle.ricci, st, seed=seed)


@dataclass
class FitResult:
    scalars: dict[str, Scalar]
    rank: int
    numeric_rank: int
    null_space: list[dict[str, Scalar]]

    @property
    def nullity(self) -> int:
        return len(self.null_space)

    def structure(
            self,
            omegas: Sequence[OneForm],
            d1: Tensor,
            d2: Tensor) -> CoQEStructure:
        s = self.scalars
        b = sympy.zeros(4, 4)
        for i, j in B_PAIRS:
            b[i, j] = b[j, i] = s[f'b{i + 1}{j + 1}']
        return CoQEStructure(
            s['a'], sympy.ImmutableMatrix(b), s['c1'], s['c2'],
            tuple(omegas), d1, d2)


def _fit_columns(
        metric: Metric,
        omegas: Sequence[OneForm],
        d1: Tensor,
        d2: Tensor) -> list[Tensor]:
    cols: list[Tensor] = [metric.tensor()]
    for i, j in B_PAIRS:
        if i == j:
            cols.append(outer(omegas[i], omegas[i]))
        else:
            cols.append(symmetric_product(omegas[i], omegas[j]))
    cols += [d1, d2]
    return cols


def fit_decomposition(
        bundle: CurvatureBundle,
        omegas: Sequence[OneForm],
        d1: Tensor,
        d2: Tensor,
        seed: int = 42,
        samples: int = 26,
        allow_null_space: bool = True) -> FitResult:
    """Solve S_ij = a·g_ij + Σ b_kl ω^k_i ω^l_j + c1·d1_ij + c2·d2_ij.

    The system is reduced symbolically, so the scalars may be functions on
    the chart. The generic rank is confirmed numerically at `samples`
    seeded chart points. Free unknowns are set to zero and the null space
    basis is reported.
    """
    _require_nonzero_ricci(bundle)
    if any(w.is_zero() for w in omegas):
        raise ZeroField('associated 1-forms must be nonzero')
    g, S, n = bundle.metric, bundle.ricci, bundle.n
    cols = _fit_columns(g, omegas, d1, d2)
    rows = [(x, y) for x in range(n) for y in range(x, n)]
    system = sympy.Matrix(len(rows), len(cols) + 1, lambda r, c: (
        cols[c][rows[r]] if c < len(cols) else S[rows[r]]))

    rng = np.random.default_rng(seed)
    numeric_rank = 0
    for _ in range(samples):
        point = g.chart.random_point(rng)
        try:
            coeffs = np.array(
                [[float(symexpr.eval_at(system[r, c], point))
                  for c in range(len(cols))] for r in range(len(rows))])
        except symexpr.ExprError:
            continue
        numeric_rank = max(numeric_rank, int(np.linalg.matrix_rank(coeffs)))

    reduced, pivots = system.rref(
        iszerofunc=lambda e: symexpr.simplify(e) == 0,
        simplify=symexpr.simplify)
    if len(cols) in pivots:
        point = g.chart.sample
        A = np.array([[float(symexpr.eval_at(system[r, c], point))
                       for c in range(len(cols))] for r in range(len(rows))])
        rhs = np.array([float(symexpr.eval_at(S[p], point)) for p in rows])
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        norm = float(np.linalg.norm(A @ sol - rhs))
        raise NoExactFit(
            f'Ricci tensor is not in the span of the decomposition; '
            f'least squares residual {norm:.3e} at the sample point', norm)

    rank = len(pivots)
    if rank != numeric_rank:
        logging.warning(
            f'symbolic rank {rank} differs from numeric rank {numeric_rank}')
    free = [c for c in range(len(cols)) if c not in pivots]
    if free and not allow_null_space:
        raise RankDeficient(
            f'decomposition system is rank deficient; null space dimension '
            f'{len(free)}', len(free))

    scalars = {name: _ZERO for name in FIT_UNKNOWNS}
    for r, p in enumerate(pivots):
        scalars[FIT_UNKNOWNS[p]] = symexpr.simplify(reduced[r, len(cols)])
    null_space = []
    for f in free:
        vec = {name: _ZERO for name in FIT_UNKNOWNS}
        vec[FIT_UNKNOWNS[f]] = sympy.Integer(1)
        for r, p in enumerate(pivots):
            vec[FIT_UNKNOWNS[p]] = symexpr.simplify(-reduced[r, f])
        null_space.append(vec)
    return FitResult(scalars, rank, numeric_rank, null_space)


class Generators(NamedTuple):
    omegas: tuple[OneForm, ...]
    degenerate: tuple[int, ...]


def synthesize_generators(
        bundle: CurvatureBundle,
        U: VectorField) -> Generators:
    """ω¹ = g(·,U) and ω^{k+1}(X) = ω¹(Q^k X) for k = 1, 2, 3."""
    g, chart, n = bundle.metric, bundle.chart, bundle.n
    if U.is_zero():
        raise ZeroField('the vector field must not vanish')
    Q = bundle.ricci_operator
    forms = [g.lower(U)]
    for _ in range(3):
        prev = forms[-1]
        forms.append(OneForm(chart, [
            symexpr.simplify(sum(
                (prev[a] * Q[a, c] for a in range(n)), _ZERO))
            for c in range(n)]))
    degenerate = tuple(i for i, w in enumerate(forms) if w.is_zero())
    if degenerate:
        logging.info(f'degenerate generators {degenerate} on {chart}')
    return Generators(tuple(forms), degenerate)


@dataclass
class ExistenceResidual:
    residual: Scalar
    lhs: Scalar
    terms: dict[str, Scalar]


def existence_hypothesis_residual(
        bundle: CurvatureBundle,
        coeffs: Sequence,
        d1: Tensor,
        d2: Tensor,
        X: VectorField,
        Y: VectorField,
        Z: VectorField,
        W: VectorField) -> ExistenceResidual:
    """LHS − RHS of the Ricci power hypothesis, evaluated literally at
    (X, Y, Z, W); `coeffs` holds a0..a10."""
    if len(coeffs) != 11:
        raise DimensionError(f'eleven coefficients needed, got {len(coeffs)}')
    a = [sympy.sympify(c) for c in coeffs]
    n, g = bundle.n, bundle.metric
    S1 = bundle.ricci
    S2 = ricci_power(bundle, 2)
    S3 = ricci_power(bundle, 3)

    def f(T, U, V):
        return sum((T[x, y] * U[x] * V[y]
                    for x in range(n) for y in range(n)), _ZERO)

    terms = {
        'S(Y,Z)S(X,W)': f(S1, Y, Z) * f(S1, X, W),
        'a0': -a[0] * f(S1, X, Z) * f(S1, Y, W),
        'a1': a[1] * (f(S1, X, Y) * f(g, Z, W) + f(S1, Z, W) * f(g, X, Y)),
        'a2': a[2] * (f(S2, X, Y) * f(g, Z, W) + f(S2, Z, W) * f(g, X, Y)),
        'a3': a[3] * (f(S3, X, Y) * f(g, Z, W) + f(S3, Z, W) * f(g, X, Y)),
        'a4': a[4] * (f(S2, X, Y) * f(S1, Z, W) + f(S2, Z, W) * f(S1, X, Y)),
        'a5': a[5] * (f(g, Y, Z) * f(g, X, W) - f(g, Y, W) * f(g, X, Z)),
        'a6': a[6] * (f(S3, X, Y) * f(S1, Z, W) + f(S3, Z, W) * f(S1, X, Y)),
        'a7': a[7] * (f(S3, X, Y) * f(S2, Z, W) + f(S3, Z, W) * f(S2, X, Y)),
        'a8': a[8] * f(d1, X, W) * f(g, Y, Z),
        'a9': a[9] * f(d2, X, W) * f(g, Y, Z),
        'a10': a[10] * f(S2, X, Z) * f(S2, Y, W),
    }
    terms = {k: symexpr.simplify(v) for k, v in terms.items()}
    lhs = symexpr.simplify(f(S3, X, Z) * f(S3, Y, W))
    residual = symexpr.simplify(lhs - sum(terms.values(), _ZERO))
    return ExistenceResidual(residual, lhs, terms)


@dataclass(frozen=True)
class QCCCoefficients:
    a: tuple[Scalar, ...]

    def __post_init__(self):
        if len(self.a) != 13:
            raise DimensionError(
                f'thirteen coefficients needed, got {len(self.a)}')

    @classmethod
    def of(cls, *values) -> QCCCoefficients:
        return cls(tuple(sympy.sympify(v) for v in values))

    def contracted(self, n: int) -> tuple[Scalar, ...]:
        """b1..b13 of the contracted ansatz."""
        a = self.a
        k = n - 2
        return (
            a[0] * (n - 1) + a[3] + a[4] + a[5] + a[6],
            k * a[3], k * a[4], k * a[5], k * a[6],
            k * a[7], k * a[8], k * a[9], k * a[10], k * a[11], k * a[12],
            k * a[1], k * a[2],
        )


# generator pairs of the mixed blocks a8..a13, 0-based
QCC_MIXED_PAIRS = ((0, 1), (0, 3), (1, 2), (1, 3), (2, 0), (2, 3))


def _qcc_tensors(
        g: Tensor,
        omegas: Sequence[OneForm],
        d1: Tensor,
        d2: Tensor) -> list[Tensor]:
    """The symmetric (0,2) tensors paired with the metric in the ansatz."""
    return [d1, d2] + [outer(w, w) for w in omegas] + [
        symmetric_product(omegas[i], omegas[j]) for i, j in QCC_MIXED_PAIRS]


def build_qcc_curvature(
        qcc: QCCCoefficients,
        g: Tensor,
        omegas: Sequence[OneForm],
        d1: Tensor,
        d2: Tensor) -> Tensor:
    """a1·G + Σ_k a_k·(g∧A_k) with A_k = d1, d2, ω^iω^i, ω^iω^j+ω^jω^i."""
    if g.dim < 3:
        raise DimensionError(f'need dimension > 2, got {g.dim}')
    blocks = [g_tensor(g)] + [
        kulkarni_nomizu(g, A, check=False)
        for A in _qcc_tensors(g, omegas, d1, d2)]
    return Tensor.from_function(
        g.chart, (COV,) * 4,
        lambda *i: sum((
            c * B[i] for c, B in zip(qcc.a, blocks) if c != 0), _ZERO))


@dataclass
class QCCContraction:
    ricci: Tensor
    model: Tensor
    residual: Tensor

    @property
    def holds(self) -> bool:
        return self.residual.is_zero()


def curvature_contraction(R: Tensor, metric: Metric) -> Tensor:
    """S(Y,Z) = g^{XW} R(X,Y,Z,W)."""
    n, inv = metric.dim, metric.inverse
    return Tensor.from_function(
        metric.chart, (COV, COV),
        lambda y, z: sum((
            inv[x, w] * R[x, y, z, w]
            for x in range(n) for w in range(n) if inv[x, w] != 0), _ZERO))


def qcc_contract(
        qcc: QCCCoefficients,
        g: Metric,
        omegas: Sequence[OneForm],
        d1: Tensor,
        d2: Tensor) -> QCCContraction:
    """Contract the ansatz and compare with b1·g + b2·ω¹ω¹ + ... + b13·d2."""
    n = g.dim
    R = build_qcc_curvature(qcc, g, omegas, d1, d2)
    S = curvature_contraction(R, g)
    b = qcc.contracted(n)
    w = omegas
    model_parts = [g.tensor()] + [outer(x, x) for x in w] + [
        symmetric_product(w[i], w[j]) for i, j in QCC_MIXED_PAIRS] + [d1, d2]
    model = Tensor.from_function(
        g.chart, (COV, COV),
        lambda *i: sum((c * T[i] for c, T in zip(b, model_parts)), _ZERO))
    residual = Tensor.from_function(
        g.chart, (COV, COV),
        lambda *i: symexpr.simplify(S[i] - model[i]))
    return QCCContraction(S, model, residual)


def qcc_weyl(
        qcc: QCCCoefficients,
        g: Metric,
        omegas: Sequence[OneForm],
        d1: Tensor,
        d2: Tensor,
        simplify: bool = True) -> Tensor:
    """Algebraic Weyl tensor of the ansatz, from its own contraction."""
    R = build_qcc_curvature(qcc, g, omegas, d1, d2)
    S = curvature_contraction(R, g)
    n, inv = g.dim, g.inverse
    r = sum((inv[i, j] * S[i, j] for i in range(n) for j in range(n)), _ZERO)
    return weyl_from_curvature(R, g, S, r, simplify=simplify)


_QCC_CASES: tuple[tuple[str, frozenset], ...] = tuple(
    (name, frozenset(idx)) for name, idx in (
        ('constant curvature', (1,)),
        ('quasi-constant curvature', (1, 4)),
        ('generalized quasi-constant curvature', (1, 4, 5)),
        ('pseudo quasi-constant curvature', (1, 2, 4)),
        ('pseudo generalized quasi-constant curvature', (1, 2, 4, 5)),
        ('mixed quasi-constant curvature', (1, 8)),
        ('super quasi-constant curvature', (1, 2, 4, 8)),
        ('mixed super quasi-constant curvature', (1, 2, 4, 5, 8)),
        ('nearly quasi-constant curvature', (1, 2)),
        ('mixed generalized quasi-constant curvature', (1, 4, 5, 8)),
        ('hyper-generalized quasi-constant curvature', (1, 4, 8, 12)),
    ))


def classify_qcc(qcc: QCCCoefficients) -> str:
    nonzero = frozenset(k + 1 for k, c in enumerate(qcc.a) if _nz(c))
    if not nonzero:
        return 'flat'
    for name, pattern in _QCC_CASES:
        if nonzero == pattern:
            return name
    return 'comprehensive quasi-constant curvature'


@dataclass
class SectionalForms:
    orthogonal_plane: Scalar
    with_generator: tuple[Scalar, Scalar, Scalar, Scalar]


def sectional_from_structure(st: CoQEStructure, n: int) -> SectionalForms:
    """Sectional curvatures of a conformally flat structure with c1 = c2 = 0
    for planes orthogonal to every generator or containing one of them."""
    if _nz(st.c1) or _nz(st.c2):
        raise NonZeroTensorScalars(
            'closed forms need c1 = 0 = c2')
    a, b = st.a, st.b
    den = (n - 1) * (n - 2)
    diag = [b[i, i] for i in range(4)]
    orth = symexpr.simplify((a * (n - 2) - sum(diag, _ZERO)) / den)
    with_w = tuple(
        symexpr.simplify((
            (a + diag[i]) * (n - 2) -
            sum((diag[j] for j in range(4) if j != i), _ZERO)) / den)
        for i in range(4))
    return SectionalForms(orth, with_w)  # type: ignore


def structure_curvature(metric: Metric, st: CoQEStructure) -> Tensor:
    """Curvature of the conformally flat manifold whose Ricci tensor is the
    structure's decomposition."""
    S = model_ricci(metric, st)
    r = metric.trace(S)
    return conformally_flat_curvature(metric, S, r)


def conharmonic_scalar(a, sigma) -> Scalar:
    """ã = e^{−2σ}a under a conharmonic change of the metric."""
    return symexpr.simplify(sympy.exp(-2 * sympy.sympify(sigma)) * a)
