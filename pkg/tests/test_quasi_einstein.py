import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies
from conftest import coordinate_structure, euclidean
from coqe import geometry, quasi_einstein as qe, symexpr
from coqe.exceptions import (
    DefinitionViolation,
    DimensionError,
    NoExactFit,
    NonZeroTensorScalars,
    RankDeficient,
    UnverifiedStructure,
    ZeroField,
)
from coqe.quasi_einstein import ClassLabel
from coqe.tensor import COV, OneForm, Tensor, VectorField
from coqe.verdict import Verdict

FLAT4 = euclidean(4)


class TestGodelDecomposition:

    def test_residual_vanishes(self, godel, godel_bundle):
        assert qe.decomposition_residual(
            godel_bundle, godel.structure).is_zero()

    def test_dropping_b34(self, godel, godel_bundle, x):
        mutated = godel.structure.with_b(2, 3, 0)
        res = qe.decomposition_residual(godel_bundle, mutated)
        nonzero = dict(res.nonzero())
        assert set(nonzero) == {(0, 2), (2, 0)}
        assert symexpr.equivalent(nonzero[(0, 2)], 2 * sympy.exp(x))
        with pytest.raises(UnverifiedStructure):
            qe.classify(mutated, godel_bundle)

    def test_classify(self, godel, godel_bundle):
        assert qe.classify(godel.structure, godel_bundle) is \
            ClassLabel.COMPREHENSIVE

    def test_gram(self, godel):
        gram = qe.gram_matrix(godel.metric, godel.structure)
        for i in range(4):
            assert symexpr.simplify(gram[i, i]) == -1
        assert symexpr.equivalent(gram[2, 3], sympy.sqrt(2))
        off = [(i, j) for i in range(4) for j in range(i + 1, 4)
               if symexpr.simplify(gram[i, j]) != 0]
        assert off == [(2, 3)]

    def test_constraints(self, godel, godel_bundle, k, x):
        rep = qe.verify_structure_constraints(godel_bundle, godel.structure)
        verdicts = {c.name: c.verdict for c in rep.constraints}
        assert verdicts['decomposition'] is Verdict.PASS
        for name in ('b-symmetric', 'd1-symmetric', 'd2-symmetric',
                     'omega-nonzero', 'd1-trace-plain', 'd2-trace-plain',
                     'd1-annihilates-W1', 'd2-annihilates-W1',
                     'unit-generators'):
            assert verdicts[name] is Verdict.PASS, name
        assert verdicts['d1-trace-metric'] is Verdict.FLAGGED
        assert verdicts['orthogonal-generators'] is Verdict.FLAGGED
        assert rep.verdict is Verdict.FLAGGED
        assert symexpr.equivalent(
            rep.metric_traces[0],
            1 / k**2 - sympy.exp(2 * x) / (2 * k**2))

    def test_trace_identity(self, godel, godel_bundle, k):
        t = qe.trace_identity(godel_bundle, godel.structure)
        assert symexpr.equivalent(t.unit_value, -1 / k**2)
        assert symexpr.equivalent(t.corrected_value, 1 / k**2)
        assert symexpr.equivalent(t.computed_r, 1 / k**2)
        assert not t.unit_matches
        assert t.corrected_matches
        assert not t.declared_matches

    def test_generator_ricci(self, godel, godel_bundle, k):
        gr = qe.generator_ricci_values(godel_bundle, godel.structure)
        assert all(gr.corrected_holds.values())
        assert not gr.gram_is_identity
        assert symexpr.equivalent(gr.direct[3, 3], 1 / k**2)
        assert all(gr.orthogonality().values())

    def test_generator_orthogonality(self, godel, godel_bundle):
        values = qe.generator_orthogonality(godel_bundle, godel.structure)
        assert len(values) == 6
        assert all(v == 0 for v in values.values())

    def test_length_identity(self, godel, godel_bundle, k):
        li = qe.length_identity(godel_bundle, godel.structure)
        assert symexpr.equivalent(li.s2, 1 / k**4)
        assert li.corrected_holds
        s2 = float(symexpr.eval_at(li.s2, godel.chart.sample))
        assert li.frame_s2 == pytest.approx(s2)


class TestFit:

    def test_godel_fit_reproduces_ricci(self, godel, godel_bundle):
        st = godel.structure
        fit = qe.fit_decomposition(godel_bundle, st.omegas, st.d1, st.d2)
        assert fit.nullity == len(qe.FIT_UNKNOWNS) - fit.rank
        fitted = fit.structure(st.omegas, st.d1, st.d2)
        assert qe.decomposition_residual(godel_bundle, fitted).is_zero()

    def test_rank_deficient(self, godel, godel_bundle):
        st = godel.structure
        with pytest.raises(RankDeficient) as info:
            qe.fit_decomposition(
                godel_bundle, st.omegas, st.d1, st.d2,
                allow_null_space=False)
        assert info.value.nullity > 0

    def test_no_exact_fit(self, godel, godel_bundle, k):
        dt = OneForm(godel.chart, [k, 0, 0, 0])
        zero = Tensor.zeros(godel.chart, (COV, COV))
        with pytest.raises(NoExactFit) as info:
            qe.fit_decomposition(godel_bundle, (dt,) * 4, zero, zero)
        assert info.value.residual_norm > 0

    def test_flat_has_no_decomposition(self, flat4_bundle):
        st = coordinate_structure(FLAT4.chart)
        with pytest.raises(DefinitionViolation):
            qe.fit_decomposition(flat4_bundle, st.omegas, st.d1, st.d2)
        with pytest.raises(DefinitionViolation):
            qe.decomposition_residual(flat4_bundle, st)


class TestSynthesize:

    def test_godel_time_direction(self, godel, godel_bundle, x):
        gens = qe.synthesize_generators(godel_bundle, godel.vectors['U'])
        w2 = [symexpr.simplify(c) for c in gens.omegas[1].components]
        assert w2 == [1, 0, sympy.exp(x), 0]
        Q = godel_bundle.ricci_operator
        w1 = gens.omegas[0]
        for c in range(4):
            oracle = sum(w1[a] * Q[a, c] for a in range(4))
            assert symexpr.equivalent(gens.omegas[1][c], oracle)

    def test_zero_field(self, godel, godel_bundle):
        with pytest.raises(ZeroField):
            qe.synthesize_generators(
                godel_bundle, VectorField(godel.chart, [0, 0, 0, 0]))


def _table_row(pairs, c1, c2):
    b = sympy.zeros(4, 4)
    for i, j in pairs:
        b[i - 1, j - 1] = b[j - 1, i - 1] = 1
    return coordinate_structure(FLAT4.chart, 1, b, int(c1), int(c2))


TAXONOMY = [
    (ClassLabel.EINSTEIN, (), False, False),
    (ClassLabel.QUASI_EINSTEIN, ((1, 1),), False, False),
    (ClassLabel.GENERALIZED, ((1, 1), (2, 2)), False, False),
    (ClassLabel.MIXED_GENERALIZED, ((1, 1), (2, 2), (1, 2)), False, False),
    (ClassLabel.NEARLY, (), True, False),
    (ClassLabel.PSEUDO, ((1, 1),), True, False),
    (ClassLabel.PSEUDO_GENERALIZED, ((1, 1), (2, 2)), True, False),
    (ClassLabel.SUPER, ((1, 1), (1, 2)), True, False),
    (ClassLabel.MIXED, ((1, 2),), False, False),
    (ClassLabel.MIXED_SUPER, ((1, 1), (2, 2), (1, 2)), True, False),
    (ClassLabel.HYPER_GENERALIZED, ((1, 1), (1, 2), (1, 3)), False, False),
    (ClassLabel.COMPREHENSIVE, ((1, 1), (3, 4)), True, True),
]


class TestTaxonomy:

    @pytest.mark.parametrize('label, pairs, c1, c2', TAXONOMY)
    def test_rows(self, label, pairs, c1, c2):
        assert qe.classify_pattern(_table_row(pairs, c1, c2)) is label

    def test_all_zero(self):
        st = coordinate_structure(FLAT4.chart, 0)
        assert qe.classify_pattern(st) is ClassLabel.NONE

    def test_zero_a_is_comprehensive(self):
        st = _table_row(((1, 1),), False, False)
        st = coordinate_structure(FLAT4.chart, 0, st.b)
        assert qe.classify_pattern(st) is ClassLabel.COMPREHENSIVE

    @pytest.mark.parametrize('label, pairs, c1, c2', TAXONOMY[:11])
    def test_c2_makes_comprehensive(self, label, pairs, c1, c2):
        st = _table_row(pairs, c1, True)
        assert qe.classify_pattern(st) is ClassLabel.COMPREHENSIVE

    @given(
        strategies.sampled_from(TAXONOMY),
        strategies.integers(-9, 9).filter(bool),
        strategies.integers(1, 9))
    @settings(max_examples=40, deadline=None)
    def test_scaling_keeps_class(self, row, num, den):
        label, pairs, c1, c2 = row
        scaled = _table_row(pairs, c1, c2).scaled(sympy.Rational(num, den))
        assert qe.classify_pattern(scaled) is label

    @pytest.mark.parametrize('label, pairs, c1, c2', TAXONOMY[:11])
    def test_zeroing_an_entry_changes_class(self, label, pairs, c1, c2):
        if pairs:
            mutated = _table_row(pairs[1:], c1, c2)
        elif c1:
            mutated = _table_row(pairs, False, c2)
        else:
            mutated = coordinate_structure(FLAT4.chart, 0)
        assert qe.classify_pattern(mutated) is not label

    def test_extra_pair_changes_class(self):
        st = _table_row(((1, 1),), False, False).with_b(2, 3, 5)
        assert qe.classify_pattern(st) is ClassLabel.COMPREHENSIVE

    def test_sphere4_is_einstein(self, sphere4, sphere4_bundle):
        assert qe.classify(sphere4.structure, sphere4_bundle) is \
            ClassLabel.EINSTEIN

    def test_einstein_desitter_is_quasi_einstein(self, eds, eds_bundle):
        assert qe.classify(eds.structure, eds_bundle) is \
            ClassLabel.QUASI_EINSTEIN


def _trace_free_tensors(chart):
    n = chart.dim
    d1 = [[0] * n for _ in range(n)]
    d1[0][0], d1[1][1] = 1, -1
    d2 = [[0] * n for _ in range(n)]
    d2[1][2] = d2[2][1] = 1
    return Tensor(chart, (COV, COV), d1), Tensor(chart, (COV, COV), d2)


class TestQuasiConstantCurvature:

    @pytest.mark.parametrize('n', [4, 5])
    def test_random_contractions(self, n):
        g = euclidean(n)
        chart = g.chart
        omegas = tuple(
            OneForm(chart, [int(i == k) for i in range(n)]) for k in range(4))
        d1, d2 = _trace_free_tensors(chart)
        rng = np.random.default_rng(42)
        for _ in range(5):
            qcc = qe.QCCCoefficients.of(
                *(int(v) for v in rng.integers(-3, 4, size=13)))
            contraction = qe.qcc_contract(qcc, g, omegas, d1, d2)
            assert contraction.holds
            W = qe.qcc_weyl(qcc, g, omegas, d1, d2)
            assert W.is_zero()

    def test_contracted_map(self):
        qcc = qe.QCCCoefficients.of(2, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 3)
        b = qcc.contracted(4)
        assert b[0] == 2 * 3 + 1
        assert b[1] == 2
        assert b[12] == 0
        assert qcc.contracted(5)[1] == 3

    def test_coefficient_count(self):
        with pytest.raises(DimensionError):
            qe.QCCCoefficients.of(1, 2, 3)

    @pytest.mark.parametrize('nonzero, name', [
        ((), 'flat'),
        ((1,), 'constant curvature'),
        ((1, 4), 'quasi-constant curvature'),
        ((1, 2, 4, 8), 'super quasi-constant curvature'),
        ((1, 4, 8, 12), 'hyper-generalized quasi-constant curvature'),
        (tuple(range(1, 14)), 'comprehensive quasi-constant curvature'),
    ])
    def test_classify(self, nonzero, name):
        qcc = qe.QCCCoefficients.of(
            *(int(k in nonzero) for k in range(1, 14)))
        assert qe.classify_qcc(qcc) == name

    def test_curvature_contraction_of_g(self, flat4):
        G = geometry.g_tensor(flat4.tensor())
        S = qe.curvature_contraction(G, flat4)
        for idx in S.indices():
            assert S[idx] == 3 * flat4[idx]


class TestSectionalForms:

    def test_needs_zero_tensor_scalars(self):
        st = coordinate_structure(FLAT4.chart, 1, c1=1)
        with pytest.raises(NonZeroTensorScalars):
            qe.sectional_from_structure(st, 4)

    def test_against_structure_curvature(self, flat4):
        b = sympy.zeros(4, 4)
        b[0, 0] = 6
        st = coordinate_structure(flat4.chart, 3, b)
        forms = qe.sectional_from_structure(st, 4)
        assert forms.orthogonal_plane == 0
        assert forms.with_generator[0] == 3
        R = qe.structure_curvature(flat4, st)
        e = [VectorField(flat4.chart, [int(i == k) for i in range(4)])
             for k in range(4)]
        assert geometry.sectional_curvature_from(R, flat4, e[1], e[2]) == \
            forms.orthogonal_plane
        assert geometry.sectional_curvature_from(R, flat4, e[0], e[1]) == \
            forms.with_generator[0]

    def test_conharmonic_scalar(self, x):
        assert qe.conharmonic_scalar(3, 0) == 3
        assert qe.conharmonic_scalar(1, x) == sympy.exp(-2 * x)


class TestExistenceHypothesis:

    def _vectors(self, sphere4):
        chart = sphere4.chart
        return (
            VectorField(chart, [1, 0, 0, 0]),
            VectorField(chart, [0, 1, 0, 0]))

    def test_sphere4(self, sphere4, sphere4_bundle):
        e1, e2 = self._vectors(sphere4)
        zero = Tensor.zeros(sphere4.chart, (COV, COV))
        chi = sphere4.chart.symbols['chi']
        res = qe.existence_hypothesis_residual(
            sphere4_bundle, [1] * 11, zero, zero, e1, e2, e1, e2)
        assert symexpr.equivalent(res.residual, 658 * sympy.sin(chi)**2)
        balanced = [-81] + [0] * 10
        res = qe.existence_hypothesis_residual(
            sphere4_bundle, balanced, zero, zero, e1, e2, e1, e2)
        assert res.residual == 0

    def test_coefficient_count(self, sphere4, sphere4_bundle):
        e1, e2 = self._vectors(sphere4)
        zero = Tensor.zeros(sphere4.chart, (COV, COV))
        with pytest.raises(DimensionError):
            qe.existence_hypothesis_residual(
                sphere4_bundle, [1] * 10, zero, zero, e1, e2, e1, e2)

