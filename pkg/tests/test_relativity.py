import numpy as np
import pytest
import sympy
from conftest import euclidean
from coqe import geometry, relativity, symexpr
from coqe.exceptions import AsymmetricTensor, StructureError
from coqe.relativity import FluidComponent, Fluids, GravConstants
from coqe.tensor import COV, OneForm, Tensor


class TestFieldEquations:

    def test_godel_dust(self, godel, godel_bundle):
        T = relativity.stress_energy(godel.fluids, godel.metric)
        res = relativity.efe_residual(godel_bundle, T, godel.constants)
        assert res.is_zero()

    def test_godel_normalization(self, godel):
        norm = relativity.fluid_normalization(godel.fluids, godel.metric)
        assert norm['omega_r(W_r) = -1'] == 2
        others = {k: v for k, v in norm.items() if k != 'omega_r(W_r) = -1'}
        assert all(v is None for v in others.values())

    def test_einstein_desitter_dust(self, eds, eds_bundle):
        T = relativity.stress_energy(eds.fluids, eds.metric)
        assert relativity.efe_residual(
            eds_bundle, T, eds.constants).is_zero()
        norm = relativity.fluid_normalization(eds.fluids, eds.metric)
        assert norm['omega_r(W_r) = -1'] == 0

    def test_zero_kappa(self):
        with pytest.raises(StructureError):
            GravConstants(0, 0)

    def test_asymmetric_shear(self):
        chart = euclidean(4).chart
        vac = FluidComponent.vacuum(chart)
        assert vac.is_zero()
        e = [[0] * 4 for _ in range(4)]
        e[0][1] = 1
        sheared = FluidComponent(
            vac.sigma, vac.p, sympy.Integer(1),
            Tensor(chart, (COV, COV), e), vac.omega, vac.q)
        with pytest.raises(AsymmetricTensor):
            relativity.stress_energy(
                Fluids(sheared, vac), euclidean(4).tensor())


class TestRicciFromFluids:

    def test_einstein_desitter(self, eds, eds_bundle):
        eta = eds.chart.symbols['eta']
        fr = relativity.ricci_from_fluids(
            eds.fluids, eds.constants, eds.metric, eds_bundle.scalar)
        assert symexpr.equivalent(fr.identification.a, 6 / eta**6)
        assert symexpr.equivalent(fr.identification.b[0, 0], 12 / eta**6)
        S = eds_bundle.ricci
        for idx in S.indices():
            assert symexpr.equivalent(fr.ricci[idx], S[idx]), idx

    def test_rederived_densities_are_consistent(self):
        sr, sm, pr, pm = sympy.symbols('sigma_r sigma_m p_r p_m', real=True)
        kappa, lam = sympy.symbols('kappa Lambda', real=True, nonzero=True)
        flat = euclidean(4)
        chart = flat.chart
        vac = FluidComponent.vacuum(chart)
        nil = sympy.Integer(0)

        def fluid(sigma, p, k):
            omega = OneForm(chart, [int(i == k) for i in range(4)])
            return FluidComponent(sigma, p, nil, vac.e, omega, vac.q)

        fluids = Fluids(fluid(sr, pr, 0), fluid(sm, pm, 1))
        consts = GravConstants(kappa, lam)
        # r solving r = 4a + Σ b_ii
        r = 4 * lam - kappa * (sr + sm) - 5 * kappa * (pr + pm)
        ident = relativity.ricci_from_fluids(
            fluids, consts, flat.tensor(), r).identification
        rederived = relativity.energy_densities_rederived(
            ident, consts, pr, pm)
        assert sympy.simplify(rederived.sigma_r - sr) == 0
        assert sympy.simplify(rederived.sigma_m - sm) == 0
        expanded = relativity.energy_densities(ident, consts, pr, pm)
        assert sympy.simplify(expanded.sigma_r - sr) != 0


class TestSpaceMatter:

    @pytest.mark.parametrize('n, factor', [
        (4, 0),
        (5, sympy.Rational(-1, 16)),
        (6, sympy.Rational(-1, 10)),
    ])
    def test_contracted_divergence_law(self, n, factor):
        assert relativity.contracted_divergence_law(n) == factor

    def test_sphere4_divergence_free(self, sphere4, sphere4_bundle):
        assert relativity.div_space_matter(sphere4_bundle, 1).is_zero()
        consts = sphere4.constants
        T = relativity.stress_energy_from_geometry(sphere4_bundle, consts)
        for idx in T.indices():
            assert symexpr.equivalent(T[idx], -3 * sphere4.metric[idx])
        point = sphere4.chart.sample
        brute = relativity.space_matter_divergence(
            sphere4_bundle, T, consts.kappa, 1)
        np.testing.assert_allclose(brute.evaluate(point), 0, atol=1e-9)
        dsigma = relativity.sigma_gradient_from_divP(sphere4_bundle)
        assert dsigma.is_zero()

    def test_sphere4_tensor(self, sphere4, sphere4_bundle):
        T = relativity.stress_energy_from_geometry(
            sphere4_bundle, sphere4.constants)
        P = relativity.space_matter(sphere4_bundle, T, 1, 1).P
        G = geometry.g_tensor(sphere4.metric.tensor())
        point = sphere4.chart.sample
        np.testing.assert_allclose(
            P.evaluate(point), -3 * G.evaluate(point), atol=1e-9)

    def test_closed_form_matches_direct(self, eds, eds_bundle):
        eta = eds.chart.symbols['eta']
        consts = eds.constants
        T = relativity.stress_energy_from_geometry(eds_bundle, consts)
        closed = relativity.div_space_matter(eds_bundle, eta**2)
        brute = relativity.space_matter_divergence(
            eds_bundle, T, consts.kappa, eta**2)
        point = eds.chart.sample
        np.testing.assert_allclose(
            closed.evaluate(point), brute.evaluate(point), atol=1e-8)


def test_perfect_fluid_balance(godel, godel_bundle):
    fb = relativity.perfect_fluid_balance(godel_bundle, godel.fluids.r.omega)
    assert fb.alpha == pytest.approx(0.125)
    assert fb.beta == pytest.approx(0.25)
    assert fb.residual_norm == pytest.approx(0, abs=1e-9)
