"""Two viscous fluid spacetimes and the space-matter tensor.

κ is the scalar multiplying T and Λ the scalar multiplying g in

    S − (r/2)·g + Λ·g = κ·T.
"""
from __future__ import annotations
import logging
import numpy as np
import sympy
from dataclasses import dataclass
from typing import NamedTuple, Optional
from . import symexpr
from .exceptions import AsymmetricTensor, StructureError
from .geometry import (
    CurvatureBundle,
    divergence_last,
    g_tensor,
    kulkarni_nomizu,
)
from .quasi_einstein import CoQEStructure
from .tensor import COV, Metric, OneForm, Tensor, outer, symmetric_product

Scalar = sympy.Expr
_ZERO = sympy.Integer(0)


@dataclass(frozen=True)
class FluidComponent:
    sigma: Scalar
    p: Scalar
    varsigma: Scalar
    e: Tensor
    omega: OneForm
    q: OneForm

    def is_zero(self) -> bool:
        return all(symexpr.simplify(v) == 0 for v in (
            self.sigma, self.p, self.varsigma)) and \
            self.e.is_zero() and self.omega.is_zero() and self.q.is_zero()

    @classmethod
    def vacuum(cls, chart) -> FluidComponent:
        n = chart.dim
        return cls(
            _ZERO, _ZERO, _ZERO,
            Tensor.zeros(chart, (COV, COV)),
            OneForm(chart, [0] * n),
            OneForm(chart, [0] * n))


class Fluids(NamedTuple):
    r: FluidComponent
    m: FluidComponent


@dataclass(frozen=True)
class GravConstants:
    kappa: Scalar
    Lambda: Scalar

    def __post_init__(self):
        if symexpr.simplify(sympy.sympify(self.kappa)) == 0:
            raise StructureError('the coupling kappa must be nonzero')


def _fluid_term(g: Tensor, f: FluidComponent) -> Tensor:
    if not f.e.is_symmetric():
        raise AsymmetricTensor('shear tensor e is not symmetric')
    return g * f.p + outer(f.omega, f.omega) * (f.sigma + f.p) - \
        f.e * f.varsigma + symmetric_product(f.q, f.omega)


def stress_energy(fluids: Fluids, g: Tensor) -> Tensor:
    """T = p g + (σ+p) ω⊗ω − ς e + q⊗ω + ω⊗q, summed over both fluids."""
    T = _fluid_term(g, fluids.r) + _fluid_term(g, fluids.m)
    return T.simplify()


def fluid_normalization(
        fluids: Fluids,
        g: Metric) -> dict[str, Optional[Scalar]]:
    """Residuals of the velocity and heat flux normalizations.

    A condition involving an identically zero form is reported as None.
    """
    r, m = fluids
    W_r, W_m = g.raise_(r.omega), g.raise_(m.omega)
    Q_r, Q_m = g.raise_(r.q), g.raise_(m.q)
    conditions = (
        ('omega_m(W_m) = -1', m.omega, W_m, -1),
        ('omega_r(W_r) = -1', r.omega, W_r, -1),
        ('q_r(Q_r) = 1', r.q, Q_r, 1),
        ('q_m(Q_m) = 1', m.q, Q_m, 1),
        ('omega_m(W_r) = 0', m.omega, W_r, 0),
        ('q_r(Q_m) = 0', r.q, Q_m, 0),
        ('q_r(W_m) = 0', r.q, W_m, 0),
        ('omega_r(Q_m) = 0', r.omega, Q_m, 0),
    )
    out: dict[str, Optional[Scalar]] = {}
    for name, form, vec, target in conditions:
        if form.is_zero() or vec.is_zero():
            out[name] = None
            continue
        out[name] = symexpr.simplify(form(vec) - target)
    return out


def efe_residual_for(
        S: Tensor,
        r: Scalar,
        g: Tensor,
        T: Tensor,
        consts: GravConstants) -> Tensor:
    k, lam = consts.kappa, consts.Lambda
    return Tensor.from_function(
        g.chart, (COV, COV),
        lambda i, j: symexpr.simplify(
            S[i, j] - r * g[i, j] / 2 + lam * g[i, j] - k * T[i, j]))


def efe_residual(
        bundle: CurvatureBundle,
        T: Tensor,
        consts: GravConstants) -> Tensor:
    """S − (r/2)g + Λg − κT."""
    T.require_symmetric('T')
    return efe_residual_for(
        bundle.ricci, bundle.scalar, bundle.metric, T, consts)


@dataclass
class FluidRicci:
    ricci: Tensor
    identification: CoQEStructure


def ricci_from_fluids(
        fluids: Fluids,
        consts: GravConstants,
        g: Tensor,
        r: Scalar) -> FluidRicci:
    """Ricci tensor forced by the field equations, with its reading as a
    comprehensive quasi-Einstein decomposition: ω¹ = ω^r, ω² = ω^m,
    ω³ = q^r, ω⁴ = q^m, d1 = e_r and d2 = e_m."""
    fr, fm = fluids
    k, lam = consts.kappa, consts.Lambda
    a = symexpr.simplify(k * fr.p + k * fm.p - lam + r / 2)
    b = sympy.zeros(4, 4)
    b[0, 0] = k * (fr.sigma + fr.p)
    b[1, 1] = k * (fm.sigma + fm.p)
    b[0, 2] = b[2, 0] = k
    b[1, 3] = b[3, 1] = k
    st = CoQEStructure(
        a, sympy.ImmutableMatrix(b.applyfunc(symexpr.simplify)),
        symexpr.simplify(-k * fr.varsigma), symexpr.simplify(-k * fm.varsigma),
        (fr.omega, fm.omega, fr.q, fm.q), fr.e, fm.e, declared_r=r)
    S = g * a + \
        outer(fr.omega, fr.omega) * b[0, 0] + \
        outer(fm.omega, fm.omega) * b[1, 1] + \
        (symmetric_product(fr.q, fr.omega) +
         symmetric_product(fm.q, fm.omega)) * k - \
        fr.e * (k * fr.varsigma) - fm.e * (k * fm.varsigma)
    return FluidRicci(S.simplify(), st)


@dataclass
class EnergyDensities:
    sigma_r: Scalar
    sigma_m: Scalar


def _require_kappa(consts: GravConstants):
    if symexpr.simplify(sympy.sympify(consts.kappa)) == 0:
        raise StructureError('energy densities need a nonzero kappa')


def energy_densities(
        st: CoQEStructure,
        consts: GravConstants,
        p_r,
        p_m) -> EnergyDensities:
    """σ_r = (a + b11 − b22 − b33 − b44 + 2Λ)/(2κ) − (2p_r + p_m) and the
    same with r and m exchanged."""
    _require_kappa(consts)
    a, b = st.a, st.b
    k, lam = consts.kappa, consts.Lambda
    rest = b[2, 2] + b[3, 3]
    sr = (a + b[0, 0] - b[1, 1] - rest + 2 * lam) / (2 * k) - (2 * p_r + p_m)
    sm = (a + b[1, 1] - b[0, 0] - rest + 2 * lam) / (2 * k) - (2 * p_m + p_r)
    return EnergyDensities(symexpr.simplify(sr), symexpr.simplify(sm))


def energy_densities_rederived(
        st: CoQEStructure,
        consts: GravConstants,
        p_r,
        p_m) -> EnergyDensities:
    """Densities solved from b11 = κ(σ_r + p_r), b22 = κ(σ_m + p_m) and
    a = κ(p_r + p_m) − Λ + r/2 with r = 4a + Σ b_ii."""
    _require_kappa(consts)
    a, b = st.a, st.b
    k, lam = consts.kappa, consts.Lambda
    rest = b[2, 2] + b[3, 3]
    sr = (-2 * a + b[0, 0] - b[1, 1] - rest + 2 * lam) / (2 * k) - \
        (2 * p_r + p_m)
    sm = (-2 * a + b[1, 1] - b[0, 0] - rest + 2 * lam) / (2 * k) - \
        (2 * p_m + p_r)
    return EnergyDensities(symexpr.simplify(sr), symexpr.simplify(sm))


@dataclass
class SpaceMatter:
    P: Tensor
    sigma: Scalar


def space_matter(
        bundle: CurvatureBundle,
        T: Tensor,
        kappa,
        sigma) -> SpaceMatter:
    """P = R + (κ/2)·g∧T − σ·G."""
    T.require_symmetric('T')
    g = bundle.metric.tensor()
    R = bundle.curvature
    gT = kulkarni_nomizu(g, T, check=False)
    G = g_tensor(g)
    kappa, sigma = sympy.sympify(kappa), sympy.sympify(sigma)
    P = Tensor.from_function(
        bundle.chart, (COV,) * 4,
        lambda *i: bundle._s(R[i] + kappa * gT[i] / 2 - sigma * G[i]))
    return SpaceMatter(P, sigma)


def stress_energy_from_geometry(
        bundle: CurvatureBundle,
        consts: GravConstants) -> Tensor:
    """T = (S − (r/2)g + Λg)/κ."""
    S, g, r = bundle.ricci, bundle.metric, bundle.scalar
    k, lam = consts.kappa, consts.Lambda
    return Tensor.from_function(
        bundle.chart, (COV, COV),
        lambda i, j: bundle._s(
            (S[i, j] - r * g[i, j] / 2 + lam * g[i, j]) / k))


def div_space_matter(bundle: CurvatureBundle, sigma) -> Tensor:
    """div P (last slot) with the field equations substituted:
    (3/2)[(∇_X S)(Y,Z) − (∇_Y S)(X,Z)]
    − g(Y,Z)(dσ(X) + dr(X)/4) + g(X,Z)(dσ(Y) + dr(Y)/4)."""
    D, dr, g = bundle.ricci_derivative, bundle.scalar_differential, \
        bundle.metric
    xs = bundle.chart.coords
    dsigma = [sympy.diff(sympy.sympify(sigma), x) for x in xs]
    half3 = sympy.Rational(3, 2)
    quarter = sympy.Rational(1, 4)
    return Tensor.from_function(
        bundle.chart, (COV,) * 3,
        lambda x, y, z: bundle._s(
            half3 * (D[x, y, z] - D[y, x, z]) -
            g[y, z] * (dsigma[x] + quarter * dr[x]) +
            g[x, z] * (dsigma[y] + quarter * dr[y])))


def space_matter_divergence(
        bundle: CurvatureBundle,
        T: Tensor,
        kappa,
        sigma) -> Tensor:
    """div P by direct differentiation of P."""
    return divergence_last(space_matter(bundle, T, kappa, sigma).P, bundle)


def sigma_gradient_from_divP(bundle: CurvatureBundle) -> OneForm:
    """dσ solved from g^{YZ} div P(X,Y,Z) = 0."""
    n, inv = bundle.n, bundle.metric.inverse
    D, dr = bundle.ricci_derivative, bundle.scalar_differential
    half3 = sympy.Rational(3, 2)

    def comp(x):
        trace_x = sum((inv[y, z] * D[x, y, z]
                       for y in range(n) for z in range(n)), _ZERO)
        div_s = sum((inv[y, z] * D[y, x, z]
                     for y in range(n) for z in range(n)), _ZERO)
        val = (half3 * (trace_x - div_s) -
               sympy.Rational(n - 1, 4) * dr[x]) / (n - 1)
        return symexpr.simplify(val)

    return OneForm(bundle.chart, [comp(x) for x in range(n)])


def contracted_divergence_law(n: int) -> Scalar:
    """The factor λ with dσ = λ·dr once div P = 0 is contracted and the
    contracted Bianchi identity div S = dr/2 is inserted."""
    ds, dr = sympy.symbols('dsigma dr')
    # g^{YZ}(∇_X S)(Y,Z) = dr(X), g^{YZ}(∇_Y S)(X,Z) = dr(X)/2
    contracted = sympy.Rational(3, 2) * (dr - dr / 2) - \
        n * (ds + dr / 4) + (ds + dr / 4)
    solution = sympy.solve(contracted, ds)
    return sympy.simplify(solution[0] / dr)


@dataclass
class FluidBalance:
    alpha: float
    beta: float
    residual_norm: float


def perfect_fluid_balance(
        bundle: CurvatureBundle,
        u: OneForm,
        point=None) -> FluidBalance:
    """Least squares fit of S − (r/2)g = −α·g + β·u⊗u at a numeric point,
    with α = Λ − κp and β = κ(σ + p) for a single perfect fluid."""
    point = point or bundle.chart.sample
    n, g = bundle.n, bundle.metric
    lhs = (bundle.ricci - g.tensor() * (bundle.scalar / 2)).evaluate(point)
    gm = g.numeric_at(point)
    uu = outer(u, u).evaluate(point)
    rows = [(i, j) for i in range(n) for j in range(i, n)]
    A = np.array([[-gm[i, j], uu[i, j]] for i, j in rows])
    rhs = np.array([lhs[i, j] for i, j in rows])
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    norm = float(np.linalg.norm(A @ sol - rhs))
    logging.debug(f'perfect fluid balance residual {norm:.3e} at {point}')
    return FluidBalance(float(sol[0]), float(sol[1]), norm)
