"""Levi-Civita geometry of a coordinate chart metric.

Index conventions
-----------------
* `christoffel[a, b, c]` is Γ^a_{bc}.
* `riemann` is the lowered tensor R_{abcd} = g_{ae} R^e_{bcd} with
  R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}.
* `curvature` is the four-argument form R(X,Y,Z,W) used by the
  quasi-Einstein formulas: R(X,Y,Z,W) = R_{XYWZ}. With it
  S(Y,Z) = g^{XW} R(X,Y,Z,W), a space form has R = K·G and the sectional
  curvature is R(X,Y,Y,X) / (g(X,X)g(Y,Y) − g(X,Y)²).
* Covariant derivatives put the derivative slot first:
  `covariant_derivative(T)[c, i, j, ...]` is (∇_c T)_{ij...}.
* Weyl, Kulkarni–Nomizu products and G use the `curvature` slot order;
  divergences of (0,4) tensors contract the last slot.
"""
from __future__ import annotations
import itertools
import logging
import numpy as np
import sympy
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Union
from . import symexpr
from .exceptions import (
    DegenerateFrame,
    DegeneratePlane,
    DimensionError,
    GeometryError,
    ZeroField,
)
from .tensor import (
    CON,
    COV,
    Metric,
    OneForm,
    Tensor,
    VectorField,
)

RIEMANN_SIGN = (
    'R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} '
    '- G^a_{de} G^e_{cb}; R(X,Y,Z,W) = R_{XYWZ}')

Scalar = sympy.Expr
_ZERO = sympy.Integer(0)


class CurvatureBundle:
    """Curvature objects of a metric, computed lazily and cached.

    With `simplify=False` no component is canonicalized, which keeps large
    random metrics tractable for numeric evaluation.
    """

    def __init__(self, metric: Metric, simplify: Optional[bool] = None):
        self.metric = metric
        self.chart = metric.chart
        self.n = metric.dim
        self.simplifies = \
            metric.simplifies if simplify is None else simplify

    def _s(self, e) -> Scalar:
        return symexpr.simplify(e) if self.simplifies else e

    @cached_property
    def christoffel(self) -> Tensor:
        n, g, inv = self.n, self.metric, self.metric.inverse
        xs = self.chart.coords
        dg = [[[sympy.diff(g[b, c], xs[d]) for c in range(n)]
               for b in range(n)] for d in range(n)]

        def gamma(a, b, c):
            return self._s(sum((
                inv[a, d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c])
                for d in range(n) if inv[a, d] != 0), _ZERO) / 2)

        logging.debug(f'christoffel symbols on {self.chart}')
        return Tensor.from_function(self.chart, (CON, COV, COV), gamma)

    @cached_property
    def riemann_up(self) -> Tensor:
        n, xs, G = self.n, self.chart.coords, self.christoffel
        arr = sympy.MutableDenseNDimArray.zeros(n, n, n, n)
        for a, b, c, d in itertools.product(range(n), repeat=4):
            if c >= d:
                continue
            val = sympy.diff(G[a, d, b], xs[c]) - sympy.diff(G[a, c, b], xs[d])
            for e in range(n):
                val += G[a, c, e] * G[e, d, b] - G[a, d, e] * G[e, c, b]
            val = self._s(val)
            arr[a, b, c, d] = val
            arr[a, b, d, c] = -val
        logging.debug(f'riemann tensor on {self.chart}')
        return Tensor(self.chart, (CON, COV, COV, COV), arr)

    @cached_property
    def riemann(self) -> Tensor:
        n, g, Rup = self.n, self.metric, self.riemann_up

        def lowered(a, b, c, d):
            return self._s(sum((
                g[a, e] * Rup[e, b, c, d]
                for e in range(n) if g[a, e] != 0), _ZERO))

        return Tensor.from_function(self.chart, (COV,) * 4, lowered)

    @cached_property
    def curvature(self) -> Tensor:
        R = self.riemann
        return Tensor.from_function(
            self.chart, (COV,) * 4, lambda a, b, c, d: R[a, b, d, c])

    @cached_property
    def ricci(self) -> Tensor:
        n, Rup = self.n, self.riemann_up
        return Tensor.from_function(
            self.chart, (COV, COV),
            lambda b, d: self._s(sum(
                (Rup[a, b, a, d] for a in range(n)), _ZERO)))

    @cached_property
    def scalar(self) -> Scalar:
        n, inv, S = self.n, self.metric.inverse, self.ricci
        return self._s(sum((
            inv[i, j] * S[i, j]
            for i in range(n) for j in range(n)), _ZERO))

    @cached_property
    def ricci_operator(self) -> Tensor:
        """Q^a_b = g^{ac} S_cb."""
        n, inv, S = self.n, self.metric.inverse, self.ricci
        return Tensor.from_function(
            self.chart, (CON, COV),
            lambda a, b: self._s(sum(
                (inv[a, c] * S[c, b] for c in range(n)), _ZERO)))

    @cached_property
    def ricci_derivative(self) -> Tensor:
        return covariant_derivative(self.ricci, self)

    @cached_property
    def scalar_differential(self) -> OneForm:
        return gradient_form(self.scalar, self)

    def __repr__(self) -> str:
        return f'<CurvatureBundle {self.chart}>'


def christoffel(g: Metric) -> Tensor:
    return CurvatureBundle(g).christoffel


def riemann(bundle: CurvatureBundle) -> Tensor:
    return bundle.riemann


def ricci(bundle: CurvatureBundle) -> Tensor:
    return bundle.ricci


def scalar_curvature(bundle: CurvatureBundle) -> Scalar:
    return bundle.scalar


def gradient_form(f, bundle: CurvatureBundle) -> OneForm:
    """df as a one-form."""
    return OneForm(bundle.chart, [
        bundle._s(sympy.diff(f, x)) for x in bundle.chart.coords])


def _covariant_component(
        t: Tensor,
        bundle: CurvatureBundle,
        c: int,
        idx: tuple[int, ...]) -> Scalar:
    G = bundle.christoffel
    val = sympy.diff(t[idx], bundle.chart.coords[c])
    for slot, variance in enumerate(t.variance):
        for e in range(bundle.n):
            j = idx[:slot] + (e,) + idx[slot + 1:]
            if t[j] == 0:
                continue
            if variance == COV:
                val -= G[e, c, idx[slot]] * t[j]
            else:
                val += G[idx[slot], c, e] * t[j]
    return val


def covariant_derivative(
        t: Union[Tensor, Scalar],
        bundle: CurvatureBundle) -> Tensor:
    """Levi-Civita covariant derivative; the derivative slot comes first.

    For a scalar this is its differential.
    """
    if not isinstance(t, Tensor):
        return gradient_form(t, bundle)
    if t.chart != bundle.chart:
        raise GeometryError('tensor and metric live on different charts')
    return Tensor.from_function(
        bundle.chart, (COV,) + t.variance,
        lambda c, *idx: bundle._s(_covariant_component(t, bundle, c, idx)))


def kulkarni_nomizu(
        alpha: Tensor,
        beta: Tensor,
        check: bool = True) -> Tensor:
    """(α∧β)(X,Y,Z,W) = α(Y,Z)β(X,W) + α(X,W)β(Y,Z)
    − α(X,Z)β(Y,W) − α(Y,W)β(X,Z)."""
    if check:
        alpha.require_symmetric('alpha')
        beta.require_symmetric('beta')

    def comp(x, y, z, w):
        return (alpha[y, z] * beta[x, w] + alpha[x, w] * beta[y, z] -
                alpha[x, z] * beta[y, w] - alpha[y, w] * beta[x, z])

    return Tensor.from_function(alpha.chart, (COV,) * 4, comp)


def g_tensor(g: Tensor) -> Tensor:
    """G(X,Y,Z,W) = g(Y,Z)g(X,W) − g(X,Z)g(Y,W)."""
    return Tensor.from_function(
        g.chart, (COV,) * 4,
        lambda x, y, z, w: g[y, z] * g[x, w] - g[x, z] * g[y, w])


def _require_dim(n: int, minimum: int, what: str):
    if n < minimum:
        raise DimensionError(f'{what} needs dimension >= {minimum}, got {n}')


def weyl_from_curvature(
        curv: Tensor,
        g: Tensor,
        S: Tensor,
        r: Scalar,
        simplify: bool = True) -> Tensor:
    """𝒞 = R − 1/(n−2)·g∧S + r/((n−1)(n−2))·G, algebraically."""
    n = g.dim
    _require_dim(n, 3, 'the Weyl tensor')
    gS = kulkarni_nomizu(g, S, check=False)
    G = g_tensor(g)
    k1 = sympy.Rational(1, n - 2)
    k2 = r / ((n - 1) * (n - 2))

    def comp(*i):
        val = curv[i] - k1 * gS[i] + k2 * G[i]
        return symexpr.simplify(val) if simplify else val

    return Tensor.from_function(g.chart, (COV,) * 4, comp)


def weyl(bundle: CurvatureBundle) -> Tensor:
    return weyl_from_curvature(
        bundle.curvature, bundle.metric, bundle.ricci, bundle.scalar,
        simplify=bundle.simplifies)


def raise_first(t: Tensor, metric: Metric) -> Tensor:
    """Raise the first slot of a covariant tensor."""
    n, inv = metric.dim, metric.inverse
    return Tensor.from_function(
        t.chart, (CON,) + t.variance[1:],
        lambda a, *rest: sum(
            (inv[a, e] * t[(e,) + rest] for e in range(n)), _ZERO))


def cotton(bundle: CurvatureBundle) -> Tensor:
    """C(X,Y,Z) = (∇_Y S)(X,Z) − (∇_X S)(Y,Z)
    + 1/(2(n−1))·(dr(X)g(Y,Z) − dr(Y)g(X,Z))."""
    n = bundle.n
    _require_dim(n, 3, 'the Cotton tensor')
    D, dr, g = bundle.ricci_derivative, bundle.scalar_differential, \
        bundle.metric
    k = sympy.Rational(1, 2 * (n - 1))
    return Tensor.from_function(
        bundle.chart, (COV,) * 3,
        lambda x, y, z: bundle._s(
            D[y, x, z] - D[x, y, z] +
            k * (dr[x] * g[y, z] - dr[y] * g[x, z])))


def div_weyl(bundle: CurvatureBundle) -> Tensor:
    """Closed form of div 𝒞 (last slot):
    (n−3)/(n−2)·[(∇_X S)(Y,Z) − (∇_Y S)(X,Z)]
    − (n−3)/(2(n−1)(n−2))·[dr(X)g(Y,Z) − dr(Y)g(X,Z)]."""
    n = bundle.n
    _require_dim(n, 3, 'div of the Weyl tensor')
    D, dr, g = bundle.ricci_derivative, bundle.scalar_differential, \
        bundle.metric
    k1 = sympy.Rational(n - 3, n - 2)
    k2 = sympy.Rational(n - 3, 2 * (n - 1) * (n - 2))
    return Tensor.from_function(
        bundle.chart, (COV,) * 3,
        lambda x, y, z: bundle._s(
            k1 * (D[x, y, z] - D[y, x, z]) -
            k2 * (dr[x] * g[y, z] - dr[y] * g[x, z])))


def divergence_last(t: Tensor, bundle: CurvatureBundle) -> Tensor:
    """g^{de} (∇_e T)_{...d}, contracting the last slot of a covariant
    tensor; only the needed derivative components are built.
    """
    n, inv = bundle.n, bundle.metric.inverse
    pairs = [(d, e) for d in range(n) for e in range(n) if inv[d, e] != 0]

    def comp(*idx):
        return bundle._s(sum((
            inv[d, e] * _covariant_component(t, bundle, e, idx + (d,))
            for d, e in pairs), _ZERO))

    return Tensor.from_function(bundle.chart, t.variance[:-1], comp)


def weyl_divergence(bundle: CurvatureBundle) -> Tensor:
    """div 𝒞 by direct differentiation of the Weyl tensor."""
    return divergence_last(weyl(bundle), bundle)


def harmonic_weyl(bundle: CurvatureBundle) -> bool:
    if bundle.n == 3:
        return True
    return cotton(bundle).is_zero()


def sectional_curvature_from(
        curv: Tensor,
        metric: Metric,
        X: VectorField,
        Y: VectorField) -> Scalar:
    """K(X,Y) = R(X,Y,Y,X) / (g(X,X)g(Y,Y) − g(X,Y)²)."""
    n = metric.dim
    den = metric.inner(X, X) * metric.inner(Y, Y) - metric.inner(X, Y)**2
    try:
        degenerate = symexpr.numeric_zero(den, metric.chart.sample, 1e-12)
    except symexpr.ExprError:
        degenerate = True
    if degenerate or symexpr.simplify(den) == 0:
        raise DegeneratePlane(
            'the vectors do not span a non-degenerate plane at the '
            'sample point')
    num = sum((
        curv[a, b, c, d] * X[a] * Y[b] * Y[c] * X[d]
        for a, b, c, d in itertools.product(range(n), repeat=4)
        if curv[a, b, c, d] != 0), _ZERO)
    return symexpr.simplify(num / den)


def sectional_curvature(
        bundle: CurvatureBundle,
        X: VectorField,
        Y: VectorField) -> Scalar:
    return sectional_curvature_from(bundle.curvature, bundle.metric, X, Y)


def conformally_flat_curvature(
        g: Tensor,
        S: Tensor,
        r: Scalar) -> Tensor:
    """Curvature of a conformally flat manifold with Ricci S and scalar r:
    1/(n−2)·g∧S − r/((n−1)(n−2))·G."""
    n = g.dim
    _require_dim(n, 3, 'a conformally flat curvature')
    gS = kulkarni_nomizu(g, S, check=False)
    G = g_tensor(g)
    return Tensor.from_function(
        g.chart, (COV,) * 4,
        lambda *i: gS[i] / (n - 2) - r * G[i] / ((n - 1) * (n - 2)))


def grad_norm2(f, metric: Metric) -> Scalar:
    """‖grad f‖², the first Beltrami symbol Δ₁f."""
    n, inv, xs = metric.dim, metric.inverse, metric.chart.coords
    df = [sympy.diff(f, x) for x in xs]
    return symexpr.simplify(sum((
        inv[i, j] * df[i] * df[j]
        for i in range(n) for j in range(n)), _ZERO))


def laplacian(f, bundle: CurvatureBundle) -> Scalar:
    """Laplace–Beltrami g^{ij}(∂_i∂_j f − Γ^k_{ij}∂_k f)."""
    n, inv, xs = bundle.n, bundle.metric.inverse, bundle.chart.coords
    G = bundle.christoffel
    hess = [[sympy.diff(f, xs[i], xs[j]) - sum((
        G[k, i, j] * sympy.diff(f, xs[k]) for k in range(n)), _ZERO)
        for j in range(n)] for i in range(n)]
    return symexpr.simplify(sum((
        inv[i, j] * hess[i][j]
        for i in range(n) for j in range(n)), _ZERO))


def conformal_rescale(g: Metric, sigma) -> Metric:
    """The metric e^{2σ}g."""
    factor = sympy.exp(2 * sympy.sympify(sigma))
    return Metric(
        g.chart,
        g.components.applyfunc(lambda c: symexpr.simplify(factor * c)),
        simplify=g.simplifies)


def conharmonic_defect(g: Metric, sigma) -> Scalar:
    """Δσ + (n−2)/2·‖grad σ‖²; zero iff e^{2σ}g is a conharmonic change."""
    bundle = CurvatureBundle(g)
    n = g.dim
    return symexpr.simplify(
        laplacian(sigma, bundle) +
        sympy.Rational(n - 2, 2) * grad_norm2(sigma, g))


def mapping_constants(
        n: int,
        grad_sigma2: Scalar,
        r: Scalar,
        b22: Scalar,
        b33: Scalar,
        b44: Scalar) -> tuple[Scalar, Scalar]:
    """μ and ρ of a conformal mapping in terms of ‖grad σ‖² and r."""
    mu = ((2 - n) * (n - 1) * grad_sigma2 - r) / (2 * (n - 1) * r)
    rho = ((n - 2) * (1 - n) * grad_sigma2 - b22 - b33 - b44) / \
        ((n + 2) * (n - 1))
    return symexpr.simplify(mu), symexpr.simplify(rho)


def conformal_mapping_constants(
        bundle: CurvatureBundle,
        sigma,
        structure_b: Mapping[str, Scalar]) -> tuple[Scalar, Scalar]:
    n = bundle.n
    _require_dim(n, 3, 'conformal mapping constants')
    if symexpr.simplify(bundle.scalar) == 0:
        raise GeometryError('scalar curvature is zero; mu is undefined')
    return mapping_constants(
        n,
        grad_norm2(sigma, bundle.metric),
        bundle.scalar,
        sympy.sympify(structure_b.get('b22', 0)),
        sympy.sympify(structure_b.get('b33', 0)),
        sympy.sympify(structure_b.get('b44', 0)))


def killing_defect(g: Metric, X: VectorField) -> Tensor:
    """Lie derivative of g along X; zero iff X is a Killing field."""
    n, xs = g.dim, g.chart.coords

    def comp(i, j):
        val = sum((X[k] * sympy.diff(g[i, j], xs[k]) for k in range(n)),
                  _ZERO)
        val += sum((
            g[k, j] * sympy.diff(X[k], xs[i]) +
            g[i, k] * sympy.diff(X[k], xs[j]) for k in range(n)), _ZERO)
        return symexpr.simplify(val)

    return Tensor.from_function(g.chart, (COV, COV), comp)


def codazzi_defect(A: Tensor, bundle: CurvatureBundle) -> Tensor:
    """(∇_X A)(Y,Z) − (∇_Y A)(X,Z)."""
    A.require_symmetric('A')
    D = covariant_derivative(A, bundle)
    return Tensor.from_function(
        bundle.chart, (COV,) * 3,
        lambda x, y, z: bundle._s(D[x, y, z] - D[y, x, z]))


def cyclic_parallel_defect(A: Tensor, bundle: CurvatureBundle) -> Tensor:
    """(∇_X A)(Y,Z) + (∇_Y A)(Z,X) + (∇_Z A)(X,Y)."""
    A.require_symmetric('A')
    D = covariant_derivative(A, bundle)
    return Tensor.from_function(
        bundle.chart, (COV,) * 3,
        lambda x, y, z: bundle._s(D[x, y, z] + D[y, z, x] + D[z, x, y]))


def _is_constant(e: Scalar, coords) -> bool:
    return all(symexpr.simplify(sympy.diff(e, x)) == 0 for x in coords)


@dataclass
class VectorFieldCharacter:
    parallel: bool = False
    concircular: bool = False
    rho: Optional[Scalar] = None
    concurrent: bool = False
    recurrent: bool = False
    phi: Optional[OneForm] = None
    phi_ricci: bool = False
    mu: Optional[Scalar] = None
    labels: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'labels': self.labels or ['none of the listed characters'],
            'rho': None if self.rho is None else symexpr.to_text(self.rho),
            'phi': None if self.phi is None else [
                symexpr.to_text(c) for c in self.phi.components],
            'mu': None if self.mu is None else symexpr.to_text(self.mu),
        }


def _ratio_fit(T: Tensor, ref: Tensor, sample) -> Optional[Scalar]:
    """Return λ with T = λ·ref componentwise, or None."""
    pivot = None
    for idx in ref.indices():
        if not symexpr.numeric_zero(ref[idx], sample):
            pivot = idx
            break
    if pivot is None:
        return None
    lam = symexpr.simplify(T[pivot] / ref[pivot])
    for idx in T.indices():
        if symexpr.simplify(T[idx] - lam * ref[idx]) != 0:
            return None
    return lam


def vector_field_character(
        bundle: CurvatureBundle,
        U: VectorField) -> VectorFieldCharacter:
    """Classify ∇U: parallel, concircular (ρ), concurrent, recurrent dual
    form (φ) and proper φ(Ric) field (μ)."""
    chart, n, g = bundle.chart, bundle.n, bundle.metric
    if all(symexpr.numeric_zero(c, chart.sample) for c in U.components):
        raise ZeroField('vector field vanishes at the sample point')
    coords = chart.coords

    # T[c, a] = ∇_c U^a
    T = covariant_derivative(U, bundle).simplify()
    out = VectorFieldCharacter()

    if T.is_zero():
        out.parallel = True
        out.labels.append('parallel')

    ident = Tensor.from_function(
        chart, (COV, CON), lambda c, a: sympy.Integer(int(c == a)))
    rho = _ratio_fit(T, ident, chart.sample)
    if rho is not None:
        out.concircular, out.rho = True, rho
        out.labels.append('concircular')
        if rho != 0 and _is_constant(rho, coords):
            out.concurrent = True
            out.labels.append('concurrent')

    omega = g.lower(U)
    E = covariant_derivative(omega, bundle).simplify()
    pivot = next((
        b for b in range(n)
        if not symexpr.numeric_zero(omega[b], chart.sample)), None)
    if pivot is not None:
        phi = OneForm(chart, [
            symexpr.simplify(E[c, pivot] / omega[pivot]) for c in range(n)])
        if all(symexpr.simplify(E[c, b] - phi[c] * omega[b]) == 0
               for c in range(n) for b in range(n)) and \
                not phi.is_zero():
            out.recurrent, out.phi = True, phi
            out.labels.append('recurrent')

    Q = bundle.ricci_operator
    QT = Tensor.from_function(chart, (COV, CON), lambda c, a: Q[a, c])
    mu = _ratio_fit(T, QT, chart.sample)
    if mu is not None and mu != 0 and _is_constant(mu, coords):
        out.phi_ricci, out.mu = True, mu
        out.labels.append('phi(Ric)')
    return out


def ricci_recurrence_defect(
        bundle: CurvatureBundle,
        alpha: OneForm,
        beta: OneForm,
        with_metric: bool = False) -> Tensor:
    """(∇_X S)(Y,Z) − α(X)S(Y,Z) − β(X)S(Y,Z).

    With `with_metric` the last term is β(X)g(Y,Z) instead.
    """
    D, S = bundle.ricci_derivative, bundle.ricci
    B = bundle.metric if with_metric else S
    return Tensor.from_function(
        bundle.chart, (COV,) * 3,
        lambda x, y, z: bundle._s(
            D[x, y, z] - alpha[x] * S[y, z] - beta[x] * B[y, z]))


def semi_pseudo_defect(bundle: CurvatureBundle, pi: OneForm) -> Tensor:
    """(∇_X S)(Y,Z) − π(Y)S(X,Z) − π(Z)S(X,Y)."""
    D, S = bundle.ricci_derivative, bundle.ricci
    return Tensor.from_function(
        bundle.chart, (COV,) * 3,
        lambda x, y, z: bundle._s(
            D[x, y, z] - pi[y] * S[x, z] - pi[z] * S[x, y]))


def ricci_power(bundle: CurvatureBundle, k: int) -> Tensor:
    """S^k(X,Y) = g(Q^k X, Y)."""
    if k < 1:
        raise GeometryError(f'Ricci power needs k >= 1, got {k}')
    S = bundle.ricci.as_matrix()
    step = S * bundle.metric.inverse
    M = S
    for _ in range(k - 1):
        M = step * M
    return Tensor(
        bundle.chart, (COV, COV),
        M.applyfunc(bundle._s).tolist())


def riemann_symmetry_defects(bundle: CurvatureBundle) -> dict[str, Tensor]:
    """Each tensor vanishes for a Levi-Civita curvature tensor."""
    R = bundle.riemann
    chart = bundle.chart

    def build(fun):
        return Tensor.from_function(
            chart, (COV,) * 4, lambda *i: symexpr.simplify(fun(*i)))

    return {
        'antisymmetry-first-pair': build(
            lambda a, b, c, d: R[a, b, c, d] + R[b, a, c, d]),
        'antisymmetry-last-pair': build(
            lambda a, b, c, d: R[a, b, c, d] + R[a, b, d, c]),
        'pair-symmetry': build(
            lambda a, b, c, d: R[a, b, c, d] - R[c, d, a, b]),
        'first-bianchi': build(
            lambda a, b, c, d: R[a, b, c, d] + R[a, c, d, b] +
            R[a, d, b, c]),
    }


def contracted_bianchi_defect(bundle: CurvatureBundle) -> OneForm:
    """g^{ab}(∇_a S)_{bc} − ½∂_c r."""
    n, inv = bundle.n, bundle.metric.inverse
    D, dr = bundle.ricci_derivative, bundle.scalar_differential
    return OneForm(bundle.chart, [
        bundle._s(sum((
            inv[a, b] * D[a, b, c]
            for a in range(n) for b in range(n)), _ZERO) - dr[c] / 2)
        for c in range(n)])


def metric_compatibility_defect(bundle: CurvatureBundle) -> Tensor:
    return covariant_derivative(bundle.metric.tensor(), bundle)


def _numeric_inner(gm: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    return float(u @ gm @ v)


def orthonormal_frame(
        metric: Metric,
        point: Optional[Mapping] = None) -> tuple[np.ndarray, np.ndarray]:
    """Signature-aware Gram–Schmidt at a numeric point.

    Returns (frame, eps): frame rows are vectors e_i with
    g(e_i, e_j) = eps_i δ_ij and eps_i = ±1.
    """
    n = metric.dim
    gm = metric.numeric_at(point or metric.chart.sample)
    basis = list(np.eye(n))
    candidates = basis + [
        basis[i] + basis[j] for i in range(n) for j in range(i + 1, n)]
    frame: list[np.ndarray] = []
    eps: list[float] = []
    for v in candidates:
        if len(frame) == n:
            break
        w = np.array(v, dtype=float)
        for u, e in zip(frame, eps):
            w = w - e * _numeric_inner(gm, w, u) * u
        norm2 = _numeric_inner(gm, w, w)
        if abs(norm2) < 1e-10:
            continue
        frame.append(w / np.sqrt(abs(norm2)))
        eps.append(float(np.sign(norm2)))
    if len(frame) < n:
        raise DegenerateFrame(
            f'could not build an orthonormal frame at {point}')
    return np.array(frame), np.array(eps)
