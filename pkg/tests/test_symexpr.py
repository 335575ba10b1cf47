import pytest
import sympy
from hypothesis import given, settings, strategies as st
from coqe import symexpr
from coqe.exceptions import (
    AssumptionViolation,
    ExprError,
    ParseError,
    UnboundSymbol,
    UnknownFunction,
    UnknownSymbol,
)

X = sympy.Symbol('x', real=True)


class TestParse:

    def test_precedence(self):
        assert symexpr.parse('-x^2') == -X**2
        assert symexpr.parse('2*x^-1') == 2 / X
        assert symexpr.parse('(1 + x)^2') == sympy.expand((1 + X)**2)

    def test_decimals_are_exact(self):
        assert symexpr.parse('0.25') == sympy.Rational(1, 4)
        assert symexpr.parse('1.5*x') == sympy.Rational(3, 2) * X

    def test_functions(self):
        assert symexpr.parse('exp(x)*exp(-x)') == 1
        assert symexpr.parse('sqrt(4)') == 2
        assert symexpr.equivalent(
            symexpr.parse('tan(x)'), sympy.sin(X) / sympy.cos(X))

    @pytest.mark.parametrize('text, offset', [
        ('x +', 3),
        ('x $ 1', 2),
        ('(x', 2),
        ('1..2', 0),
    ])
    def test_syntax_errors(self, text, offset):
        with pytest.raises(ParseError) as info:
            symexpr.parse(text)
        assert info.value.offset == offset

    def test_invalid_values(self):
        with pytest.raises(ParseError):
            symexpr.parse('1/0')
        with pytest.raises(ParseError):
            symexpr.parse('0^-1')
        with pytest.raises(ParseError):
            symexpr.parse('2^x')

    def test_unknown_names(self):
        with pytest.raises(UnknownFunction):
            symexpr.parse('foo(x)')
        with pytest.raises(UnknownSymbol):
            symexpr.parse('x + y', {'x': X})
        with pytest.raises(ParseError):
            symexpr.parse('exp + 1')

    def test_to_text(self):
        assert symexpr.to_text(symexpr.parse('x^2')) == 'x^2'
        assert symexpr.parse(symexpr.to_text(sympy.exp(2 * X))) == \
            sympy.exp(2 * X)


class TestSimplify:

    def test_pythagoras(self):
        e = symexpr.parse('sin(x)^2 + cos(x)^2')
        assert e == 1

    def test_exp_products_merge(self):
        e = symexpr.simplify(sympy.exp(X) * sympy.exp(2 * X) / sympy.exp(X))
        assert e == sympy.exp(2 * X)

    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=6))
    @settings(max_examples=50, deadline=None)
    def test_idempotent(self, coeffs):
        e = sum(c * X**i for i, c in enumerate(coeffs)) * sympy.cos(X)**2
        once = symexpr.simplify(e)
        assert symexpr.simplify(once) == once


class TestEquivalence:

    def test_exact(self):
        eq = symexpr.equivalent(
            symexpr.parse('(x+1)^2'), symexpr.parse('x^2 + 2*x + 1'))
        assert eq
        assert not eq.probabilistic

    def test_different(self):
        assert not symexpr.equivalent(X, X + 1)
        assert not symexpr.equivalent(symexpr.parse('sqrt(x^2)'), X)

    @given(st.integers(-20, 20), st.integers(1, 9))
    @settings(max_examples=30, deadline=None)
    def test_scaled_expression(self, num, den):
        c = sympy.Rational(num, den)
        e = c * sympy.exp(X) * sympy.sin(X)
        assert symexpr.equivalent(e, sympy.sin(X) * sympy.exp(X) * c)

    def test_symbol_cancelling_in_difference(self):
        y = sympy.Symbol('y', real=True)
        eq = symexpr.equivalent(
            y + sympy.sin(2 * X), y + 2 * sympy.sin(X) * sympy.cos(X))
        assert eq
        assert eq.probabilistic
        assert all(
            {name for name, _ in point} == {'x', 'y'}
            for point in eq.points)

    def test_is_zero(self):
        assert symexpr.is_zero(symexpr.parse('cos(x)^2 - 1 + sin(x)^2'))


class TestEvalAt:

    def test_exact_rational(self):
        e = symexpr.parse('x^2 + 1/3')
        assert symexpr.eval_at(e, {'x': '1/2'}) == sympy.Rational(7, 12)

    def test_float(self):
        v = symexpr.eval_at(symexpr.parse('sin(x)'), {'x': 1})
        assert v == pytest.approx(0.8414709848078965)

    def test_unbound(self):
        with pytest.raises(UnboundSymbol):
            symexpr.eval_at(symexpr.parse('x + y'), {'x': 1})

    def test_assumptions(self):
        k = sympy.Symbol('k', real=True, positive=True)
        e = symexpr.parse('1/k', {'k': k})
        with pytest.raises(AssumptionViolation):
            symexpr.eval_at(e, {'k': 0})
        with pytest.raises(AssumptionViolation):
            symexpr.eval_at(e, {'k': -1})

    def test_not_finite(self):
        with pytest.raises(ExprError):
            symexpr.eval_at(symexpr.parse('1/x'), {'x': 0})

    def test_numeric_zero(self):
        assert symexpr.numeric_zero(symexpr.parse('x - 1'), {'x': 1})
        assert not symexpr.numeric_zero(symexpr.parse('1/x'), {'x': 0})


class TestDifferentiate:

    def test_chain_rule(self):
        e = symexpr.parse('exp(2*x)*sin(x)')
        assert symexpr.equivalent(
            symexpr.differentiate(e, X),
            sympy.exp(2 * X) * (2 * sympy.sin(X) + sympy.cos(X)))

    @given(
        st.integers(-5, 5), st.integers(-5, 5), st.integers(-3, 3),
        st.floats(-2, 2))
    @settings(max_examples=50, deadline=None)
    def test_finite_difference(self, c1, c2, c3, x0):
        e = c1 * X**3 + c2 * sympy.sin(X) + sympy.exp(c3 * X)
        f = symexpr.lambdify(e, [X])
        df = symexpr.lambdify(symexpr.differentiate(e, X), [X])
        h = 1e-5
        fd = (f(x0 + h) - f(x0 - h)) / (2 * h)
        assert float(df(x0)) == pytest.approx(fd, rel=1e-5, abs=1e-6)


Y = sympy.Symbol('y', real=True)

_leaves = st.sampled_from(
    [X, Y, sympy.Integer(1), sympy.Integer(2), sympy.Rational(1, 2),
     sympy.Integer(-3)])
_atoms = st.one_of(
    _leaves,
    _leaves.map(sympy.exp),
    _leaves.map(sympy.sin),
    _leaves.map(sympy.cos),
    _leaves.map(lambda e: sympy.sqrt(e**2 + 1)),
)


def _combine(children):
    pairs = st.tuples(children, children)
    return st.one_of(
        pairs.map(lambda p: p[0] + p[1]),
        pairs.map(lambda p: p[0] - p[1]),
        pairs.map(lambda p: p[0] * p[1]),
        pairs.map(lambda p: p[0] / (p[1]**2 + 1)),
        children.map(lambda e: e**2),
    )


expressions = st.recursive(_atoms, _combine, max_leaves=5)
bindings = st.fixed_dictionaries({
    'x': st.fractions(-2, 2, max_denominator=7),
    'y': st.fractions(-2, 2, max_denominator=7),
})


class TestExpressionTrees:

    @given(expressions)
    @settings(max_examples=40, deadline=None)
    def test_text_round_trip(self, tree):
        e = symexpr.simplify(tree)
        back = symexpr.parse(symexpr.to_text(e), {'x': X, 'y': Y})
        assert symexpr.simplify(back - e) == 0

    @given(expressions, bindings)
    @settings(max_examples=40, deadline=None)
    def test_simplify_keeps_values(self, tree, b):
        before = float(symexpr.eval_at(tree, b))
        after = float(symexpr.eval_at(symexpr.simplify(tree), b))
        assert after == pytest.approx(before, rel=1e-9, abs=1e-9)

    @given(expressions)
    @settings(max_examples=25, deadline=None)
    def test_mixed_partials_commute(self, tree):
        xy = symexpr.differentiate(symexpr.differentiate(tree, X), Y)
        yx = symexpr.differentiate(symexpr.differentiate(tree, Y), X)
        assert symexpr.equivalent(xy, yx)
