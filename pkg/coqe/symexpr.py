"""Exact symbolic scalar engine.

Every tensor component handled by coqe is a sympy expression built from
rational numbers, symbols and the kernels exp, log, sin, cos and rational
powers (sqrt is a power with exponent 1/2). This module reads such
expressions from text, prints them back, differentiates, canonicalizes,
evaluates and decides equivalence.

Expression grammar:

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := base ('^' exponent)?
    exponent := '-' exponent | base
    base     := NUMBER | SYMBOL | FUNC '(' expr ')' | '(' expr ')'
              | '-' factor
    FUNC     := exp | log | sin | cos | tan | sqrt

`^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. Decimal numbers
are read as exact rationals; `tan(u)` is read as `sin(u)/cos(u)`.
"""
import logging
import re
import numpy as np
import sympy
from dataclasses import dataclass
from fractions import Fraction
from sympy.printing.str import StrPrinter
from typing import Callable, Iterable, Mapping, Optional, Union
from .exceptions import (
    AssumptionViolation,
    ExprError,
    ParseError,
    UnboundSymbol,
    UnknownFunction,
    UnknownSymbol,
)

Expr = sympy.Expr
Number = Union[int, float, Fraction, sympy.Rational]
Bindings = Mapping[str, Number]

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d*)?|\.\d+)
  | (?P<symbol>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_MALFORMED_NUMBER = re.compile(r'\d*\.\d*\.|\d+\.(?!\d)')

_FUNCTIONS: Mapping[str, Callable[[Expr], Expr]] = {
    'exp': sympy.exp,
    'log': sympy.log,
    'sin': sympy.sin,
    'cos': sympy.cos,
    'tan': lambda u: sympy.sin(u) / sympy.cos(u),
    'sqrt': sympy.sqrt,
}

_INVALID = (sympy.zoo, sympy.oo, -sympy.oo, sympy.nan)


class _Token:

    __slots__ = ('kind', 'text', 'offset')

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind
        self.text = text
        self.offset = offset

    def __repr__(self) -> str:
        return f'<{self.kind} {self.text!r} @{self.offset}>'


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode())


def tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f'unexpected character {text[pos]!r}',
                _byte_offset(text, pos))
        kind = m.lastgroup
        assert kind is not None
        if kind == 'number' and _MALFORMED_NUMBER.match(text, pos):
            raise ParseError(
                f'malformed number {m.group()!r}', _byte_offset(text, pos))
        if kind != 'ws':
            tokens.append(_Token(kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(_Token('end', '', _byte_offset(text, pos)))
    return tokens


class _Parser:

    def __init__(
            self,
            text: str,
            symbols: Optional[Mapping[str, sympy.Symbol]]):
        self.tokens = tokenize(text)
        self.idx = 0
        self.symbols = symbols

    @property
    def tok(self) -> _Token:
        return self.tokens[self.idx]

    def accept(self, text: str) -> bool:
        if self.tok.kind == 'op' and self.tok.text == text:
            self.idx += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(f'expected {text!r}')

    def error(self, msg: str):
        found = self.tok.text or 'end of input'
        raise ParseError(f'{msg}, found {found!r}', self.tok.offset)

    def parse(self) -> Expr:
        expr = self._expression()
        if self.tok.kind != 'end':
            self.error('unexpected token')
        return expr

    # <EXPRESSION> -> <TERM> { ( '+' | '-' ) <TERM> }*
    def _expression(self) -> Expr:
        expr = self._term()
        while True:
            if self.accept('+'):
                expr = expr + self._term()
            elif self.accept('-'):
                expr = expr - self._term()
            else:
                return expr

    # <TERM> -> <FACTOR> { ( '*' | '/' ) <FACTOR> }*
    def _term(self) -> Expr:
        expr = self._factor()
        while True:
            if self.accept('*'):
                expr = expr * self._factor()
            elif self.tok.text == '/':
                offset = self.tok.offset
                self.idx += 1
                divisor = self._factor()
                if divisor == 0:
                    raise ParseError('division by zero', offset)
                expr = expr / divisor
            else:
                return expr

    # <FACTOR> -> <BASE> [ '^' <EXPONENT> ]
    def _factor(self) -> Expr:
        base = self._base()
        if self.tok.text != '^':
            return base
        offset = self.tok.offset
        self.idx += 1
        exponent = self._exponent()
        if not exponent.is_Rational:
            raise ParseError(f'exponent must be rational: {exponent}', offset)
        if base == 0 and exponent < 0:
            raise ParseError('zero raised to a negative power', offset)
        return base ** exponent

    # <EXPONENT> -> '-' <EXPONENT> | <BASE>
    def _exponent(self) -> Expr:
        if self.accept('-'):
            return -self._exponent()
        return self._base()

    # <BASE> -> NUMBER | SYMBOL | FUNC '(' <EXPRESSION> ')'
    #         | '(' <EXPRESSION> ')' | '-' <FACTOR>
    def _base(self) -> Expr:
        tok = self.tok
        if tok.kind == 'number':
            self.idx += 1
            return sympy.Rational(tok.text)
        if tok.kind == 'symbol':
            self.idx += 1
            if self.tok.text == '(':
                fun = _FUNCTIONS.get(tok.text)
                if fun is None:
                    raise UnknownFunction(
                        f'unknown function {tok.text!r}', tok.offset)
                self.idx += 1
                arg = self._expression()
                self.expect(')')
                return fun(arg)
            if tok.text in _FUNCTIONS:
                raise ParseError(
                    f'function {tok.text!r} needs an argument', tok.offset)
            return self._symbol(tok)
        if self.accept('('):
            expr = self._expression()
            self.expect(')')
            return expr
        if self.accept('-'):
            return -self._factor()
        self.error('unexpected token')
        raise AssertionError  # unreachable

    def _symbol(self, tok: _Token) -> sympy.Symbol:
        if self.symbols is None:
            return sympy.Symbol(tok.text, real=True)
        try:
            return self.symbols[tok.text]
        except KeyError:
            raise UnknownSymbol(f'unknown symbol {tok.text!r}', tok.offset)


def parse(
        text: str,
        symbols: Optional[Mapping[str, sympy.Symbol]] = None) -> Expr:
    """Parse expression text into a canonical expression.

    With `symbols` given, only those names are accepted (UnknownSymbol
    otherwise); without, every name becomes a real symbol.
    """
    if not isinstance(text, str):
        text = str(text)
    expr = _Parser(text, symbols).parse()
    if expr.has(*_INVALID):
        raise ParseError('expression is not finite', 0)
    return simplify(expr)


class _TextPrinter(StrPrinter):

    def _print_Pow(self, expr, rational=False):
        return super()._print_Pow(expr, rational).replace('**', '^')

    def _print_Exp1(self, expr):
        return 'exp(1)'


def to_text(e: Expr) -> str:
    """Print an expression in the grammar read by `parse`."""
    return _TextPrinter({'order': 'lex'}).doprint(sympy.sympify(e))


def _cos_power(p: sympy.Pow) -> Expr:
    n = int(p.exp)
    q, r = divmod(n, 2)
    u = p.base.args[0]
    return (1 - sympy.sin(u)**2)**q * sympy.cos(u)**r


def _is_cos_power(e) -> bool:
    return (
        isinstance(e, sympy.Pow) and
        isinstance(e.base, sympy.cos) and
        e.exp.is_Integer and abs(e.exp) >= 2)


def _rewrite_once(e: Expr) -> Expr:
    e = sympy.expand(e)
    if e.has(sympy.cos):
        e = sympy.expand(e.replace(_is_cos_power, _cos_power))
    e = sympy.powsimp(e, combine='exp')
    return sympy.cancel(e)


def simplify(e) -> Expr:
    """Canonical form.

    Expands, rewrites even powers of cos in terms of sin, merges exp
    products and cancels to a single normalized fraction; repeated until a
    fixed point so the result is idempotent.
    """
    e = sympy.sympify(e)
    if e.is_Number or e.is_Symbol:
        return e
    for _ in range(4):
        nxt = _rewrite_once(e)
        if nxt == e:
            break
        e = nxt
    return e


def differentiate(e: Expr, var: sympy.Symbol) -> Expr:
    return simplify(sympy.diff(e, var))


def _check_binding(sym: sympy.Symbol, value: Number):
    if sym.is_nonzero and value == 0:
        raise AssumptionViolation(f'symbol {sym} is nonzero, bound to 0')
    if sym.is_positive and value <= 0:
        raise AssumptionViolation(
            f'symbol {sym} is positive, bound to {value}')


def _as_sympy(value: Number) -> Expr:
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        return sympy.Rational(value)
    return sympy.sympify(value)


def eval_at(e: Expr, b: Bindings) -> Union[sympy.Rational, float]:
    """Evaluate an expression at a binding of its free symbols.

    The result is an exact rational when all bindings are rational and no
    transcendental value remains; a float otherwise.
    """
    e = sympy.sympify(e)
    subs = {}
    for sym in e.free_symbols:
        assert isinstance(sym, sympy.Symbol)
        try:
            value = b[sym.name]
        except KeyError:
            raise UnboundSymbol(f'symbol {sym} is not bound')
        value = _as_sympy(value)
        _check_binding(sym, value)
        subs[sym] = value

    res = e.xreplace(subs)
    if res.has(*_INVALID):
        raise ExprError(f'{to_text(e)} is not finite at {dict(b)}')
    if res.is_Rational:
        return res
    val = complex(res.evalf(30))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ExprError(f'{to_text(e)} is not real at {dict(b)}')
    return val.real


def random_bindings(
        symbols: Iterable[sympy.Symbol],
        rng: np.random.Generator) -> dict[str, sympy.Rational]:
    """Small random rationals honoring the nonzero/positive flags."""
    out = {}
    for sym in sorted(symbols, key=lambda s: s.name):
        num = int(rng.integers(1, 13))
        den = int(rng.integers(1, 8))
        sign = 1 if sym.is_positive else int(rng.choice((-1, 1)))
        out[sym.name] = sympy.Rational(sign * num, den)
    return out


@dataclass(frozen=True)
class Equivalence:
    equal: bool
    probabilistic: bool = False
    points: tuple = ()

    def __bool__(self) -> bool:
        return self.equal


def equivalent(
        e1,
        e2,
        seed: int = 42,
        points: int = 20,
        rtol: float = 1e-10) -> Equivalence:
    """Decide equivalence: canonical forms first, numeric fallback second.

    The fallback compares values at `points` random rational bindings; an
    agreement is marked probabilistic.
    """
    diff = simplify(sympy.sympify(e1) - sympy.sympify(e2))
    if diff == 0:
        return Equivalence(True)
    if diff.is_Number:
        return Equivalence(False)

    rng = np.random.default_rng(seed)
    free = sympy.sympify(e1).free_symbols | sympy.sympify(e2).free_symbols
    used = []
    attempts = 0
    while len(used) < points and attempts < points * 5:
        attempts += 1
        b = random_bindings(free, rng)
        try:
            v1 = float(eval_at(e1, b))
            v2 = float(eval_at(e2, b))
        except ExprError:
            continue
        used.append(tuple(sorted((k, str(v)) for k, v in b.items())))
        if not np.isclose(v1, v2, rtol=rtol, atol=1e-12):
            return Equivalence(False, False, tuple(used))
    if not used:
        logging.warning(
            f'no valid sample point for equivalence of {to_text(diff)}')
        return Equivalence(False)
    return Equivalence(True, True, tuple(used))


def is_zero(e, seed: int = 42) -> bool:
    return equivalent(e, 0, seed=seed).equal


def lambdify(e: Expr, symbols: Iterable[sympy.Symbol]) -> Callable:
    """Numeric (numpy) callable of an expression in the given symbols."""
    return sympy.lambdify(list(symbols), e, modules='numpy')


def numeric_zero(e: Expr, b: Bindings, atol: float = 1e-9) -> bool:
    try:
        return abs(float(eval_at(e, b))) <= atol
    except ExprError:
        return False
