"""
Arithmetic comparison templates.

A template is a comparison between two arithmetic expressions whose variables are numbered
slots $1, $2, ... (one slot per variable occurrence, numbered left to right). The rational
theories use the canonical text of a template as the name of a relation symbol, so the atoms
"x <= p" and "v1 <= v2" share the relation symbol "$1 <= $2".
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import regex

from symbolic_ra.utilities import format_fraction, parse_fraction

COMPARISON_OPERATORS = ('<', '<=', '=', '!=', '>', '>=')
NEGATED_OPERATORS = {'<': '>=', '<=': '>', '=': '!=', '!=': '=', '>': '<=', '>=': '<'}

# Binding strength used by the printer
SUM, PRODUCT, UNARY, ATOM = 1, 2, 3, 4

TOKEN = regex.compile(
    r'''\s*(?:
        (?P<number>\d+(?:\.\d+)?(?:/\d+)?)
      | (?P<slot>\$\d+)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<symbol><=|>=|!=|==|&&|\|\||[-+*()<>=|!&,]|[≤≥≠∧∨¬⊤⊥·−])
    )''',
    regex.VERBOSE
)
TOKEN_ALIASES = {
    '≤': '<=', '≥': '>=', '≠': '!=', '==': '=', '∧': '&&', '&': '&&', '∨': '||', '¬': '!',
    '·': '*', '−': '-', '⊤': 'true', '⊥': 'false',
}
KEYWORDS = {'true', 'false', 'and', 'or', 'not'}


class ExpressionSyntaxError(ValueError):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


class Expr:
    """Base of the arithmetic expression tree. Nodes are immutable and hashable."""


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class Slot(Expr):
    index: int


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinaryOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Absolute(Expr):
    operand: Expr


ZERO = Const(Fraction(0))


@dataclass(frozen=True)
class Comparison:
    left: Expr
    op: str
    right: Expr

    def __post_init__(self):
        if self.op not in COMPARISON_OPERATORS:
            raise ExpressionSyntaxError(f'Unknown comparison operator "{self.op}".')

    def __str__(self) -> str:
        return render_comparison(self)

    def negated(self) -> Comparison:
        return Comparison(self.left, NEGATED_OPERATORS[self.op], self.right)


def slots(expr: Expr) -> Iterator[int]:
    if isinstance(expr, Slot):
        yield expr.index
    elif isinstance(expr, (Negate, Absolute)):
        yield from slots(expr.operand)
    elif isinstance(expr, BinaryOp):
        yield from slots(expr.left)
        yield from slots(expr.right)


def comparison_slots(comparison: Comparison) -> List[int]:
    return [*slots(comparison.left), *slots(comparison.right)]


def render(expr: Expr, names: Optional[Sequence[str]] = None) -> str:
    return _render(expr, names, 0)


def _render(expr: Expr, names: Optional[Sequence[str]], required: int) -> str:
    if isinstance(expr, Const):
        text, strength = format_fraction(expr.value), (UNARY if expr.value < 0 else ATOM)
    elif isinstance(expr, Slot):
        text, strength = (names[expr.index - 1] if names is not None else f'${expr.index}'), ATOM
    elif isinstance(expr, Absolute):
        text, strength = f'|{_render(expr.operand, names, 0)}|', ATOM
    elif isinstance(expr, Negate):
        text, strength = '-' + _render(expr.operand, names, ATOM), UNARY
    elif isinstance(expr, BinaryOp):
        strength = PRODUCT if expr.op == '*' else SUM
        left = _render(expr.left, names, strength)
        right = _render(expr.right, names, strength + 1)
        text = f'{left} {expr.op} {right}'
    else:
        raise TypeError(f'Not an expression: {expr!r}')
    if strength < required:
        return f'({text})'
    return text


def render_comparison(comparison: Comparison, names: Optional[Sequence[str]] = None) -> str:
    return f'{render(comparison.left, names)} {comparison.op} {render(comparison.right, names)}'


def evaluate(expr: Expr, values: Sequence[Fraction]) -> Fraction:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Slot):
        return Fraction(values[expr.index - 1])
    if isinstance(expr, Negate):
        return -evaluate(expr.operand, values)
    if isinstance(expr, Absolute):
        return abs(evaluate(expr.operand, values))
    left, right = evaluate(expr.left, values), evaluate(expr.right, values)
    if expr.op == '+':
        return left + right
    if expr.op == '-':
        return left - right
    return left * right


def compare(left: Fraction, op: str, right: Fraction) -> bool:
    if op == '<':
        return left < right
    if op == '<=':
        return left <= right
    if op == '=':
        return left == right
    if op == '!=':
        return left != right
    if op == '>':
        return left > right
    return left >= right


def holds(comparison: Comparison, values: Sequence[Fraction]) -> bool:
    return compare(evaluate(comparison.left, values), comparison.op, evaluate(comparison.right, values))


# A polynomial maps monomials (sorted tuples of variables, () for the constant) to coefficients
Polynomial = Dict[Tuple, Fraction]


def expand(expr: Expr, args: Sequence) -> Polynomial:
    """
    Multiplies out an absolute-value-free expression into a polynomial over the argument variables.
    Repeated arguments collapse, so "$1 - $2" over (x, x) is the zero polynomial.
    """
    if isinstance(expr, Const):
        return {(): expr.value} if expr.value else {}
    if isinstance(expr, Slot):
        return {(args[expr.index - 1],): Fraction(1)}
    if isinstance(expr, Negate):
        return {monomial: -coefficient for monomial, coefficient in expand(expr.operand, args).items()}
    if isinstance(expr, Absolute):
        raise ValueError('Absolute values must be split into cases before expansion.')
    left, right = expand(expr.left, args), expand(expr.right, args)
    if expr.op == '*':
        result: Polynomial = {}
        for left_monomial, left_coefficient in left.items():
            for right_monomial, right_coefficient in right.items():
                monomial = tuple(sorted(left_monomial + right_monomial))
                result[monomial] = result.get(monomial, Fraction(0)) + left_coefficient * right_coefficient
    else:
        sign = 1 if expr.op == '+' else -1
        result = dict(left)
        for monomial, coefficient in right.items():
            result[monomial] = result.get(monomial, Fraction(0)) + sign * coefficient
    return {monomial: coefficient for monomial, coefficient in result.items() if coefficient}


def split_absolute(comparison: Comparison) -> List[Tuple[Tuple[Comparison, ...], Comparison]]:
    """
    Case split on every absolute value. Each case is (side conditions, comparison without |.|);
    the original comparison is equivalent to the disjunction over cases of their conjunctions.
    """
    return [
        (left_conditions + right_conditions, Comparison(left, comparison.op, right))
        for left_conditions, left in _split(comparison.left)
        for right_conditions, right in _split(comparison.right)
    ]


def _split(expr: Expr) -> List[Tuple[Tuple[Comparison, ...], Expr]]:
    if isinstance(expr, (Const, Slot)):
        return [((), expr)]
    if isinstance(expr, Negate):
        return [(conditions, Negate(inner)) for conditions, inner in _split(expr.operand)]
    if isinstance(expr, BinaryOp):
        return [
            (left_conditions + right_conditions, BinaryOp(expr.op, left, right))
            for left_conditions, left in _split(expr.left)
            for right_conditions, right in _split(expr.right)
        ]
    cases = []
    for conditions, inner in _split(expr.operand):
        cases.append((conditions + (Comparison(inner, '>=', ZERO),), inner))
        cases.append((conditions + (Comparison(inner, '<', ZERO),), Negate(inner)))
    return cases


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = TOKEN.match(text, position)
        if match is None:
            if text[position:].strip():
                raise ExpressionSyntaxError(f'Unexpected character "{text[position]}" at column {position + 1} of "{text}".')
            break
        kind = match.lastgroup
        start = match.start(kind)
        value = match[kind]
        value = TOKEN_ALIASES.get(value, value)
        if (kind == 'name' and value in KEYWORDS) or value in ('true', 'false'):
            kind = 'keyword'
        tokens.append(Token(kind, value, start))
        position = match.end()
    return tokens


class ExpressionParser:
    """
    Recursive-descent parser for comparisons of arithmetic expressions.
    Subclasses decide what a name means by overriding variable().
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.position = 0

    def error(self, message: str) -> ExpressionSyntaxError:
        token = self.peek()
        where = f'at column {token.position + 1}' if token else 'at the end'
        return ExpressionSyntaxError(f'{message} {where} of "{self.text}".')

    def peek(self, offset: int = 0) -> Optional[Token]:
        index = self.position + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def peek_text(self, offset: int = 0) -> Optional[str]:
        token = self.peek(offset)
        return token.text if token else None

    def advance(self) -> Token:
        token = self.peek()
        if token is None:
            raise self.error('Unexpected end of input')
        self.position += 1
        return token

    def expect(self, text: str) -> Token:
        if self.peek_text() != text:
            raise self.error(f'Expected "{text}"')
        return self.advance()

    def at_end(self) -> bool:
        return self.position >= len(self.tokens)

    def parse_comparison(self) -> Comparison:
        left = self.parse_sum()
        op = self.peek_text()
        if op not in COMPARISON_OPERATORS:
            raise self.error('Expected a comparison operator')
        self.advance()
        return Comparison(left, op, self.parse_sum())

    def parse_sum(self) -> Expr:
        expr = self.parse_product()
        while self.peek_text() in ('+', '-'):
            op = self.advance().text
            expr = BinaryOp(op, expr, self.parse_product())
        return expr

    def parse_product(self) -> Expr:
        expr = self.parse_factor()
        while self.peek_text() == '*':
            self.advance()
            expr = BinaryOp('*', expr, self.parse_factor())
        return expr

    def parse_factor(self) -> Expr:
        token = self.peek()
        if token is None:
            raise self.error('Expected an expression')
        if token.text == '-':
            self.advance()
            following = self.peek()
            if following is not None and following.kind == 'number':
                return Const(-parse_fraction(self.advance().text))
            return Negate(self.parse_factor())
        if token.kind == 'number':
            return Const(parse_fraction(self.advance().text))
        if token.text == '(':
            self.advance()
            expr = self.parse_sum()
            self.expect(')')
            return expr
        if token.text == '|':
            self.advance()
            expr = self.parse_sum()
            self.expect('|')
            return Absolute(expr)
        if token.kind == 'slot':
            return self.slot(self.advance())
        if token.kind == 'name':
            return self.variable(self.advance())
        raise self.error(f'Unexpected "{token.text}"')

    def slot(self, token: Token) -> Expr:
        raise self.error('Slots are only allowed in templates')

    def variable(self, token: Token) -> Expr:
        raise self.error(f'Unexpected name "{token.text}"')


class TemplateParser(ExpressionParser):

    def slot(self, token: Token) -> Expr:
        return Slot(int(token.text[1:]))


@functools.lru_cache(maxsize=None)
def parse_template(name: str) -> Comparison:
    """
    Reads a relation symbol name back into its comparison.
    Slots must be numbered 1..n, each used exactly once.
    """
    parser = TemplateParser(name)
    comparison = parser.parse_comparison()
    if not parser.at_end():
        raise parser.error('Trailing input')
    used = comparison_slots(comparison)
    if sorted(used) != list(range(1, len(used) + 1)):
        raise ExpressionSyntaxError(f'The slots of "{name}" must be $1..${len(used)}, each used once.')
    return comparison
