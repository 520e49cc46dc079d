"""
SMT-LIB v2 export of guards and an external solver run as a subprocess.

The solver reads the script on stdin and answers sat, unsat or unknown on its first output line.
"""
from __future__ import annotations

import shlex
import subprocess
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, List, Optional, Union

import regex
from loguru import logger

from symbolic_ra.expressions import Absolute, BinaryOp, Comparison, Const, Expr, Negate, Slot
from symbolic_ra.guards import And, Atom, Guard, GuardError, Not, Or, Top, Variable, variables
from symbolic_ra.theory import SatResult

if TYPE_CHECKING:
    from ra_theories.default_theories import LinearRationalTheory

SEXPR_TOKEN = regex.compile(r'\s*(\(|\)|[^\s()]+)')

SExpr = Union[str, List['SExpr']]


class SolverError(RuntimeError):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


def smt_number(value: Fraction) -> str:
    magnitude = abs(value)
    if magnitude.denominator == 1:
        text = f'{magnitude.numerator}.0'
    else:
        text = f'(/ {magnitude.numerator}.0 {magnitude.denominator}.0)'
    return f'(- {text})' if value < 0 else text


def smt_expression(expr: Expr, names: List[str]) -> str:
    if isinstance(expr, Const):
        return smt_number(expr.value)
    if isinstance(expr, Slot):
        return names[expr.index - 1]
    if isinstance(expr, Negate):
        return f'(- {smt_expression(expr.operand, names)})'
    if isinstance(expr, Absolute):
        inner = smt_expression(expr.operand, names)
        return f'(ite (>= {inner} 0.0) {inner} (- {inner}))'
    if isinstance(expr, BinaryOp):
        return f'({expr.op} {smt_expression(expr.left, names)} {smt_expression(expr.right, names)})'
    raise TypeError(f'Not an expression: {expr!r}')


def smt_comparison(comparison: Comparison, names: List[str]) -> str:
    left = smt_expression(comparison.left, names)
    right = smt_expression(comparison.right, names)
    if comparison.op == '!=':
        return f'(not (= {left} {right}))'
    return f'({comparison.op} {left} {right})'


def smt_guard(guard: Guard, theory: LinearRationalTheory) -> str:
    if isinstance(guard, Top):
        return 'true'
    if isinstance(guard, Atom):
        try:
            template = theory.template(guard.symbol)
        except GuardError as e:
            raise GuardError(f'No SMT-LIB form for the relation "{guard.symbol.name}".') from e
        return smt_comparison(template, [str(arg) for arg in guard.args])
    if isinstance(guard, Not):
        return f'(not {smt_guard(guard.child, theory)})'
    connective = 'and' if isinstance(guard, And) else 'or'
    return f'({connective} {" ".join(smt_guard(child, theory) for child in guard.children)})'


def export_smt(guard: Guard, theory: LinearRationalTheory, with_model: bool = False) -> str:
    names = [str(variable) for variable in sorted(variables(guard))]
    lines = []
    if with_model:
        lines.append('(set-option :produce-models true)')
    lines.append('(set-logic QF_NRA)')
    lines.extend(f'(declare-fun {name} () Real)' for name in names)
    lines.append(f'(assert {smt_guard(guard, theory)})')
    lines.append('(check-sat)')
    if with_model and names:
        lines.append(f'(get-value ({" ".join(names)}))')
    return '\n'.join(lines) + '\n'


def parse_sexpr(text: str) -> List[SExpr]:
    stack: List[List[SExpr]] = [[]]
    for token in SEXPR_TOKEN.findall(text):
        if token == '(':
            stack.append([])
        elif token == ')':
            if len(stack) == 1:
                raise SolverError(f'Unbalanced solver output: {text!r}')
            finished = stack.pop()
            stack[-1].append(finished)
        else:
            stack[-1].append(token)
    if len(stack) != 1:
        raise SolverError(f'Unbalanced solver output: {text!r}')
    return stack[0]


def sexpr_value(term: SExpr) -> Fraction:
    if isinstance(term, str):
        return Fraction(term)
    if len(term) == 2 and term[0] == '-':
        return -sexpr_value(term[1])
    if len(term) == 3 and term[0] == '/':
        return sexpr_value(term[1]) / sexpr_value(term[2])
    raise SolverError(f'Cannot read the model value {term!r}')


class ExternalSolver:
    """Runs an SMT-LIB solver command such as "z3 -in" or "cvc5 --lang smt2"."""

    def __init__(self, command: str, timeout: float = 10):
        self.command = command
        self.timeout = timeout

    def run(self, script: str) -> List[str]:
        try:
            completed = subprocess.run(
                shlex.split(self.command),
                input=script,
                capture_output=True,
                encoding='UTF-8',
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as e:
            raise SolverError(f'The solver command "{self.command}" failed: {e}') from e
        lines = completed.stdout.splitlines()
        if not lines:
            raise SolverError(f'The solver command "{self.command}" printed nothing. stderr: {completed.stderr.strip()}')
        return lines

    def check(self, guard: Guard, theory: LinearRationalTheory) -> SatResult:
        script = export_smt(guard, theory, with_model=True)
        lines = self.run(script)
        answer = lines[0].strip()
        logger.debug(f'{self.command}: {answer}')
        if answer == 'unsat':
            return SatResult.unsat()
        if answer != 'sat':
            return SatResult.unknown(f'external solver answered {answer}')
        witness = self.read_model('\n'.join(lines[1:]))
        if witness is None:
            return SatResult.unknown('external solver model unreadable')
        for variable in variables(guard):
            witness.setdefault(variable, Fraction(0))
        return SatResult.sat(witness)

    @staticmethod
    def read_model(text: str) -> Optional[Dict[Variable, Fraction]]:
        if not text.strip():
            return {}
        try:
            (pairs,) = parse_sexpr(text)
            return {Variable.from_name(name): sexpr_value(value) for name, value in pairs}
        except (SolverError, ValueError, TypeError, ZeroDivisionError) as e:
            logger.warning(f'Could not read the solver model: {e}')
            return None
