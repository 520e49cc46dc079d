"""
Guards: boolean combinations of relation atoms over markers, registers and the parameter p.

Guards are immutable trees. canonical() puts a guard in negation normal form with flattened,
deduplicated and sorted And/Or children, so syntactic equality of canonical forms decides
whether two guards are the same guard.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterable, List, Mapping, Tuple

import regex
from loguru import logger

if TYPE_CHECKING:
    from symbolic_ra.theory import SatResult, Theory

MARKER_NAME = regex.compile(r'v([1-9][0-9]*)')
IDENTIFIER = regex.compile(r'[A-Za-z_][A-Za-z0-9_]*')
RESERVED_NAMES = {'p', 'true', 'false', 'and', 'or', 'not'}
SLOT_REFERENCE = regex.compile(r'\$(\d+)')


class GuardError(ValueError):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


class UndefinedVariable(GuardError):
    '''Raised when a guard is evaluated or renamed where one of its variables has no value.'''


class VariableKind(Enum):
    MARKER = 0
    REGISTER = 1
    PARAMETER = 2


@functools.total_ordering
@dataclass(frozen=True)
class Variable:
    kind: VariableKind
    index: int = 0
    name: str = ''

    def __post_init__(self):
        if self.kind is VariableKind.MARKER and self.index < 1:
            raise GuardError(f'Marker indices start at 1, got {self.index}.')
        if self.kind is VariableKind.REGISTER:
            if not IDENTIFIER.fullmatch(self.name) or self.name in RESERVED_NAMES or MARKER_NAME.fullmatch(self.name):
                raise GuardError(f'"{self.name}" cannot name a register. Use an identifier other than p or v<number>.')

    @classmethod
    def marker(cls, index: int) -> Variable:
        return cls(VariableKind.MARKER, index=index)

    @classmethod
    def register(cls, name: str) -> Variable:
        return cls(VariableKind.REGISTER, name=name)

    @classmethod
    def from_name(cls, text: str) -> Variable:
        if text == 'p':
            return PARAMETER
        match = MARKER_NAME.fullmatch(text)
        if match:
            return cls.marker(int(match[1]))
        return cls.register(text)

    @property
    def sort_key(self) -> Tuple[int, int, str]:
        return self.kind.value, self.index, self.name

    def __lt__(self, other: Variable) -> bool:
        return self.sort_key < other.sort_key

    def __str__(self) -> str:
        if self.kind is VariableKind.MARKER:
            return f'v{self.index}'
        if self.kind is VariableKind.PARAMETER:
            return 'p'
        return self.name


PARAMETER = Variable(VariableKind.PARAMETER)

Valuation = Dict[Variable, Fraction]
Renaming = Dict[Variable, Variable]


def marker(index: int) -> Variable:
    return Variable.marker(index)


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    arity: int


class Guard:
    '''Base of the guard AST. The operators build canonical guards.'''

    def __and__(self, other: Guard) -> Guard:
        return conjoin(self, other)

    def __or__(self, other: Guard) -> Guard:
        return disjoin(self, other)

    def __invert__(self) -> Guard:
        return negate(self)

    def __str__(self) -> str:
        return render_guard(self)


@dataclass(frozen=True)
class Top(Guard):
    pass


@dataclass(frozen=True)
class Atom(Guard):
    symbol: RelationSymbol
    args: Tuple[Variable, ...]

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise GuardError(f'"{self.symbol.name}" takes {self.symbol.arity} arguments, got {len(self.args)}.')


@dataclass(frozen=True)
class Not(Guard):
    child: Guard


@dataclass(frozen=True)
class And(Guard):
    children: Tuple[Guard, ...]


@dataclass(frozen=True)
class Or(Guard):
    children: Tuple[Guard, ...]


TRUE = Top()
FALSE = Not(TRUE)


def variables(guard: Guard) -> FrozenSet[Variable]:
    if isinstance(guard, Atom):
        return frozenset(guard.args)
    if isinstance(guard, Not):
        return variables(guard.child)
    if isinstance(guard, (And, Or)):
        return frozenset().union(*(variables(child) for child in guard.children))
    return frozenset()


def atoms(guard: Guard) -> Iterable[Atom]:
    if isinstance(guard, Atom):
        yield guard
    elif isinstance(guard, Not):
        yield from atoms(guard.child)
    elif isinstance(guard, (And, Or)):
        for child in guard.children:
            yield from atoms(child)


def sort_key(guard: Guard) -> tuple:
    if isinstance(guard, Top):
        return (0,)
    if isinstance(guard, Atom):
        return 1, guard.symbol.name, tuple(arg.sort_key for arg in guard.args)
    if isinstance(guard, Not):
        return 2, sort_key(guard.child)
    kind = 3 if isinstance(guard, And) else 4
    return kind, tuple(sort_key(child) for child in guard.children)


@functools.lru_cache(maxsize=None)
def canonical(guard: Guard) -> Guard:
    return _normal_form(guard, negated=False)


def _normal_form(guard: Guard, negated: bool) -> Guard:
    if isinstance(guard, Top):
        return FALSE if negated else TRUE
    if isinstance(guard, Atom):
        return Not(guard) if negated else guard
    if isinstance(guard, Not):
        return _normal_form(guard.child, not negated)
    children = [_normal_form(child, negated) for child in guard.children]
    # De Morgan swaps the connective under a negation
    if isinstance(guard, And) != negated:
        return _junction(And, children)
    return _junction(Or, children)


def _junction(kind: type, children: List[Guard]) -> Guard:
    unit, absorbing = (TRUE, FALSE) if kind is And else (FALSE, TRUE)
    flat = []
    for child in children:
        flat.extend(child.children if isinstance(child, kind) else (child,))
    if absorbing in flat:
        return absorbing
    unique = {child for child in flat if child != unit}
    if not unique:
        return unit
    if len(unique) == 1:
        return unique.pop()
    return kind(tuple(sorted(unique, key=sort_key)))


def conjoin(*guards: Guard) -> Guard:
    return canonical(And(tuple(guards)))


def disjoin(*guards: Guard) -> Guard:
    return canonical(Or(tuple(guards)))


def negate(guard: Guard) -> Guard:
    return canonical(Not(guard))


def alpha_equal(first: Guard, second: Guard) -> bool:
    return canonical(first) == canonical(second)


def _require_defined(guard: Guard, domain: Iterable[Variable], action: str) -> None:
    missing = variables(guard) - set(domain)
    if missing:
        names = ', '.join(str(variable) for variable in sorted(missing))
        raise UndefinedVariable(f'Cannot {action} "{render_guard(guard)}": no value for {names}.')


def rename_guard(guard: Guard, renaming: Mapping[Variable, Variable]) -> Guard:
    _require_defined(guard, renaming.keys(), 'rename')
    return canonical(_substitute(guard, renaming))


def _substitute(guard: Guard, renaming: Mapping[Variable, Variable]) -> Guard:
    if isinstance(guard, Atom):
        return Atom(guard.symbol, tuple(renaming[arg] for arg in guard.args))
    if isinstance(guard, Not):
        return Not(_substitute(guard.child, renaming))
    if isinstance(guard, (And, Or)):
        return type(guard)(tuple(_substitute(child, renaming) for child in guard.children))
    return guard


def eval_guard(guard: Guard, valuation: Mapping[Variable, Fraction], theory: Theory) -> bool:
    _require_defined(guard, valuation.keys(), 'evaluate')
    return _evaluate(guard, valuation, theory)


def _evaluate(guard: Guard, valuation: Mapping[Variable, Fraction], theory: Theory) -> bool:
    if isinstance(guard, Top):
        return True
    if isinstance(guard, Atom):
        return theory.holds(guard.symbol, tuple(valuation[arg] for arg in guard.args))
    if isinstance(guard, Not):
        return not _evaluate(guard.child, valuation, theory)
    if isinstance(guard, And):
        return all(_evaluate(child, valuation, theory) for child in guard.children)
    return any(_evaluate(child, valuation, theory) for child in guard.children)


def is_satisfiable(guard: Guard, theory: Theory) -> SatResult:
    """
    Decides Sat(guard) with the theory's procedure.
    A sat answer always carries a witness that has been re-checked with eval_guard.
    """
    from symbolic_ra.theory import SatResult

    original = guard
    guard = canonical(guard)
    result = theory.check(guard)
    if result.is_sat:
        # Canonical forms can drop variables, so the witness still has to cover the caller's guard
        witness = dict(result.witness)
        for variable in variables(original):
            witness.setdefault(variable, Fraction(0))
        try:
            valid = eval_guard(original, witness, theory)
        except UndefinedVariable:
            valid = False
        if not valid:
            logger.error(f'The {theory.name} theory returned a witness that does not satisfy "{render_guard(guard)}".')
            return SatResult.unknown('witness failed validation')
        return SatResult.sat(witness)
    return result


def disjunctive_normal_form(guard: Guard) -> List[List[Tuple[Atom, bool]]]:
    """
    The disjuncts of a guard as lists of (atom, polarity) literals.
    true is [[]] and false is [].
    """
    guard = canonical(guard)
    if isinstance(guard, Top):
        return [[]]
    if guard == FALSE:
        return []
    if isinstance(guard, Atom):
        return [[(guard, True)]]
    if isinstance(guard, Not):
        return [[(guard.child, False)]]
    if isinstance(guard, Or):
        return [conjunct for child in guard.children for conjunct in disjunctive_normal_form(child)]
    disjuncts: List[List[Tuple[Atom, bool]]] = [[]]
    for child in guard.children:
        disjuncts = [left + right for left in disjuncts for right in disjunctive_normal_form(child)]
    return disjuncts


def literal_guard(literals: Iterable[Tuple[Atom, bool]]) -> Guard:
    return conjoin(*(atom if positive else Not(atom) for atom, positive in literals))


def render_atom(atom: Atom) -> str:
    names = [str(arg) for arg in atom.args]
    if '$' in atom.symbol.name:
        return SLOT_REFERENCE.sub(lambda match: names[int(match[1]) - 1], atom.symbol.name)
    return f'{atom.symbol.name}({", ".join(names)})'


def render_guard(guard: Guard) -> str:
    if isinstance(guard, Top):
        return 'true'
    if guard == FALSE:
        return 'false'
    if isinstance(guard, Atom):
        return render_atom(guard)
    if isinstance(guard, Not):
        return f'!({render_guard(guard.child)})'
    if isinstance(guard, And):
        return ' && '.join(
            f'({render_guard(child)})' if isinstance(child, Or) else render_guard(child) for child in guard.children
        )
    return ' || '.join(
        f'({render_guard(child)})' if isinstance(child, And) else render_guard(child) for child in guard.children
    )
