"""
Register automata: the data model, static validation and execution over data words.

An assignment maps registers to registers or to the parameter p. Registers left out of an
assignment are undefined after the transition, so keeping a value needs an explicit x:=x.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger

from symbolic_ra.guards import (
    PARAMETER, TRUE, Guard, UndefinedVariable, Valuation, Variable, VariableKind, canonical, conjoin, eval_guard,
    is_satisfiable, render_guard, variables,
)
from symbolic_ra.utilities import compose, format_fraction, is_injective

if TYPE_CHECKING:
    from symbolic_ra.symbolic import SymbolicRun
    from symbolic_ra.theory import Theory

Assignment = Tuple[Tuple[Variable, Variable], ...]


class AutomatonError(ValueError):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


class NondeterminismError(AutomatonError):
    '''Two transitions were enabled at once.'''


class NotInjective(AutomatonError):
    '''Two registers receive the same value on one transition.'''


@dataclass(frozen=True)
class Transition:
    source: str
    symbol: str
    guard: Guard
    assignment: Assignment
    target: str

    def __post_init__(self):
        pairs = self.assignment.items() if isinstance(self.assignment, Mapping) else self.assignment
        pairs = tuple(sorted(pairs))
        keys = [register for register, _ in pairs]
        if len(set(keys)) != len(keys):
            raise AutomatonError(f'A register is assigned twice on {self.source} --{self.symbol}--> {self.target}.')
        if not is_injective(dict(pairs)):
            raise NotInjective(
                f'The assignment on {self.source} --{self.symbol}--> {self.target} is not injective: '
                f'{format_assignment(pairs)}'
            )
        object.__setattr__(self, 'assignment', pairs)
        object.__setattr__(self, 'guard', canonical(self.guard))

    @property
    def assignment_map(self) -> Dict[Variable, Variable]:
        return dict(self.assignment)

    def __str__(self) -> str:
        assignment = f'{{ {format_assignment(self.assignment)} }}' if self.assignment else ''
        return f'{self.source} --{self.symbol}[ {render_guard(self.guard)} ]{assignment}--> {self.target}'


def format_assignment(assignment: Assignment) -> str:
    return ', '.join(f'{register}:={source}' for register, source in assignment)


@dataclass(frozen=True)
class DataSymbol:
    symbol: str
    value: Fraction

    def __str__(self) -> str:
        return f'{self.symbol}({format_fraction(self.value)})'


DataWord = Tuple[DataSymbol, ...]


@dataclass(frozen=True)
class Configuration:
    location: str
    valuation: Mapping[Variable, Fraction]

    def __str__(self) -> str:
        if not self.valuation:
            return f'({self.location}, ∅)'
        values = ', '.join(f'{register}↦{format_fraction(value)}' for register, value in sorted(self.valuation.items()))
        return f'({self.location}, {values})'


@dataclass(frozen=True)
class Run:
    configurations: Tuple[Configuration, ...]
    word: DataWord = ()
    transitions: Tuple[Transition, ...] = ()

    @property
    def final(self) -> Configuration:
        return self.configurations[-1]

    def __len__(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class RunRejected:
    """No transition was enabled for the data symbol at this 1-based position. run covers the accepted prefix."""
    position: int
    run: Run


@dataclass(frozen=True)
class RegisterAutomaton:
    alphabet: Tuple[str, ...]
    locations: Tuple[str, ...]
    initial: str
    registers: Tuple[Variable, ...]
    transitions: Tuple[Transition, ...]
    _outgoing: Dict[Tuple[str, str], Tuple[Transition, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ('alphabet', 'locations', 'registers', 'transitions'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for name in ('alphabet', 'locations', 'registers', 'transitions'):
            values = getattr(self, name)
            if len(set(values)) != len(values):
                duplicate = next(value for value in values if values.count(value) > 1)
                raise AutomatonError(f'"{duplicate}" is listed twice in the {name} of the automaton.')
        if self.initial not in self.locations:
            raise AutomatonError(f'The initial location "{self.initial}" is not a location.')
        for register in self.registers:
            if register.kind is not VariableKind.REGISTER:
                raise AutomatonError(f'"{register}" cannot be a register.')

        registers = set(self.registers)
        outgoing: Dict[Tuple[str, str], List[Transition]] = {}
        for transition in self.transitions:
            for location in (transition.source, transition.target):
                if location not in self.locations:
                    raise AutomatonError(f'Unknown location "{location}" in the transition {transition}')
            if transition.symbol not in self.alphabet:
                raise AutomatonError(f'Unknown input symbol "{transition.symbol}" in the transition {transition}')
            stray = variables(transition.guard) - registers - {PARAMETER}
            if stray:
                raise AutomatonError(
                    f'The guard of {transition} reads {", ".join(map(str, sorted(stray)))}, which are not registers.'
                )
            for register, source in transition.assignment:
                if register not in registers or (source not in registers and source != PARAMETER):
                    raise AutomatonError(f'The assignment of {transition} uses a variable that is not a register.')
            outgoing.setdefault((transition.source, transition.symbol), []).append(transition)
        object.__setattr__(self, '_outgoing', {key: tuple(value) for key, value in outgoing.items()})

    def outgoing(self, location: str, symbol: Optional[str] = None) -> Tuple[Transition, ...]:
        if symbol is not None:
            return self._outgoing.get((location, symbol), ())
        return tuple(transition for transition in self.transitions if transition.source == location)

    def index(self, transition: Transition) -> int:
        return self.transitions.index(transition)


@dataclass
class ValidationReport:
    determinism_violations: List[Tuple[Transition, Transition, Valuation]] = field(default_factory=list)
    unknown_pairs: List[Tuple[Transition, Transition, str]] = field(default_factory=list)
    injectivity_violations: List[Transition] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.determinism_violations and not self.injectivity_violations


def validate(automaton: RegisterAutomaton, theory: Theory) -> ValidationReport:
    """
    Checks that the guards of any two distinct transitions with the same source and input symbol
    cannot hold together, and that every assignment is injective.
    """
    report = ValidationReport()
    for transition in automaton.transitions:
        theory.validate_guard(transition.guard)
        if not is_injective(transition.assignment_map):
            report.injectivity_violations.append(transition)

    for location in automaton.locations:
        for symbol in automaton.alphabet:
            for first, second in itertools.combinations(automaton.outgoing(location, symbol), 2):
                result = is_satisfiable(conjoin(first.guard, second.guard), theory)
                if result.is_sat:
                    report.determinism_violations.append((first, second, result.witness))
                elif result.is_unknown:
                    logger.warning(f'Could not decide whether "{first}" and "{second}" overlap: {result.detail}')
                    report.unknown_pairs.append((first, second, result.detail))
    return report


def step(automaton: RegisterAutomaton, configuration: Configuration, data: DataSymbol, theory: Theory) -> Optional[Tuple[Configuration, Transition]]:
    binding = dict(configuration.valuation)
    binding[PARAMETER] = Fraction(data.value)
    enabled = []
    for transition in automaton.outgoing(configuration.location, data.symbol):
        try:
            if eval_guard(transition.guard, binding, theory):
                enabled.append(transition)
        except UndefinedVariable as e:
            raise UndefinedVariable(f'{e} The automaton is not well formed at the transition {transition}') from e
    if len(enabled) > 1:
        raise NondeterminismError(f'{data} enables both "{enabled[0]}" and "{enabled[1]}" in {configuration}.')
    if not enabled:
        return None
    transition = enabled[0]
    return Configuration(transition.target, compose(binding, transition.assignment_map)), transition


def run_word(automaton: RegisterAutomaton, word: Sequence[DataSymbol], theory: Theory) -> Union[Run, RunRejected]:
    configurations = [Configuration(automaton.initial, {})]
    transitions = []
    for position, data in enumerate(word, start=1):
        result = step(automaton, configurations[-1], data, theory)
        if result is None:
            prefix = Run(tuple(configurations), tuple(word[:position - 1]), tuple(transitions))
            return RunRejected(position, prefix)
        configuration, transition = result
        configurations.append(configuration)
        transitions.append(transition)
    return Run(tuple(configurations), tuple(word), tuple(transitions))


@dataclass(frozen=True)
class WellFormednessReport:
    """
    well_formed is True when every guard only reads registers that are defined on all paths into its source.
    False is inconclusive: guards on infeasible paths are still counted.
    """
    well_formed: bool
    defined: Dict[str, FrozenSet[Variable]]
    unreachable: Tuple[str, ...]
    offending: Tuple[Transition, ...]


def reachable_locations(automaton: RegisterAutomaton) -> List[str]:
    seen = [automaton.initial]
    for location in seen:
        for transition in automaton.outgoing(location):
            if transition.target not in seen:
                seen.append(transition.target)
    return seen


def check_well_formed_syntactic(automaton: RegisterAutomaton) -> WellFormednessReport:
    reachable = reachable_locations(automaton)
    everything = frozenset(automaton.registers)
    defined: Dict[str, FrozenSet[Variable]] = {
        location: frozenset() if location == automaton.initial else everything for location in reachable
    }
    incoming = [transition for transition in automaton.transitions if transition.source in defined]

    # Greatest fixpoint, every location starts from all registers and only shrinks
    changed = True
    while changed:
        changed = False
        for location in reachable:
            if location == automaton.initial:
                continue
            sets = [
                frozenset(
                    register for register, source in transition.assignment
                    if source == PARAMETER or source in defined[transition.source]
                )
                for transition in incoming if transition.target == location
            ]
            updated = frozenset.intersection(*sets)
            if updated != defined[location]:
                defined[location] = updated
                changed = True

    offending = tuple(
        transition for transition in incoming
        if not variables(transition.guard) - {PARAMETER} <= defined[transition.source]
    )
    unreachable = tuple(location for location in automaton.locations if location not in defined)
    if unreachable:
        logger.warning(f'Locations not reachable from {automaton.initial}: {", ".join(unreachable)}')
    return WellFormednessReport(not offending, defined, unreachable, offending)


@dataclass(frozen=True)
class BoundedWellFormedness:
    verdict: str
    depth: int
    run: Optional[SymbolicRun] = None
    transition: Optional[Transition] = None
    detail: str = ''

    @property
    def ok(self) -> bool:
        return self.verdict == 'ok'


def check_well_formed_bounded(automaton: RegisterAutomaton, depth: int, theory: Theory) -> BoundedWellFormedness:
    """
    Looks for a symbolic run of length below depth from which some transition reads a register
    that holds no marker. A run whose satisfiability is unknown only yields an unknown verdict.
    """
    from symbolic_ra.symbolic import enumerate_symbolic

    enumeration = enumerate_symbolic(automaton, depth, theory)
    uncertain = None
    for run, transition in enumeration.ill_formed:
        if run.is_certain:
            return BoundedWellFormedness('counterexample', depth, run, transition)
        uncertain = uncertain or (run, transition)
    if uncertain is not None:
        run, transition = uncertain
        return BoundedWellFormedness('unknown', depth, run, transition, 'the run reaching the transition may be infeasible')
    return BoundedWellFormedness('ok', depth)


def to_dot(automaton: RegisterAutomaton) -> str:
    lines = [
        'digraph RegisterAutomaton {',
        '  rankdir=LR;',
        '  node [shape=circle];',
        '  __start [shape=point];',
        f'  __start -> "{automaton.initial}";',
    ]
    lines.extend(f'  "{location}";' for location in automaton.locations)
    for transition in automaton.transitions:
        label = transition.symbol
        if transition.guard != TRUE:
            label += f', {render_guard(transition.guard)}'
        if transition.assignment:
            label += f', {format_assignment(transition.assignment)}'
        label = label.replace('"', '\\"')
        lines.append(f'  "{transition.source}" -> "{transition.target}" [label="{label}"];')
    lines.append('}')
    return '\n'.join(lines) + '\n'
