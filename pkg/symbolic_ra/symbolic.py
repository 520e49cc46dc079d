"""
Symbolic words, symbolic runs and their traces.

The i-th input of a symbolic run is named by the marker v_i. A symbolic run tracks which marker
each register holds (zeta) instead of a data value, and the guard taken at step i is the
transition guard with registers replaced by their markers and p replaced by v_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from loguru import logger

from symbolic_ra.automaton import Configuration, DataSymbol, NondeterminismError, RegisterAutomaton, Run, Transition
from symbolic_ra.guards import (
    PARAMETER, TRUE, Guard, UndefinedVariable, Valuation, Variable, VariableKind, alpha_equal, canonical, conjoin,
    eval_guard, is_satisfiable, marker, rename_guard, render_guard, variables,
)
from symbolic_ra.theory import Theory, Verdict
from symbolic_ra.utilities import compose, is_injective

Step = Tuple[str, Guard]
Marking = Tuple[Tuple[Variable, Variable], ...]


class WitnessRejected(ValueError):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


class IllFormedStep(ValueError):
    '''A transition guard reads a register that holds no marker.'''

    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


@dataclass(frozen=True)
class SymbolicWord:
    steps: Tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple((symbol, canonical(guard)) for symbol, guard in self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[Step]:
        return iter(self.steps)

    @property
    def guard(self) -> Guard:
        return conjoin(*(guard for _, guard in self.steps)) if self.steps else TRUE

    @property
    def symbols(self) -> Tuple[str, ...]:
        return tuple(symbol for symbol, _ in self.steps)

    @property
    def last(self) -> Step:
        return self.steps[-1]

    def prefix(self, length: int) -> SymbolicWord:
        return SymbolicWord(self.steps[:length])

    @property
    def parent(self) -> SymbolicWord:
        return self.prefix(len(self) - 1)

    def extend(self, symbol: str, guard: Guard) -> SymbolicWord:
        return SymbolicWord(self.steps + ((symbol, guard),))

    @property
    def sort_key(self) -> tuple:
        """Shorter words first, then the text of the steps. Every prefix sorts before its extensions."""
        return len(self.steps), tuple((symbol, render_guard(guard)) for symbol, guard in self.steps)

    def __str__(self) -> str:
        if not self.steps:
            return 'ε'
        return ' ; '.join(f'{symbol} [{render_guard(guard)}]' for symbol, guard in self.steps)


EMPTY_WORD = SymbolicWord()


def sorted_words(words) -> List[SymbolicWord]:
    return sorted(set(words), key=lambda word: word.sort_key)


@dataclass(frozen=True)
class SymbolicRun:
    locations: Tuple[str, ...]
    markings: Tuple[Marking, ...]
    transitions: Tuple[Transition, ...]
    word: SymbolicWord
    verdict: Verdict = field(default=Verdict.SAT, compare=False)
    witness: Optional[Valuation] = field(default=None, compare=False, repr=False)

    @classmethod
    def initial(cls, location: str) -> SymbolicRun:
        return cls((location,), ((),), (), EMPTY_WORD, Verdict.SAT, {})

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def final_location(self) -> str:
        return self.locations[-1]

    def marking(self, position: int) -> Dict[Variable, Variable]:
        return dict(self.markings[position])

    @property
    def final_marking(self) -> Dict[Variable, Variable]:
        return self.marking(len(self))

    def binding(self, position: int) -> Dict[Variable, Variable]:
        """The renaming applied to the guard of the transition taken at this 1-based position."""
        binding = self.marking(position - 1)
        binding[PARAMETER] = marker(position)
        return binding

    @property
    def is_certain(self) -> bool:
        return self.verdict is Verdict.SAT


@dataclass(frozen=True)
class SymbolicRejection:
    """reason is 'no-transition' or 'unsatisfiable'; position is 1-based."""
    position: int
    reason: str
    run: SymbolicRun


def extend_run(run: SymbolicRun, transition: Transition) -> SymbolicRun:
    if transition.source != run.final_location:
        raise IllFormedStep(f'{transition} does not start at {run.final_location}.')
    position = len(run) + 1
    binding = run.binding(position)
    try:
        guard = rename_guard(transition.guard, binding)
    except UndefinedVariable as e:
        raise IllFormedStep(f'After "{run.word}" the transition {transition} reads an empty register. {e}') from e
    marking = compose(binding, transition.assignment_map)

    assert is_injective(binding) and is_injective(marking), f'Non-injective marking after {transition}'
    assert all(value.kind is VariableKind.MARKER and value.index <= position for value in marking.values())

    return SymbolicRun(
        run.locations + (transition.target,),
        run.markings + (tuple(sorted(marking.items())),),
        run.transitions + (transition,),
        run.word.extend(transition.symbol, guard),
    )


def symbolic_run(automaton: RegisterAutomaton, word: SymbolicWord, theory: Theory) -> Union[SymbolicRun, SymbolicRejection]:
    """
    The unique symbolic run whose trace is word, or the first position where no transition produces the
    next guard or where the guards so far stop being satisfiable. The verdict of the returned run is
    UNKNOWN when some satisfiability check along the way could not be decided.
    """
    run = SymbolicRun.initial(automaton.initial)
    verdict, witness = Verdict.SAT, {}
    for position, (symbol, guard) in enumerate(word, start=1):
        extended = None
        for transition in automaton.outgoing(run.final_location, symbol):
            try:
                candidate = extend_run(run, transition)
            except IllFormedStep as e:
                logger.debug(e)
                continue
            if alpha_equal(candidate.word.last[1], guard):
                extended = candidate
                break
        if extended is None:
            return SymbolicRejection(position, 'no-transition', replace(run, verdict=verdict, witness=witness))
        result = is_satisfiable(extended.word.guard, theory)
        if result.is_unsat:
            return SymbolicRejection(position, 'unsatisfiable', replace(run, verdict=verdict, witness=witness))
        if result.is_unknown:
            verdict, witness = Verdict.UNKNOWN, None
        elif verdict is Verdict.SAT:
            witness = result.witness
        run = extended
    return replace(run, verdict=verdict, witness=witness)


def strace(run: SymbolicRun) -> SymbolicWord:
    return run.word


@dataclass(frozen=True)
class Enumeration:
    depth: int
    runs: Tuple[SymbolicRun, ...]
    undetermined: Tuple[SymbolicRun, ...] = ()
    ill_formed: Tuple[Tuple[SymbolicRun, Transition], ...] = ()

    @property
    def words(self) -> List[SymbolicWord]:
        return sorted_words(run.word for run in self.runs)

    @property
    def undetermined_words(self) -> List[SymbolicWord]:
        return sorted_words(run.word for run in self.undetermined)

    def run_for(self, word: SymbolicWord) -> Optional[SymbolicRun]:
        return next((run for run in self.runs + self.undetermined if run.word == word), None)


def enumerate_symbolic(automaton: RegisterAutomaton, depth: int, theory: Theory) -> Enumeration:
    """
    All symbolic runs of length at most depth, breadth first. Branches whose guard is unsatisfiable are
    dropped; branches the theory cannot decide are kept and returned separately. Transitions that read
    an empty register are collected in ill_formed instead of being taken.
    """
    found: Dict[SymbolicWord, SymbolicRun] = {EMPTY_WORD: SymbolicRun.initial(automaton.initial)}
    ill_formed: List[Tuple[SymbolicRun, Transition]] = []
    frontier = list(found.values())
    for level in range(1, depth + 1):
        following = []
        for run in frontier:
            for transition in automaton.outgoing(run.final_location):
                try:
                    extended = extend_run(run, transition)
                except IllFormedStep:
                    ill_formed.append((run, transition))
                    continue
                result = is_satisfiable(extended.word.guard, theory)
                if result.is_unsat:
                    continue
                if result.is_sat:
                    extended = replace(extended, verdict=Verdict.SAT, witness=result.witness)
                else:
                    extended = replace(extended, verdict=Verdict.UNKNOWN)
                if extended.word in found:
                    raise NondeterminismError(
                        f'Two symbolic runs share the trace "{extended.word}"; the automaton is not deterministic.'
                    )
                found[extended.word] = extended
                following.append(extended)
        logger.debug(f'Depth {level}: {len(following)} symbolic runs')
        frontier = following
        if not frontier:
            break

    # A satisfiable extension settles an undecided prefix
    for word in sorted(found, key=lambda w: w.sort_key, reverse=True):
        run = found[word]
        if not word or not run.is_certain:
            continue
        parent = found[word.parent]
        if not parent.is_certain:
            markers = {marker(index) for index in range(1, len(parent) + 1)}
            witness = {key: value for key, value in run.witness.items() if key in markers}
            found[word.parent] = replace(parent, verdict=Verdict.SAT, witness=witness)

    runs = tuple(found[word] for word in sorted_words(found) if found[word].is_certain)
    undetermined = tuple(found[word] for word in sorted_words(found) if not found[word].is_certain)
    if undetermined:
        logger.warning(f'{len(undetermined)} symbolic words up to depth {depth} have undecided satisfiability')
    return Enumeration(depth, runs, undetermined, tuple(ill_formed))


def is_feasible(word: SymbolicWord, theory: Theory) -> Optional[bool]:
    """True or False, or None when the theory cannot decide satisfiability."""
    for position, (_, guard) in enumerate(word, start=1):
        for variable in variables(guard):
            if variable.kind is not VariableKind.MARKER or variable.index > position:
                return False
    result = is_satisfiable(word.guard, theory)
    if result.is_unknown:
        return None
    return result.is_sat


def concretize(run: SymbolicRun, valuation: Mapping[Variable, Fraction], theory: Theory) -> Run:
    missing = [marker(index) for index in range(1, len(run) + 1) if marker(index) not in valuation]
    if missing:
        raise WitnessRejected(f'The valuation has no value for {", ".join(map(str, missing))}.')
    if not eval_guard(run.word.guard, valuation, theory):
        raise WitnessRejected(f'The valuation does not satisfy "{render_guard(run.word.guard)}".')
    configurations = tuple(
        Configuration(location, compose(valuation, run.marking(position)))
        for position, location in enumerate(run.locations)
    )
    word = tuple(
        DataSymbol(symbol, Fraction(valuation[marker(position)]))
        for position, (symbol, _) in enumerate(run.word, start=1)
    )
    return Run(configurations, word, run.transitions)


def abstract_run(concrete: Run) -> Tuple[SymbolicRun, Valuation]:
    symbolic = SymbolicRun.initial(concrete.configurations[0].location)
    for transition in concrete.transitions:
        symbolic = extend_run(symbolic, transition)
    valuation = {marker(position): data.value for position, data in enumerate(concrete.word, start=1)}
    return replace(symbolic, verdict=Verdict.SAT, witness=valuation), valuation
