"""
Bounded equivalence of two register automata, on symbolic traces or on data words.

Data mode compares the data languages up to the depth: a data word of length n accepted by one
automaton is accepted by the other iff its values satisfy the guard of one of the other automaton's
symbolic words with the same symbols. The difference is decided by the theory; guards it cannot
decide fall back to random sampling of data words.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger

from symbolic_ra.automaton import DataSymbol, RegisterAutomaton, Run, run_word
from symbolic_ra.guards import conjoin, disjoin, is_satisfiable, marker, negate
from symbolic_ra.symbolic import Enumeration, SymbolicWord, enumerate_symbolic
from symbolic_ra.theory import Theory

SIDES = ('first', 'second')


class EquivalenceMode(Enum):
    DATA = 'data'
    SYMBOLIC = 'symbolic'


class Outcome(Enum):
    EQUAL = 'equal'
    COUNTEREXAMPLE = 'counterexample'
    UNKNOWN = 'unknown'


@dataclass(frozen=True)
class EquivalenceVerdict:
    mode: EquivalenceMode
    depth: int
    outcome: Outcome
    counterexample: Union[SymbolicWord, Tuple[DataSymbol, ...], None] = None
    accepted_by: Optional[str] = None
    detail: str = ''

    @property
    def exit_status(self) -> int:
        return {Outcome.EQUAL: 0, Outcome.COUNTEREXAMPLE: 1, Outcome.UNKNOWN: 2}[self.outcome]

    def __str__(self) -> str:
        if self.outcome is Outcome.EQUAL:
            return f'equal ({self.mode.value} traces up to depth {self.depth})'
        if self.outcome is Outcome.UNKNOWN:
            return f'unknown ({self.detail})'
        if isinstance(self.counterexample, SymbolicWord):
            word = str(self.counterexample)
        else:
            word = ' '.join(map(str, self.counterexample)) or 'ε'
        text = f'counterexample: {word}\naccepted only by the {self.accepted_by} automaton'
        if self.detail:
            text += f' ({self.detail})'
        return text


def check_equivalence(first: RegisterAutomaton, second: RegisterAutomaton, mode: EquivalenceMode, depth: int,
                      theory: Theory, sampling_attempts: int = 200, sampling_seed: int = 0) -> EquivalenceVerdict:
    enumerations = (enumerate_symbolic(first, depth, theory), enumerate_symbolic(second, depth, theory))
    if mode is EquivalenceMode.SYMBOLIC:
        return _symbolic_equivalence(enumerations, depth)
    automata = (first, second)
    return _data_equivalence(automata, enumerations, depth, theory, random.Random(sampling_seed), sampling_attempts)


def _symbolic_equivalence(enumerations: Sequence[Enumeration], depth: int) -> EquivalenceVerdict:
    sure = [set(enumeration.words) for enumeration in enumerations]
    unsure = [set(enumeration.undetermined_words) for enumeration in enumerations]
    undecided = []
    for side in (0, 1):
        other = 1 - side
        differences = sure[side] - sure[other] - unsure[other]
        if differences:
            word = min(differences, key=lambda w: w.sort_key)
            return EquivalenceVerdict(EquivalenceMode.SYMBOLIC, depth, Outcome.COUNTEREXAMPLE, word, SIDES[side])
        undecided.extend(unsure[side] - sure[other] - unsure[other])
    if undecided:
        word = min(undecided, key=lambda w: w.sort_key)
        return EquivalenceVerdict(
            EquivalenceMode.SYMBOLIC, depth, Outcome.UNKNOWN,
            detail=f'satisfiability of "{word}" is undecided',
        )
    return EquivalenceVerdict(EquivalenceMode.SYMBOLIC, depth, Outcome.EQUAL)


def _data_equivalence(automata: Sequence[RegisterAutomaton], enumerations: Sequence[Enumeration], depth: int,
                      theory: Theory, rng: random.Random, attempts: int) -> EquivalenceVerdict:
    by_symbols: List[Dict[Tuple[str, ...], List[SymbolicWord]]] = []
    for enumeration in enumerations:
        grouped: Dict[Tuple[str, ...], List[SymbolicWord]] = {}
        for word in enumeration.words + enumeration.undetermined_words:
            grouped.setdefault(word.symbols, []).append(word)
        by_symbols.append(grouped)

    undecided: List[Tuple[int, SymbolicWord]] = []
    for side in (0, 1):
        other = 1 - side
        for symbols, words in sorted(by_symbols[side].items(), key=lambda item: (len(item[0]), item[0])):
            covered = disjoin(*(word.guard for word in by_symbols[other].get(symbols, [])))
            for word in words:
                result = is_satisfiable(conjoin(word.guard, negate(covered)), theory)
                if result.is_unsat:
                    continue
                if result.is_unknown:
                    undecided.append((side, word))
                    continue
                data_word = tuple(
                    DataSymbol(symbol, Fraction(result.witness.get(marker(position), 0)))
                    for position, symbol in enumerate(word.symbols, start=1)
                )
                if _accepted_only_by(automata, side, data_word, theory):
                    return EquivalenceVerdict(EquivalenceMode.DATA, depth, Outcome.COUNTEREXAMPLE, data_word, SIDES[side])
                logger.error(f'The difference witness {" ".join(map(str, data_word))} did not replay; treating it as unknown')
                undecided.append((side, word))

    if not undecided:
        return EquivalenceVerdict(EquivalenceMode.DATA, depth, Outcome.EQUAL)

    logger.warning(f'{len(undecided)} symbolic words could not be compared exactly; sampling {attempts} data words each')
    for side, word in undecided:
        for _ in range(attempts):
            data_word = tuple(DataSymbol(symbol, _random_value(rng)) for symbol in word.symbols)
            if _accepted_only_by(automata, side, data_word, theory):
                return EquivalenceVerdict(
                    EquivalenceMode.DATA, depth, Outcome.COUNTEREXAMPLE, data_word, SIDES[side], detail='sampled',
                )
    return EquivalenceVerdict(EquivalenceMode.DATA, depth, Outcome.UNKNOWN, detail='sampled')


def _random_value(rng: random.Random) -> Fraction:
    value = Fraction(rng.randint(-100, 100))
    if rng.random() < 0.25:
        value /= rng.choice((2, 3, 4))
    return value


def _accepted_only_by(automata: Sequence[RegisterAutomaton], side: int, word: Tuple[DataSymbol, ...], theory: Theory) -> bool:
    accepted = [isinstance(run_word(automaton, word, theory), Run) for automaton in automata]
    return accepted[side] and not accepted[1 - side]
