"""
Location, transition and register equivalences over a finite sample of a symbolic language.

A presentation assigns every sample word a location class, every nonempty sample word a transition
class and some (word, marker) pairs a register class. A word stores marker v_i exactly when
(word, i) has a register class. check_conditions verifies the regularity conditions on the sample,
synthesize builds a register automaton from a presentation that passes them, and
extract_relations reads a presentation off an automaton.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import IntEnum
from typing import TYPE_CHECKING, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from loguru import logger

from symbolic_ra.automaton import AutomatonError, RegisterAutomaton, Transition
from symbolic_ra.guards import (
    PARAMETER, Guard, GuardError, Renaming, Variable, VariableKind, alpha_equal, conjoin, is_satisfiable, marker,
    rename_guard, render_guard, variables,
)
from symbolic_ra.symbolic import EMPTY_WORD, SymbolicWord, enumerate_symbolic, sorted_words
from symbolic_ra.utilities import first_appearance_ids

if TYPE_CHECKING:
    from symbolic_ra.theory import Theory

WordMarker = Tuple[SymbolicWord, int]


class PresentationIllFormed(ValueError):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


class SynthesisIllFormed(ValueError):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


class Condition(IntEnum):
    REGISTER_UNIQUENESS = 1
    SOURCE_LOCATION = 2
    INPUT_SYMBOL = 3
    GUARD_RENAMING = 4
    TARGET_LOCATION = 5
    FRESH_VALUE_STORED = 6
    FORWARD_PROPAGATION = 7
    BACKWARD_PROPAGATION = 8
    GUARD_VARIABLES_STORED = 9
    RIGHT_INVARIANCE = 10
    DETERMINISM = 11

    @property
    def title(self) -> str:
        return self.name.replace('_', ' ').lower()


@dataclass(frozen=True)
class LanguageSample:
    """A prefix-closed set of symbolic words of length at most depth, kept in sorted order."""
    depth: int
    words: Tuple[SymbolicWord, ...]
    _index: Dict[SymbolicWord, int] = field(init=False, repr=False, compare=False)
    _children: Dict[SymbolicWord, Tuple[SymbolicWord, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(sorted_words(self.words))
        object.__setattr__(self, 'words', words)
        if self.depth < 0:
            raise PresentationIllFormed(f'The sample depth must not be negative, got {self.depth}.')
        members = set(words)
        if EMPTY_WORD not in members:
            raise PresentationIllFormed('The sample does not contain the empty word.')
        children: Dict[SymbolicWord, List[SymbolicWord]] = {word: [] for word in words}
        for word in words:
            if len(word) > self.depth:
                raise PresentationIllFormed(f'"{word}" is longer than the sample depth {self.depth}.')
            for position, (_, guard) in enumerate(word, start=1):
                for variable in variables(guard):
                    if variable.kind is not VariableKind.MARKER or variable.index > position:
                        raise PresentationIllFormed(f'"{word}" reads {variable} at position {position}.')
            if word:
                if word.parent not in members:
                    raise PresentationIllFormed(f'The sample has "{word}" but not its prefix "{word.parent}".')
                children[word.parent].append(word)
        object.__setattr__(self, '_index', {word: position for position, word in enumerate(words)})
        object.__setattr__(self, '_children', {word: tuple(value) for word, value in children.items()})

    def __contains__(self, word: SymbolicWord) -> bool:
        return word in self._index

    def __len__(self) -> int:
        return len(self.words)

    def index(self, word: SymbolicWord) -> int:
        return self._index[word]

    def extensions(self, word: SymbolicWord) -> Tuple[SymbolicWord, ...]:
        return self._children.get(word, ())

    @property
    def nonempty(self) -> Tuple[SymbolicWord, ...]:
        return self.words[1:]


@dataclass(frozen=True)
class RelationPresentation:
    locations: Mapping[SymbolicWord, str]
    transitions: Mapping[SymbolicWord, str]
    registers: Mapping[WordMarker, str]
    _stored: Dict[SymbolicWord, Dict[int, str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        stored: Dict[SymbolicWord, Dict[int, str]] = {}
        for (word, index), register_class in sorted(self.registers.items(), key=lambda item: (item[0][0].sort_key, item[0][1])):
            stored.setdefault(word, {})[index] = register_class
        object.__setattr__(self, '_stored', stored)
        for word, markers in stored.items():
            classes = list(markers.values())
            if len(set(classes)) != len(classes):
                logger.warning(f'"{word}" stores two markers in one register class')

    def validate(self, sample: LanguageSample) -> None:
        """Checks that the class maps are total where they must be and only mention sample words."""
        members = set(sample.words)
        if set(self.locations) != members:
            missing = sorted_words(members - set(self.locations))
            extra = sorted_words(set(self.locations) - members)
            raise PresentationIllFormed(
                f'The location classes must cover exactly the sample. '
                f'Missing: {", ".join(map(str, missing)) or "none"}. Not in the sample: {", ".join(map(str, extra)) or "none"}.'
            )
        if set(self.transitions) != members - {EMPTY_WORD}:
            raise PresentationIllFormed('The transition classes must cover exactly the nonempty sample words.')
        for word, index in self.registers:
            if word not in members:
                raise PresentationIllFormed(f'A register class mentions "{word}", which is not in the sample.')
            if not 1 <= index <= len(word):
                raise PresentationIllFormed(f'"{word}" has no marker v{index}.')

    def stored(self, word: SymbolicWord) -> Dict[int, str]:
        return self._stored.get(word, {})

    def stores(self, word: SymbolicWord, index: int) -> bool:
        return index in self.stored(word)

    def markers_in_class(self, word: SymbolicWord, register_class: str) -> List[int]:
        return [index for index, value in self.stored(word).items() if value == register_class]

    @property
    def location_classes(self) -> List[str]:
        return list(dict.fromkeys(self.locations.values()))

    @property
    def transition_classes(self) -> List[str]:
        return list(dict.fromkeys(self.transitions.values()))

    @property
    def register_classes(self) -> List[str]:
        return list(dict.fromkeys(self.registers.values()))

    def merged_locations(self, word: SymbolicWord, other: SymbolicWord) -> RelationPresentation:
        keep, drop = self.locations[word], self.locations[other]
        locations = {key: keep if value == drop else value for key, value in self.locations.items()}
        return RelationPresentation(locations, dict(self.transitions), dict(self.registers))

    def merged_transitions(self, word: SymbolicWord, other: SymbolicWord) -> RelationPresentation:
        keep, drop = self.transitions[word], self.transitions[other]
        transitions = {key: keep if value == drop else value for key, value in self.transitions.items()}
        return RelationPresentation(dict(self.locations), transitions, dict(self.registers))


def matching(word: SymbolicWord, other: SymbolicWord, presentation: RelationPresentation) -> Renaming:
    """
    Maps each stored marker of word to the marker of other in the same register class,
    and the next fresh marker of word to the next fresh marker of other.
    """
    renaming: Renaming = {}
    for index, register_class in presentation.stored(word).items():
        partners = presentation.markers_in_class(other, register_class)
        if len(partners) > 1:
            raise PresentationIllFormed(
                f'"{other}" stores {", ".join(f"v{i}" for i in partners)} in the register class {register_class}.'
            )
        if partners:
            renaming[marker(index)] = marker(partners[0])
    renaming[marker(len(word) + 1)] = marker(len(other) + 1)
    if len(set(renaming.values())) != len(renaming):
        raise PresentationIllFormed(f'The matching of "{word}" with "{other}" is not injective.')
    return renaming


@dataclass(frozen=True)
class Violation:
    condition: Condition
    words: Tuple[SymbolicWord, ...]
    markers: Tuple[Variable, ...] = ()
    witness: Optional[SymbolicWord] = None
    detail: str = ''

    def __str__(self) -> str:
        text = f'Condition {int(self.condition)} ({self.condition.title}): ' + ' | '.join(f'"{word}"' for word in self.words)
        if self.markers:
            text += f' markers {", ".join(map(str, self.markers))}'
        if self.witness is not None:
            text += f' witness "{self.witness}"'
        if self.detail:
            text += f' ({self.detail})'
        return text


@dataclass
class ConditionReport:
    violations: List[Violation] = field(default_factory=list)
    boundary_skips: int = 0
    unknowns: int = 0
    infeasible: List[SymbolicWord] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.infeasible

    def of(self, condition: Condition) -> List[Violation]:
        return [violation for violation in self.violations if violation.condition is condition]

    def to_yaml_dict(self) -> dict:
        return {
            'violations': len(self.violations),
            'per_condition': {int(condition): len(self.of(condition)) for condition in Condition},
            'boundary_skips': self.boundary_skips,
            'unknowns': self.unknowns,
            'infeasible': [str(word) for word in self.infeasible],
            'details': [str(violation) for violation in self.violations],
        }


class _Checker:
    """Instantiates each condition over the words, pairs and markers of the sample."""

    def __init__(self, sample: LanguageSample, presentation: RelationPresentation, theory: Theory):
        self.sample = sample
        self.presentation = presentation
        self.theory = theory
        self.report = ConditionReport()
        self.transition_groups = self._group(presentation.transitions, sample.nonempty)
        self.location_groups = self._group(presentation.locations, sample.words)

    @staticmethod
    def _group(classes: Mapping[SymbolicWord, str], words: Iterable[SymbolicWord]) -> List[List[SymbolicWord]]:
        groups: Dict[str, List[SymbolicWord]] = {}
        for word in words:
            groups.setdefault(classes[word], []).append(word)
        return list(groups.values())

    def violation(self, condition: Condition, *words: SymbolicWord, **details) -> None:
        violation = Violation(condition, words, **details)
        logger.debug(violation)
        self.report.violations.append(violation)

    def run(self) -> ConditionReport:
        self.check_feasibility()
        self.check_register_uniqueness()
        for group in self.transition_groups:
            representative = group[0]
            for other in group[1:]:
                self.check_source_location(representative, other)
                self.check_input_symbol(representative, other)
                self.check_target_location(representative, other)
            for first, second in itertools.permutations(group, 2):
                if first.last[0] != second.last[0]:
                    continue
                self.check_guard_renaming(first, second)
                self.check_fresh_value_stored(first, second)
                self.check_forward_propagation(first, second)
                self.check_backward_propagation(first, second)
        for group in self.location_groups:
            self.check_guard_variables_stored(group)
            self.check_right_invariance(group)
            self.check_determinism(group)
        return self.report

    def check_feasibility(self) -> None:
        for word in self.sample.nonempty:
            result = is_satisfiable(word.guard, self.theory)
            if result.is_unsat:
                self.report.infeasible.append(word)
            elif result.is_unknown:
                self.report.unknowns += 1

    def check_register_uniqueness(self) -> None:
        for word in self.sample.words:
            seen: Dict[str, int] = {}
            for index, register_class in self.presentation.stored(word).items():
                if register_class in seen:
                    self.violation(Condition.REGISTER_UNIQUENESS, word, markers=(marker(seen[register_class]), marker(index)))
                seen[register_class] = index

    def check_source_location(self, first: SymbolicWord, second: SymbolicWord) -> None:
        if self.presentation.locations[first.parent] != self.presentation.locations[second.parent]:
            self.violation(Condition.SOURCE_LOCATION, first, second)

    def check_input_symbol(self, first: SymbolicWord, second: SymbolicWord) -> None:
        if first.last[0] != second.last[0]:
            self.violation(Condition.INPUT_SYMBOL, first, second)

    def check_target_location(self, first: SymbolicWord, second: SymbolicWord) -> None:
        if self.presentation.locations[first] != self.presentation.locations[second]:
            self.violation(Condition.TARGET_LOCATION, first, second)

    def renamed_guard(self, word: SymbolicWord, other: SymbolicWord, guard: Guard) -> Optional[Tuple[Guard, Renaming]]:
        """The guard renamed by matching(word, other), or None when it reads a marker the matching leaves out."""
        try:
            renaming = matching(word, other, self.presentation)
        except PresentationIllFormed as e:
            # check_register_uniqueness has already reported the shared class
            logger.debug(e)
            return None
        if not variables(guard) <= renaming.keys():
            return None
        return rename_guard(guard, renaming), renaming

    def check_guard_renaming(self, first: SymbolicWord, second: SymbolicWord) -> None:
        renamed = self.renamed_guard(first.parent, second.parent, first.last[1])
        if renamed is None:
            return
        guard, _ = renamed
        if not alpha_equal(guard, second.last[1]):
            self.violation(
                Condition.GUARD_RENAMING, first, second,
                detail=f'renamed guard "{render_guard(guard)}" differs from "{render_guard(second.last[1])}"',
            )

    def check_fresh_value_stored(self, first: SymbolicWord, second: SymbolicWord) -> None:
        stored = self.presentation.stored(first)
        if len(first) not in stored:
            return
        if self.presentation.stored(second).get(len(second)) != stored[len(first)]:
            self.violation(Condition.FRESH_VALUE_STORED, first, second, markers=(marker(len(first)), marker(len(second))))

    def check_forward_propagation(self, first: SymbolicWord, second: SymbolicWord) -> None:
        before = self.presentation.stored(first.parent)
        before_other = self.presentation.stored(second.parent)
        after = self.presentation.stored(first)
        after_other = self.presentation.stored(second)
        for index, register_class in before.items():
            if index not in after:
                continue
            for partner in (i for i, value in before_other.items() if value == register_class):
                if after_other.get(partner) != after[index]:
                    self.violation(Condition.FORWARD_PROPAGATION, first, second, markers=(marker(index), marker(partner)))

    def check_backward_propagation(self, first: SymbolicWord, second: SymbolicWord) -> None:
        after = self.presentation.stored(first)
        after_other = self.presentation.stored(second)
        before = self.presentation.stored(first.parent)
        before_other = self.presentation.stored(second.parent)
        for index, register_class in after.items():
            if index == len(first):
                continue
            for partner in (i for i, value in after_other.items() if value == register_class):
                if index not in before or before_other.get(partner) != before[index]:
                    self.violation(Condition.BACKWARD_PROPAGATION, first, second, markers=(marker(index), marker(partner)))

    def check_guard_variables_stored(self, group: Sequence[SymbolicWord]) -> None:
        for word in group:
            stored = self.presentation.stored(word)
            for extension in self.sample.extensions(word):
                fresh = marker(len(word) + 1)
                for variable in sorted(variables(extension.last[1]) - {fresh}):
                    register_class = stored.get(variable.index)
                    if register_class is None:
                        self.violation(Condition.GUARD_VARIABLES_STORED, word, extension, markers=(variable,))
                        continue
                    for other in group:
                        if other != word and register_class not in self.presentation.stored(other).values():
                            self.violation(Condition.GUARD_VARIABLES_STORED, word, other, markers=(variable,))

    def check_right_invariance(self, group: Sequence[SymbolicWord]) -> None:
        for word, other in itertools.permutations(group, 2):
            for extension in self.sample.extensions(word):
                symbol, guard = extension.last
                renamed = self.renamed_guard(word, other, guard)
                if renamed is None:
                    continue
                candidate = other.extend(symbol, renamed[0])
                if candidate in self.sample:
                    continue
                if len(candidate) > self.sample.depth:
                    self.report.boundary_skips += 1
                    continue
                result = is_satisfiable(conjoin(other.guard, renamed[0]), self.theory)
                if result.is_sat:
                    self.violation(Condition.RIGHT_INVARIANCE, word, other, witness=candidate)
                elif result.is_unknown:
                    self.report.unknowns += 1

    def check_determinism(self, group: Sequence[SymbolicWord]) -> None:
        extensions = [extension for word in group for extension in self.sample.extensions(word)]
        reported = set()
        for first, second in itertools.permutations(extensions, 2):
            if frozenset((first, second)) in reported:
                continue
            if first.last[0] != second.last[0]:
                continue
            if self.presentation.transitions[first] == self.presentation.transitions[second]:
                continue
            renamed = self.renamed_guard(first.parent, second.parent, first.last[1])
            if renamed is None:
                continue
            result = is_satisfiable(conjoin(renamed[0], second.last[1]), self.theory)
            if result.is_sat:
                reported.add(frozenset((first, second)))
                self.violation(Condition.DETERMINISM, first, second)
            elif result.is_unknown:
                self.report.unknowns += 1


def check_conditions(sample: LanguageSample, presentation: RelationPresentation, theory: Theory) -> ConditionReport:
    presentation.validate(sample)
    report = _Checker(sample, presentation, theory).run()
    logger.info(
        f'Checked {len(sample)} words: {len(report.violations)} violations, '
        f'{report.boundary_skips} boundary skips, {report.unknowns} unknown'
    )
    return report


@dataclass
class DeterminismReport:
    violations: List[Tuple[SymbolicWord, SymbolicWord]] = field(default_factory=list)
    unknowns: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def check_derived_determinism(sample: LanguageSample, presentation: RelationPresentation, theory: Theory) -> DeterminismReport:
    """
    Extensions of location-equivalent words by the same symbol whose guards agree under the matching
    must be transition equivalent, given the guard is satisfiable.
    """
    report = DeterminismReport()
    locations: Dict[str, List[SymbolicWord]] = {}
    for word in sample.words:
        locations.setdefault(presentation.locations[word], []).append(word)
    for group in locations.values():
        for word, other in itertools.product(group, repeat=2):
            for first in sample.extensions(word):
                for second in sample.extensions(other):
                    if first == second or first.last[0] != second.last[0]:
                        continue
                    if presentation.transitions[first] == presentation.transitions[second]:
                        continue
                    try:
                        renaming = matching(word, other, presentation)
                    except PresentationIllFormed as e:
                        logger.debug(e)
                        continue
                    if not variables(first.last[1]) <= renaming.keys():
                        continue
                    if not alpha_equal(rename_guard(first.last[1], renaming), second.last[1]):
                        continue
                    result = is_satisfiable(second.guard, theory)
                    if result.is_sat:
                        report.violations.append((first, second))
                    elif result.is_unknown:
                        report.unknowns += 1
    return report


def synthesize(sample: LanguageSample, presentation: RelationPresentation, theory: Theory,
               alphabet: Optional[Sequence[str]] = None) -> RegisterAutomaton:
    """
    Builds the automaton whose locations are the location classes, whose registers are the register
    classes and whose transitions are the transition classes. Names follow the sorted sample order:
    q0 is the class of the empty word, registers are r0, r1, ... by first appearance.
    """
    presentation.validate(sample)
    location_ids = first_appearance_ids(presentation.locations[word] for word in sample.words)
    location_names = {cls: f'q{number}' for cls, number in location_ids.items()}
    register_ids = first_appearance_ids(
        presentation.stored(word)[index] for word in sample.words for index in sorted(presentation.stored(word))
    )
    register_names = {cls: Variable.register(f'r{number}') for cls, number in register_ids.items()}

    members: Dict[str, List[SymbolicWord]] = {}
    for word in sample.nonempty:
        members.setdefault(presentation.transitions[word], []).append(word)

    transitions = []
    for transition_class, group in members.items():
        built = [_transition_for(word, presentation, location_names, register_names) for word in group]
        for word, transition in zip(group[1:], built[1:]):
            if transition != built[0]:
                raise SynthesisIllFormed(
                    f'The transition class {transition_class} gives "{built[0]}" for "{group[0]}" '
                    f'but "{transition}" for "{word}".'
                )
        transitions.append(built[0])

    if alphabet is None:
        alphabet = sorted({symbol for word in sample.words for symbol in word.symbols})
    automaton = RegisterAutomaton(
        tuple(alphabet), tuple(location_names.values()), location_names[presentation.locations[EMPTY_WORD]],
        tuple(register_names.values()), tuple(transitions),
    )
    for transition in automaton.transitions:
        theory.validate_guard(transition.guard)
    logger.info(
        f'Synthesized {len(automaton.locations)} locations, {len(automaton.transitions)} transitions '
        f'and {len(automaton.registers)} registers'
    )
    return automaton


def _transition_for(word: SymbolicWord, presentation: RelationPresentation, location_names: Dict[str, str],
                    register_names: Dict[str, Variable]) -> Transition:
    parent = word.parent
    symbol, guard = word.last
    fresh = len(parent) + 1
    before = presentation.stored(parent)

    renaming: Renaming = {marker(index): register_names[cls] for index, cls in before.items()}
    renaming[marker(fresh)] = PARAMETER
    if len(set(renaming.values())) != len(renaming):
        raise SynthesisIllFormed(f'"{parent}" stores two markers in one register.')
    try:
        renamed = rename_guard(guard, renaming)
    except GuardError as e:
        raise SynthesisIllFormed(f'The guard of "{word}" reads a marker that "{parent}" does not store. {e}') from e

    assignment = {}
    for index, cls in presentation.stored(word).items():
        if index == fresh:
            source = PARAMETER
        elif index in before:
            source = register_names[before[index]]
        else:
            raise SynthesisIllFormed(f'"{word}" stores v{index}, which "{parent}" does not store.')
        register = register_names[cls]
        if register in assignment:
            raise SynthesisIllFormed(f'"{word}" stores two markers in {register}.')
        assignment[register] = source

    try:
        return Transition(
            location_names[presentation.locations[parent]], symbol, renamed, assignment,
            location_names[presentation.locations[word]],
        )
    except AutomatonError as e:
        raise SynthesisIllFormed(f'The transition for "{word}" is not valid: {e}') from e


@dataclass(frozen=True)
class Extraction:
    sample: LanguageSample
    presentation: RelationPresentation
    undetermined: Tuple[SymbolicWord, ...] = ()


def extract_relations(automaton: RegisterAutomaton, depth: int, theory: Theory) -> Extraction:
    """
    Reads the three equivalences off the symbolic runs up to depth: words are location equivalent when
    their runs end in the same location, transition equivalent when they end with the same transition,
    and markers are register equivalent when they sit in the same register.
    """
    enumeration = enumerate_symbolic(automaton, depth, theory)
    locations, transitions, registers = {}, {}, {}
    for run in enumeration.runs:
        locations[run.word] = run.final_location
        if run.transitions:
            transitions[run.word] = f't{automaton.index(run.transitions[-1])}'
        for register, value in run.final_marking.items():
            registers[(run.word, value.index)] = register.name
    sample = LanguageSample(depth, tuple(run.word for run in enumeration.runs))
    presentation = RelationPresentation(locations, transitions, registers)
    return Extraction(sample, presentation, tuple(enumeration.undetermined_words))
