from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import BUNDLED, load
from ra_theories.default_theories import LinearRationalTheory
from symbolic_ra.automaton import DataSymbol, NondeterminismError, Run, run_word
from symbolic_ra.guards import PARAMETER, VariableKind, alpha_equal, eval_guard, is_satisfiable, marker, variables
from symbolic_ra.symbolic import (
    EMPTY_WORD, SymbolicRejection, SymbolicRun, WitnessRejected, abstract_run, concretize, enumerate_symbolic,
    extend_run, is_feasible, strace, symbolic_run,
)
from symbolic_ra.syntax import parse_data_word, parse_guard, parse_symbolic_word
from symbolic_ra.theory import Verdict

THEORY = LinearRationalTheory()
MONOTONE_WORD = 'a [true] ; a [v1 <= v2] ; a [v3 < v2] ; a [v3 <= v4]'


def test_monotone_symbolic_replay(monotone_runs, theory):
    run = symbolic_run(monotone_runs, parse_symbolic_word(MONOTONE_WORD), theory)
    assert isinstance(run, SymbolicRun)
    assert run.locations == ('q0', 'q1', 'q1', 'q2', 'q1')
    assert run.is_certain
    assert str(strace(run)) == MONOTONE_WORD

    valuation = {marker(i): Fraction(value) for i, value in enumerate((1, 4, 0, 7), start=1)}
    assert eval_guard(run.word.guard, valuation, theory)
    concrete = concretize(run, valuation, theory)
    assert concrete == run_word(monotone_runs, parse_data_word('a(1) a(4) a(0) a(7)'), theory)


def test_markings_follow_the_registers(monotone_runs, theory):
    run = symbolic_run(monotone_runs, parse_symbolic_word(MONOTONE_WORD), theory)
    x = monotone_runs.registers[0]
    assert [run.marking(i) for i in range(5)] == [{}, {x: marker(1)}, {x: marker(2)}, {x: marker(3)}, {x: marker(4)}]
    assert run.binding(3) == {x: marker(2), PARAMETER: marker(3)}


def test_controller_strace(controller, theory):
    word = parse_data_word('sp(20) gain(0,5) sens(10) cntr(5)')
    concrete = run_word(controller, word, theory)
    symbolic, valuation = abstract_run(concrete)
    assert alpha_equal(symbolic.word.steps[3][1], parse_guard('|v4| <= 30 && v4 = v2 * (v1 - v3)'))
    assert eval_guard(symbolic.word.guard, valuation, theory)


def test_guard_without_transition_is_rejected(monotone_runs, theory):
    result = symbolic_run(monotone_runs, parse_symbolic_word('a [true] ; a [v2 <= v1]'), theory)
    assert isinstance(result, SymbolicRejection)
    assert result.reason == 'no-transition'
    assert result.position == 2
    assert result.run.locations == ('q0', 'q1')


def test_unsatisfiable_traces_are_rejected(theory):
    automaton = load('sign_router_upper')
    result = symbolic_run(automaton, parse_symbolic_word('a [v1 > 0] ; a [v1 = 0]'), theory)
    assert isinstance(result, SymbolicRejection)
    assert result.reason == 'unsatisfiable'
    assert result.position == 2


def test_witness_must_satisfy_the_guard(monotone_runs, theory):
    run = symbolic_run(monotone_runs, parse_symbolic_word('a [true] ; a [v1 <= v2]'), theory)
    with pytest.raises(WitnessRejected):
        concretize(run, {marker(1): Fraction(5), marker(2): Fraction(1)}, theory)
    with pytest.raises(WitnessRejected):
        concretize(run, {marker(1): Fraction(5)}, theory)


def test_enumeration_of_sign_split(theory):
    enumeration = enumerate_symbolic(load('sign_split'), 3, theory)
    assert [str(word) for word in enumeration.words] == ['ε', 'a [v1 <= 0]', 'a [v1 > 0]']
    assert not enumeration.undetermined


def test_enumeration_drops_unsatisfiable_branches(theory):
    enumeration = enumerate_symbolic(load('sign_router_upper'), 2, theory)
    words = {str(word) for word in enumeration.words}
    assert 'a [v1 = 0] ; a [v1 = 0]' in words
    assert 'a [v1 > 0] ; a [v1 > 0]' in words
    assert 'a [v1 > 0] ; a [v1 = 0]' not in words
    assert 'a [v1 < 0] ; c [v1 + v2 = 0]' in words


def test_enumeration_rejects_nondeterminism(theory):
    with pytest.raises(NondeterminismError):
        enumerate_symbolic(load('duplicate_guard'), 1, theory)


def test_enumeration_collects_ill_formed_steps(theory):
    enumeration = enumerate_symbolic(load('monotone_runs_ill_formed'), 2, theory)
    assert enumeration.words == [EMPTY_WORD]
    assert len(enumeration.ill_formed) == 1


def test_feasibility(theory):
    assert is_feasible(parse_symbolic_word('a [true] ; a [v1 <= v2]'), theory) is True
    assert is_feasible(parse_symbolic_word('a [v1 > 0] ; a [v1 < 0]'), theory) is False
    assert is_feasible(parse_symbolic_word('a [v2 > 0]'), theory) is False
    assert is_feasible(parse_symbolic_word('a [true] ; a [v1 = v2 * v2] ; a [v1 = 7 && v3 = v1]'), theory) is None


@pytest.mark.parametrize('name', BUNDLED)
def test_enumerated_runs_are_consistent(name):
    automaton = load(name)
    enumeration = enumerate_symbolic(automaton, 4, THEORY)
    words = set(enumeration.words)
    assert EMPTY_WORD in words
    assert len(words) == len(enumeration.runs)
    for run in enumeration.runs:
        word = strace(run)
        # prefix closed
        assert not word or word.parent in words
        # markers stay injective and below the current position
        for position in range(len(run) + 1):
            marking = run.marking(position)
            assert len(set(marking.values())) == len(marking)
            assert all(value.kind is VariableKind.MARKER and value.index <= position for value in marking.values())
            assert set(marking) <= set(automaton.registers)
        for position, (_, guard) in enumerate(word, start=1):
            assert all(variable.index <= position for variable in variables(guard))
        assert symbolic_run(automaton, word, THEORY) == run
        assert is_satisfiable(word.guard, THEORY).is_sat
        valuation = {marker(i): run.witness.get(marker(i), Fraction(0)) for i in range(1, len(run) + 1)}
        concrete = concretize(run, valuation, THEORY)
        assert run_word(automaton, concrete.word, THEORY) == concrete
        assert abstract_run(concrete)[0] == run


@st.composite
def accepted_monotone_words(draw):
    """Values that never drop twice in a row, so monotone_runs accepts every drawn word."""
    value = draw(st.integers(min_value=-5, max_value=5))
    values = [value]
    dropped = False
    for step in draw(st.lists(st.integers(min_value=-4, max_value=4), min_size=1, max_size=6)):
        if dropped:
            step = abs(step)
        value += step
        values.append(value)
        dropped = step < 0
    return tuple(DataSymbol('a', Fraction(value)) for value in values)


@settings(max_examples=500, deadline=None)
@given(accepted_monotone_words())
def test_concrete_and_symbolic_runs_correspond(word):
    automaton = load('monotone_runs')
    concrete = run_word(automaton, word, THEORY)
    assert isinstance(concrete, Run)
    assert len(concrete) == len(word) >= 2
    symbolic, valuation = abstract_run(concrete)
    assert eval_guard(symbolic.word.guard, valuation, THEORY)
    replayed = symbolic_run(automaton, strace(symbolic), THEORY)
    assert replayed == symbolic
    assert replayed.verdict is Verdict.SAT
    assert concretize(replayed, valuation, THEORY) == concrete


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(min_value=-5, max_value=5), max_size=3), st.integers(1, 3), st.integers(1, 3))
def test_two_drops_in_a_row_are_rejected(prefix, first, second):
    values = [*prefix, 10, 10 - first, 10 - first - second]
    automaton = load('monotone_runs')
    word = tuple(DataSymbol('a', Fraction(value)) for value in values)
    assert not isinstance(run_word(automaton, word, THEORY), Run)


# Every ordering of up to three markers is realized by integers in -2..2
INTEGER_GRID = tuple(Fraction(value) for value in range(-2, 3))


def test_enumerated_guards_have_integer_solutions(monotone_runs):
    for word in enumerate_symbolic(monotone_runs, 3, THEORY).words:
        markers = [marker(index) for index in range(1, len(word) + 1)]
        solutions = (dict(zip(markers, values)) for values in itertools.product(INTEGER_GRID, repeat=len(markers)))
        assert any(eval_guard(word.guard, valuation, THEORY) for valuation in solutions), word
        assert is_satisfiable(word.guard, THEORY).is_sat


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(['a', 'b', 'c']), max_size=4), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_router_runs_correspond(symbols, values):
    automaton = load('sign_router_lower')
    word = tuple(DataSymbol(symbol, Fraction(value)) for symbol, value in zip(symbols, values))
    concrete = run_word(automaton, word, THEORY)
    if not isinstance(concrete, Run):
        return
    symbolic, valuation = abstract_run(concrete)
    assert symbolic_run(automaton, strace(symbolic), THEORY) == symbolic
    assert concretize(symbolic, valuation, THEORY) == concrete


def test_extend_run_needs_matching_source(monotone_runs):
    run = SymbolicRun.initial('q0')
    extended = extend_run(run, monotone_runs.transitions[0])
    assert extended.final_location == 'q1'
    assert extended.word == parse_symbolic_word('a [true]')
