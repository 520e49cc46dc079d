from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import load
from ra_theories.default_theories import LinearRationalTheory
from symbolic_ra.automaton import DataSymbol, Run, RunRejected, run_word
from symbolic_ra.equivalence import EquivalenceMode, Outcome, check_equivalence
from symbolic_ra.guards import eval_guard, marker
from symbolic_ra.symbolic import SymbolicRejection, SymbolicRun, enumerate_symbolic, symbolic_run
from symbolic_ra.syntax import parse_automaton, parse_symbolic_word

THEORY = LinearRationalTheory()

IRRATIONAL = parse_automaton('''
alphabet: a
initial: q0
q0 --a[ p * p = 2 ]--> q1
''')
SILENT = parse_automaton('''
alphabet: a
initial: q0
locations: q0
''')


def test_split_and_blind_differ_on_traces(theory):
    verdict = check_equivalence(load('sign_split'), load('sign_blind'), EquivalenceMode.SYMBOLIC, 1, theory)
    assert verdict.outcome is Outcome.COUNTEREXAMPLE
    assert verdict.accepted_by == 'first'
    assert verdict.counterexample in {parse_symbolic_word('a [v1 <= 0]'), parse_symbolic_word('a [v1 > 0]')}
    assert verdict.exit_status == 1
    assert str(verdict).startswith('counterexample: a [v1')


def test_trace_counterexample_replays(theory):
    first, second = load('sign_split'), load('sign_blind')
    verdict = check_equivalence(first, second, EquivalenceMode.SYMBOLIC, 1, theory)
    assert isinstance(symbolic_run(first, verdict.counterexample, theory), SymbolicRun)
    assert isinstance(symbolic_run(second, verdict.counterexample, theory), SymbolicRejection)


def test_split_and_blind_agree_on_data(theory):
    verdict = check_equivalence(load('sign_split'), load('sign_blind'), EquivalenceMode.DATA, 2, theory)
    assert verdict.outcome is Outcome.EQUAL
    assert verdict.exit_status == 0
    assert str(verdict) == 'equal (data traces up to depth 2)'


@pytest.mark.parametrize('mode', list(EquivalenceMode))
@pytest.mark.parametrize('name', ['monotone_runs', 'proportional_controller'])
def test_automaton_equals_itself(theory, name, mode):
    automaton = load(name)
    assert check_equivalence(automaton, automaton, mode, 3, theory).outcome is Outcome.EQUAL


@pytest.mark.parametrize('mode', list(EquivalenceMode))
def test_routers_agree(theory, mode):
    verdict = check_equivalence(load('sign_router_upper'), load('sign_router_lower'), mode, 4, theory)
    assert verdict.outcome is Outcome.EQUAL


def test_data_counterexample_replays(theory):
    first, second = load('sign_split'), load('monotone_runs')
    verdict = check_equivalence(first, second, EquivalenceMode.DATA, 2, theory)
    assert verdict.outcome is Outcome.COUNTEREXAMPLE
    assert verdict.accepted_by == 'second'
    assert len(verdict.counterexample) == 2
    assert isinstance(run_word(second, verdict.counterexample, theory), Run)
    assert isinstance(run_word(first, verdict.counterexample, theory), RunRejected)


def test_undecided_traces_are_unknown(theory):
    verdict = check_equivalence(IRRATIONAL, SILENT, EquivalenceMode.SYMBOLIC, 1, theory)
    assert verdict.outcome is Outcome.UNKNOWN
    assert verdict.exit_status == 2
    assert 'v1 * v1 = 2' in verdict.detail


def test_undecided_data_falls_back_to_sampling(theory):
    verdict = check_equivalence(IRRATIONAL, SILENT, EquivalenceMode.DATA, 1, theory, sampling_attempts=50)
    assert verdict.outcome is Outcome.UNKNOWN
    assert verdict.detail == 'sampled'


def test_depth_zero_compares_the_empty_word(theory):
    verdict = check_equivalence(load('sign_split'), load('monotone_runs'), EquivalenceMode.SYMBOLIC, 0, theory)
    assert verdict.outcome is Outcome.EQUAL


ROUTER_GRID = tuple(Fraction(value) for value in range(-3, 4))


def concrete_words(automaton, depth):
    """Every data word over the grid whose values satisfy the guard of one of the automaton's symbolic words."""
    for word in enumerate_symbolic(automaton, depth, THEORY).words:
        markers = [marker(index) for index in range(1, len(word) + 1)]
        for values in itertools.product(ROUTER_GRID, repeat=len(word)):
            if eval_guard(word.guard, dict(zip(markers, values)), THEORY):
                yield tuple(DataSymbol(symbol, value) for (symbol, _), value in zip(word, values))


@pytest.mark.parametrize('first, second', [
    ('sign_router_upper', 'sign_router_lower'),
    ('sign_router_lower', 'sign_router_upper'),
])
def test_words_drawn_from_one_router_run_on_the_other(first, second):
    other = load(second)
    sampled = list(concrete_words(load(first), 4))
    assert sampled
    for word in sampled:
        assert isinstance(run_word(other, word, THEORY), Run), word


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.sampled_from(['a', 'b', 'c']), max_size=4),
    st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=2), min_size=4, max_size=4),
)
def test_routers_accept_the_same_data_words(symbols, values):
    word = tuple(DataSymbol(symbol, value) for symbol, value in zip(symbols, values))
    upper = run_word(load('sign_router_upper'), word, THEORY)
    lower = run_word(load('sign_router_lower'), word, THEORY)
    assert isinstance(upper, Run) == isinstance(lower, Run)
