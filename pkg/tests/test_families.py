from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from ra_theories.default_theories import LinearRationalTheory
from symbolic_ra.automaton import DataSymbol, Run, check_well_formed_syntactic, run_word, validate
from symbolic_ra.families import pairwise_equality_automaton

THEORY = LinearRationalTheory()


def expected(values, n):
    return all((values[i] == values[i + 1]) == (values[n + i] == values[n + i + 1]) for i in range(n - 1))


@pytest.mark.parametrize('n', [1, 2, 3, 4])
def test_matches_brute_force(n):
    automaton = pairwise_equality_automaton(n)
    for values in itertools.product(range(3), repeat=2 * n):
        word = tuple(DataSymbol('a', Fraction(value)) for value in values) + (DataSymbol('b', Fraction(0)),)
        accepted = isinstance(run_word(automaton, word, THEORY), Run)
        assert accepted == expected(values, n), values


@pytest.mark.parametrize('n', [1, 2, 3])
def test_shape(n):
    automaton = pairwise_equality_automaton(n)
    assert len(automaton.registers) == 2 * n
    assert len(automaton.locations) == 2 * n + 2
    assert len(automaton.transitions) == 2 * n + 1
    assert validate(automaton, THEORY).ok
    assert check_well_formed_syntactic(automaton).well_formed


def test_words_of_the_wrong_length_are_rejected():
    automaton = pairwise_equality_automaton(2)
    short = (DataSymbol('a', Fraction(1)), DataSymbol('b', Fraction(0)))
    assert not isinstance(run_word(automaton, short, THEORY), Run)


def test_family_starts_at_one():
    with pytest.raises(ValueError):
        pairwise_equality_automaton(0)
