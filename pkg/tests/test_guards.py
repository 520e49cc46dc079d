from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ra_theories.default_theories import LinearRationalTheory
from symbolic_ra.guards import (
    FALSE, PARAMETER, TRUE, And, Atom, GuardError, Not, Or, RelationSymbol, UndefinedVariable, Variable,
    alpha_equal, canonical, conjoin, disjoin, eval_guard, is_satisfiable, marker, negate, rename_guard, variables,
)
from symbolic_ra.syntax import parse_guard
from symbolic_ra.utilities import compose

X, Y, Z = (Variable.register(name) for name in 'xyz')
SOURCES = (X, Y, Z, PARAMETER)
TEMPLATES = (
    RelationSymbol('$1 <= $2', 2),
    RelationSymbol('$1 < $2', 2),
    RelationSymbol('$1 = $2', 2),
    RelationSymbol('$1 + $2 = 0', 2),
    RelationSymbol('$1 > 0', 1),
    RelationSymbol('|$1 - $2| <= 3', 2),
)
THEORY = LinearRationalTheory()


@st.composite
def atoms(draw):
    symbol = draw(st.sampled_from(TEMPLATES))
    return Atom(symbol, tuple(draw(st.sampled_from(SOURCES)) for _ in range(symbol.arity)))


guards = st.recursive(
    st.one_of(st.just(TRUE), atoms()),
    lambda children: st.one_of(
        children.map(Not),
        st.lists(children, min_size=2, max_size=3).map(lambda parts: And(tuple(parts))),
        st.lists(children, min_size=2, max_size=3).map(lambda parts: Or(tuple(parts))),
    ),
    max_leaves=6,
)
renamings = st.permutations([marker(index) for index in range(1, 5)]).map(lambda targets: dict(zip(SOURCES, targets)))
valuations = st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=4), min_size=4, max_size=4).map(
    lambda values: {marker(index): value for index, value in enumerate(values, start=1)}
)


@settings(max_examples=1000, deadline=None)
@given(guards, renamings, valuations)
def test_renaming_commutes_with_evaluation(guard, renaming, valuation):
    renamed = rename_guard(guard, renaming)
    assert eval_guard(renamed, valuation, THEORY) == eval_guard(guard, compose(valuation, renaming), THEORY)


@settings(max_examples=300, deadline=None)
@given(guards)
def test_canonical_is_idempotent(guard):
    once = canonical(guard)
    assert canonical(once) == once
    assert variables(once) <= variables(guard)


@settings(max_examples=200, deadline=None)
@given(guards, valuations, renamings)
def test_canonical_form_evaluates_like_the_original(guard, valuation, renaming):
    values = compose(valuation, renaming)
    assert eval_guard(canonical(guard), values, THEORY) == eval_guard(guard, values, THEORY)


@settings(max_examples=200, deadline=None)
@given(guards)
def test_sat_witnesses_satisfy_the_guard(guard):
    result = is_satisfiable(guard, THEORY)
    if result.is_sat:
        assert eval_guard(guard, result.witness, THEORY)
    if result.is_unsat:
        assert not is_satisfiable(negate(guard), THEORY).is_unsat


def test_witness_covers_variables_dropped_by_canonical_form():
    guard = Not(Not(Or((TRUE, Atom(TEMPLATES[0], (X, X))))))
    assert canonical(guard) == TRUE
    result = is_satisfiable(guard, THEORY)
    assert result.is_sat
    assert X in result.witness
    assert eval_guard(guard, result.witness, THEORY)


ORDER_TEMPLATES = (
    RelationSymbol('$1 < $2', 2),
    RelationSymbol('$1 <= $2', 2),
    RelationSymbol('$1 = $2', 2),
    RelationSymbol('$1 != $2', 2),
    RelationSymbol('$1 > 0', 1),
    RelationSymbol('$1 <= 0', 1),
)
MARKERS = tuple(marker(index) for index in range(1, 4))
# Three values on each side of 0 realize every ordering of three markers against 0
GRID = tuple(Fraction(value) for value in range(-3, 4))


@st.composite
def order_literals(draw):
    symbol = draw(st.sampled_from(ORDER_TEMPLATES))
    atom = Atom(symbol, tuple(draw(st.sampled_from(MARKERS)) for _ in range(symbol.arity)))
    return atom if draw(st.booleans()) else Not(atom)


@settings(max_examples=300, deadline=None)
@given(st.lists(order_literals(), min_size=1, max_size=6))
def test_conjunctions_agree_with_grid_search(literals):
    guard = And(tuple(literals))
    solutions = (
        dict(zip(MARKERS, values)) for values in itertools.product(GRID, repeat=len(MARKERS))
    )
    found = any(eval_guard(guard, valuation, THEORY) for valuation in solutions)
    result = is_satisfiable(guard, THEORY)
    assert not result.is_unknown
    assert result.is_sat == found


def test_canonical_flattens_and_sorts():
    first = parse_guard('x <= p && (y < p && x <= p)')
    second = parse_guard('y < p && x <= p')
    assert first == second
    assert isinstance(first, And)
    assert len(first.children) == 2


def test_constants_absorb():
    atom = parse_guard('x <= p')
    assert conjoin(atom, FALSE) == FALSE
    assert disjoin(atom, TRUE) == TRUE
    assert conjoin(atom, TRUE) == atom
    assert conjoin() == TRUE
    assert disjoin() == FALSE


def test_double_negation_and_de_morgan():
    guard = parse_guard('!(x <= p || !(y < p))')
    assert guard == conjoin(Not(parse_guard('x <= p')), parse_guard('y < p'))
    assert negate(negate(guard)) == guard


def test_alpha_equality_ignores_order_and_duplicates():
    assert alpha_equal(parse_guard('v1 <= v2 && v3 < v2'), parse_guard('v3 < v2 && v1 <= v2 && v1 <= v2'))
    assert not alpha_equal(parse_guard('v1 <= v2'), parse_guard('v2 <= v1'))


def test_rename_needs_every_variable():
    with pytest.raises(UndefinedVariable):
        rename_guard(parse_guard('x <= p'), {PARAMETER: marker(1)})


def test_evaluation_needs_every_variable(theory):
    with pytest.raises(UndefinedVariable):
        eval_guard(parse_guard('x <= p'), {PARAMETER: Fraction(1)}, theory)


def test_atom_arity_is_checked():
    with pytest.raises(GuardError):
        Atom(RelationSymbol('$1 <= $2', 2), (X,))


@pytest.mark.parametrize('text', ['p', 'v12', 'true', '2x'])
def test_reserved_register_names(text):
    with pytest.raises(GuardError):
        Variable.register(text)


@pytest.mark.parametrize('text, expected', [
    ('v1 < v2 && v2 < v1', 'unsat'),
    ('v1 <= v2 && v2 <= v1', 'sat'),
    ('v1 > 0 || v1 <= 0', 'sat'),
    ('!(v1 > 0 || v1 <= 0)', 'unsat'),
    ('|v1| <= 30 && v1 = 31', 'unsat'),
    ('|v1| <= 30 && v1 = -30', 'sat'),
    ('v1 + v2 = 0 && v1 < 0 && v2 < 0', 'unsat'),
    ('v1 != v2 && v1 = v2', 'unsat'),
    ('v1 != v2', 'sat'),
    ('v1 * v2 > 0 && v1 * v2 < 0', 'unsat'),
    ('v1 = v2 * v3 && v1 > 5', 'sat'),
    ('v1 = v2 * v3 && v1 = 7', 'unknown'),
])
def test_linear_theory_verdicts(theory, text, expected):
    guard = parse_guard(text)
    result = is_satisfiable(guard, theory)
    assert result.verdict.value == expected
    if result.is_sat:
        assert eval_guard(guard, result.witness, theory)


def test_answers_are_cached(theory):
    guard = parse_guard('v1 < v2')
    assert theory.check(guard) is theory.check(guard)


def test_unknown_relation_is_rejected(theory):
    guard = parse_guard('lt(v1, v2)')
    with pytest.raises(GuardError):
        theory.validate_guard(guard)
