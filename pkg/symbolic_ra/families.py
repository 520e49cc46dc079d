from __future__ import annotations

from symbolic_ra.automaton import RegisterAutomaton, Transition
from symbolic_ra.guards import PARAMETER, TRUE, Atom, Guard, Not, RelationSymbol, Variable, conjoin, disjoin

EQUALS = RelationSymbol('$1 = $2', 2)


def _equal(first: Variable, second: Variable) -> Guard:
    return Atom(EQUALS, (first, second))


def pairwise_equality_automaton(n: int) -> RegisterAutomaton:
    """
    Reads 2n values with a, storing each one, then accepts b when consecutive values of the first half
    are equal exactly where consecutive values of the second half are.
    """
    if n < 1:
        raise ValueError(f'The family starts at n = 1, got {n}.')
    registers = [Variable.register(f'x{index}') for index in range(1, 2 * n + 1)]
    locations = [f'q{index}' for index in range(2 * n + 1)] + ['q_ok']
    transitions = []
    for index, register in enumerate(registers):
        assignment = {kept: kept for kept in registers[:index]}
        assignment[register] = PARAMETER
        transitions.append(Transition(locations[index], 'a', TRUE, assignment, locations[index + 1]))

    clauses = []
    for i in range(n - 1):
        first = _equal(registers[i], registers[i + 1])
        second = _equal(registers[n + i], registers[n + i + 1])
        clauses.append(disjoin(conjoin(first, second), conjoin(Not(first), Not(second))))
    guard = conjoin(*clauses) if clauses else TRUE
    transitions.append(Transition(locations[2 * n], 'b', guard, {}, 'q_ok'))
    return RegisterAutomaton(('a', 'b'), tuple(locations), 'q0', tuple(registers), tuple(transitions))
