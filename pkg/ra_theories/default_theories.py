from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Set, Tuple

from loguru import logger

from symbolic_ra.expressions import (
    Comparison, ExpressionSyntaxError, Polynomial, comparison_slots, expand, holds, parse_template, split_absolute,
)
from symbolic_ra.fourier_motzkin import EQUAL, LESS, LESS_EQUAL, LinearConstraint, solve
from symbolic_ra.guards import (
    Atom, Guard, GuardError, RelationSymbol, Valuation, Variable, disjunctive_normal_form, literal_guard, variables,
)
from symbolic_ra.smtlib import ExternalSolver, SolverError
from symbolic_ra.theory import SatResult, SolverCapability, Theory

"""
This file contains the data theories that ship with symbolic-ra. A theory is a subclass of
symbolic_ra.theory.Theory with a 'name'. Every such class in this module is registered under its name
and can be selected with the 'theory' option in config.yml or with --theory on the command line.

You can write your own theories! Put them in a file called "custom_theories.py" next to this package
and they are registered the same way, so your theories survive an update of symbolic-ra.

Relation symbols of the theories below are comparison templates such as "$1 <= $2" or
"$1 = $2 * ($3 - $4)". A guard atom "x <= p" is the template "$1 <= $2" applied to (x, p).
"""

Literal = Tuple[Atom, bool]
Alternatives = List[List[LinearConstraint]]

# Values tried for variables that occur in products, smallest magnitude first
NONLINEAR_CANDIDATES = tuple(Fraction(value) for value in (0, 1, -1, 2, -2, 10, -10, 100, -100))


def linearize(polynomial: Polynomial, fixed: Mapping[Variable, Fraction]) -> Tuple[Dict[Hashable, Fraction], Fraction]:
    """
    Splits a polynomial into linear terms and a constant after plugging in the fixed variables.
    A remaining monomial of degree two or more becomes a single opaque term keyed by its variables.
    """
    terms: Dict[Hashable, Fraction] = {}
    constant = Fraction(0)
    for monomial, coefficient in polynomial.items():
        free = []
        for variable in monomial:
            if variable in fixed:
                coefficient *= fixed[variable]
            else:
                free.append(variable)
        if not free:
            constant += coefficient
            continue
        key = free[0] if len(free) == 1 else tuple(free)
        terms[key] = terms.get(key, Fraction(0)) + coefficient
    return terms, constant


class LinearRationalTheory(Theory):
    """
    Arithmetic comparisons over the rationals, decided by Fourier-Motzkin elimination.

    Linear guards are decided exactly. Absolute values are split into cases. Products of variables
    are treated as opaque unknowns, which keeps unsat answers sound; a sat answer for such a guard is
    only given once a verified witness is found, and otherwise the answer is unknown.
    """
    name = 'linear'
    capability = SolverCapability.LINEAR_EXACT

    def __init__(self, search_limit: int = 1000):
        super().__init__()
        self.search_limit = search_limit

    def template(self, symbol: RelationSymbol) -> Comparison:
        try:
            comparison = parse_template(symbol.name)
        except ExpressionSyntaxError as e:
            raise GuardError(f'The {self.name} theory cannot read the relation "{symbol.name}": {e}') from e
        if len(comparison_slots(comparison)) != symbol.arity:
            raise GuardError(f'The relation "{symbol.name}" does not have arity {symbol.arity}.')
        return comparison

    def declares(self, symbol: RelationSymbol) -> bool:
        try:
            self.template(symbol)
        except GuardError:
            return False
        return True

    def holds(self, symbol: RelationSymbol, values: Sequence[Fraction]) -> bool:
        return holds(self.template(symbol), values)

    def decide(self, guard: Guard) -> SatResult:
        undecided = []
        for literals in disjunctive_normal_form(guard):
            result = self.decide_conjunction(literals)
            if result.is_sat:
                witness = dict(result.witness)
                for variable in variables(guard):
                    witness.setdefault(variable, Fraction(0))
                return SatResult.sat(witness)
            if result.is_unknown:
                undecided.append(result.detail)
        if undecided:
            return SatResult.unknown('; '.join(sorted(set(undecided))))
        return SatResult.unsat()

    def decide_conjunction(self, literals: List[Literal]) -> SatResult:
        products: Set[Variable] = set()
        witness = self.search(literals, {}, products)
        if witness is None:
            return SatResult.unsat()
        if self.satisfies(literals, witness):
            return SatResult.sat(witness)
        logger.debug(f'Linear relaxation of {len(literals)} literals is sat; searching over {len(products)} product variables')
        ordered = sorted(products)
        for count, values in enumerate(itertools.product(NONLINEAR_CANDIDATES, repeat=len(ordered))):
            if count >= self.search_limit:
                break
            witness = self.search(literals, dict(zip(ordered, values)), set())
            if witness is not None and self.satisfies(literals, witness):
                return SatResult.sat(witness)
        return self.decide_nonlinear(literals)

    def decide_nonlinear(self, literals: List[Literal]) -> SatResult:
        return SatResult.unknown('nonlinear arithmetic')

    def search(self, literals: List[Literal], fixed: Dict[Variable, Fraction], products: Set[Variable]) -> Optional[Valuation]:
        """Looks for a solution of the linear relaxation with some variables fixed. Collects the variables of products."""
        choices = [self.alternatives(atom, positive, fixed, products) for atom, positive in literals]
        for choice in itertools.product(*choices):
            constraints = [constraint for group in choice for constraint in group]
            solution = solve(constraints)
            if solution is None:
                continue
            witness = dict(fixed)
            for atom, _ in literals:
                for variable in atom.args:
                    if variable not in witness:
                        witness[variable] = solution.get(variable, Fraction(0))
            return witness
        return None

    def alternatives(self, atom: Atom, positive: bool, fixed: Mapping[Variable, Fraction], products: Set[Variable]) -> Alternatives:
        comparison = self.template(atom.symbol)
        if not positive:
            comparison = comparison.negated()
        result: Alternatives = []
        for conditions, case in split_absolute(comparison):
            parts = [self.constraints(condition, atom.args, fixed, products) for condition in (*conditions, case)]
            for combination in itertools.product(*parts):
                result.append([constraint for group in combination for constraint in group])
        return result

    @staticmethod
    def constraints(comparison: Comparison, args: Sequence[Variable], fixed: Mapping[Variable, Fraction], products: Set[Variable]) -> Alternatives:
        difference = expand(comparison.left, args)
        for monomial, coefficient in expand(comparison.right, args).items():
            difference[monomial] = difference.get(monomial, Fraction(0)) - coefficient
        for monomial in difference:
            if len(monomial) > 1:
                products.update(variable for variable in monomial if variable not in fixed)
        terms, constant = linearize(difference, fixed)
        negated = {key: -coefficient for key, coefficient in terms.items()}
        below = LinearConstraint.build(terms, constant, LESS)
        above = LinearConstraint.build(negated, -constant, LESS)
        if comparison.op == '<':
            return [[below]]
        if comparison.op == '<=':
            return [[LinearConstraint.build(terms, constant, LESS_EQUAL)]]
        if comparison.op == '>':
            return [[above]]
        if comparison.op == '>=':
            return [[LinearConstraint.build(negated, -constant, LESS_EQUAL)]]
        if comparison.op == '=':
            return [[LinearConstraint.build(terms, constant, EQUAL)]]
        return [[below], [above]]

    def satisfies(self, literals: List[Literal], witness: Mapping[Variable, Fraction]) -> bool:
        return all(
            self.holds(atom.symbol, [witness[arg] for arg in atom.args]) == positive for atom, positive in literals
        )


class ExternalSolverTheory(LinearRationalTheory):
    """
    The linear theory, handing conjunctions with products it cannot settle to an SMT-LIB solver process.
    Solver failures and timeouts are reported as unknown.
    """
    name = 'external'
    capability = SolverCapability.EXTERNAL

    def __init__(self, command: str = 'z3 -in', timeout: float = 10, search_limit: int = 1000):
        super().__init__(search_limit=search_limit)
        self.solver = ExternalSolver(command, timeout)

    def decide_nonlinear(self, literals: List[Literal]) -> SatResult:
        guard = literal_guard(literals)
        try:
            result = self.solver.check(guard, self)
        except SolverError as e:
            logger.warning(e)
            return SatResult.unknown(f'external solver failed: {e}')
        if result.is_sat and not self.satisfies(literals, result.witness):
            return SatResult.unknown('external solver model does not satisfy the guard')
        return result
