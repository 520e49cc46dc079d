"""
Fourier–Motzkin elimination over exact rationals.

Constraints have the form  sum(coefficient * x) + constant  REL  0  with REL one of <, <=, =.
solve() returns a satisfying assignment for every variable that occurs, or None.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Tuple


LESS = '<'
LESS_EQUAL = '<='
EQUAL = '='

Assignment = Dict[Hashable, Fraction]


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: Tuple[Tuple[Hashable, Fraction], ...]
    constant: Fraction
    relation: str

    @classmethod
    def build(cls, coefficients: Dict[Hashable, Fraction], constant: Fraction, relation: str) -> LinearConstraint:
        terms = tuple(sorted(((key, Fraction(value)) for key, value in coefficients.items() if value), key=lambda t: repr(t[0])))
        return cls(terms, Fraction(constant), relation)

    @property
    def terms(self) -> Dict[Hashable, Fraction]:
        return dict(self.coefficients)

    def is_ground(self) -> bool:
        return not self.coefficients

    def ground_holds(self) -> bool:
        if self.relation == LESS:
            return self.constant < 0
        if self.relation == LESS_EQUAL:
            return self.constant <= 0
        return self.constant == 0

    def value(self, assignment: Assignment) -> Fraction:
        return self.constant + sum(coefficient * assignment[key] for key, coefficient in self.coefficients)

    def substitute(self, key: Hashable, expression: Dict[Hashable, Fraction], constant: Fraction) -> LinearConstraint:
        terms = self.terms
        factor = terms.pop(key, None)
        if factor is None:
            return self
        for other, coefficient in expression.items():
            terms[other] = terms.get(other, Fraction(0)) + factor * coefficient
        return LinearConstraint.build(terms, self.constant + factor * constant, self.relation)


@dataclass(frozen=True)
class Bound:
    expression: Dict[Hashable, Fraction]
    constant: Fraction
    strict: bool

    def value(self, assignment: Assignment) -> Fraction:
        return self.constant + sum(coefficient * assignment[key] for key, coefficient in self.expression.items())


def solve(constraints: Sequence[LinearConstraint]) -> Optional[Assignment]:
    keys = {key for constraint in constraints for key, _ in constraint.coefficients}
    substitutions = []
    remaining = list(constraints)

    # Equalities are solved for one of their variables and substituted away first
    while True:
        equality = next((c for c in remaining if c.relation == EQUAL and not c.is_ground()), None)
        if equality is None:
            break
        key, factor = equality.coefficients[0]
        expression = {other: -coefficient / factor for other, coefficient in equality.coefficients[1:]}
        constant = -equality.constant / factor
        substitutions.append((key, expression, constant))
        remaining = [c.substitute(key, expression, constant) for c in remaining if c is not equality]

    eliminated: List[Tuple[Hashable, List[Bound], List[Bound]]] = []
    while True:
        open_constraints = []
        for constraint in remaining:
            if constraint.is_ground():
                if not constraint.ground_holds():
                    return None
            else:
                open_constraints.append(constraint)
        if not open_constraints:
            break
        open_constraints = list(dict.fromkeys(open_constraints))
        key = _pick_variable(open_constraints)
        lowers, uppers, untouched = _partition(open_constraints, key)
        eliminated.append((key, lowers, uppers))
        for lower in lowers:
            for upper in uppers:
                terms = dict(lower.expression)
                for other, coefficient in upper.expression.items():
                    terms[other] = terms.get(other, Fraction(0)) - coefficient
                relation = LESS if lower.strict or upper.strict else LESS_EQUAL
                untouched.append(LinearConstraint.build(terms, lower.constant - upper.constant, relation))
        remaining = untouched

    assignment: Assignment = {}
    for key, lowers, uppers in reversed(eliminated):
        for bound in lowers + uppers:
            for other in bound.expression:
                assignment.setdefault(other, Fraction(0))
        assignment[key] = _choose(
            [(bound.value(assignment), bound.strict) for bound in lowers],
            [(bound.value(assignment), bound.strict) for bound in uppers],
        )
    for key, expression, constant in reversed(substitutions):
        for other in expression:
            assignment.setdefault(other, Fraction(0))
        assignment[key] = constant + sum(coefficient * assignment[other] for other, coefficient in expression.items())
    for key in keys:
        assignment.setdefault(key, Fraction(0))
    return assignment


def _partition(constraints: List[LinearConstraint], key: Hashable) -> Tuple[List[Bound], List[Bound], List[LinearConstraint]]:
    lowers, uppers, untouched = [], [], []
    for constraint in constraints:
        terms = constraint.terms
        factor = terms.pop(key, None)
        if factor is None:
            untouched.append(constraint)
            continue
        # factor * x + rest REL 0  becomes  x REL' -rest / factor
        bound = Bound(
            {other: -coefficient / factor for other, coefficient in terms.items()},
            -constraint.constant / factor,
            constraint.relation == LESS,
        )
        (uppers if factor > 0 else lowers).append(bound)
    return lowers, uppers, untouched


def _pick_variable(constraints: List[LinearConstraint]) -> Hashable:
    counts: Dict[Hashable, List[int]] = {}
    for constraint in constraints:
        for key, coefficient in constraint.coefficients:
            counts.setdefault(key, [0, 0])[coefficient > 0] += 1
    return min(counts, key=lambda key: (counts[key][0] * counts[key][1], repr(key)))


def _choose(lowers: List[Tuple[Fraction, bool]], uppers: List[Tuple[Fraction, bool]]) -> Fraction:
    """Picks a value between the tightest bounds, preferring integers."""
    lower = max(lowers, key=lambda bound: (bound[0], bound[1])) if lowers else None
    upper = min(uppers, key=lambda bound: (bound[0], not bound[1])) if uppers else None
    if lower is None and upper is None:
        return Fraction(0)
    if upper is None:
        value, strict = lower
        return Fraction(math.floor(value) + 1 if strict else math.ceil(value))
    if lower is None:
        value, strict = upper
        return Fraction(math.ceil(value) - 1 if strict else math.floor(value))
    (low, low_strict), (high, high_strict) = lower, upper
    candidates = [Fraction(math.floor(low) + 1 if low_strict else math.ceil(low))]
    if not low_strict:
        candidates.append(low)
    for candidate in candidates:
        if candidate < high or (candidate == high and not high_strict):
            return candidate
    return (low + high) / 2
