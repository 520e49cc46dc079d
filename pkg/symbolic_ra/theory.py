from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import ClassVar, Dict, Optional, Sequence

from loguru import logger

from symbolic_ra.guards import Guard, GuardError, RelationSymbol, Valuation, atoms, render_guard
from symbolic_ra.utilities import format_fraction, parse_fraction


class Verdict(Enum):
    SAT = 'sat'
    UNSAT = 'unsat'
    UNKNOWN = 'unknown'


class SolverCapability(Enum):
    LINEAR_EXACT = 'linear-exact'
    EXTERNAL = 'external'
    NONE = 'none'


@dataclass(frozen=True)
class SatResult:
    verdict: Verdict
    witness: Optional[Valuation] = None
    detail: str = ''

    @classmethod
    def sat(cls, witness: Valuation) -> SatResult:
        return cls(Verdict.SAT, dict(witness))

    @classmethod
    def unsat(cls) -> SatResult:
        return cls(Verdict.UNSAT)

    @classmethod
    def unknown(cls, detail: str) -> SatResult:
        return cls(Verdict.UNKNOWN, detail=detail)

    @property
    def is_sat(self) -> bool:
        return self.verdict is Verdict.SAT

    @property
    def is_unsat(self) -> bool:
        return self.verdict is Verdict.UNSAT

    @property
    def is_unknown(self) -> bool:
        return self.verdict is Verdict.UNKNOWN


class Theory(ABC):
    """
    A data domain with interpreted relation symbols and a satisfiability procedure.

    Subclasses placed in the ra_theories package are picked up by name, see ra_theories.theories.
    Interpretations must be total on tuples of the declared arity.
    """
    name: ClassVar[str]
    capability: ClassVar[SolverCapability] = SolverCapability.NONE
    domain: ClassVar[str] = 'exact rationals'

    def __init__(self):
        self._decided: Dict[Guard, SatResult] = {}

    @abstractmethod
    def declares(self, symbol: RelationSymbol) -> bool:
        ...

    @abstractmethod
    def holds(self, symbol: RelationSymbol, values: Sequence[Fraction]) -> bool:
        ...

    @abstractmethod
    def decide(self, guard: Guard) -> SatResult:
        '''Decides a canonical guard. Called through check(), which caches answers.'''

    def check(self, guard: Guard) -> SatResult:
        try:
            return self._decided[guard]
        except KeyError:
            pass
        result = self.decide(guard)
        if result.is_unknown:
            logger.debug(f'{self.name} theory: unknown for "{render_guard(guard)}" ({result.detail})')
        self._decided[guard] = result
        return result

    def validate_guard(self, guard: Guard) -> None:
        for atom in atoms(guard):
            if not self.declares(atom.symbol):
                raise GuardError(f'The {self.name} theory has no relation "{atom.symbol.name}" of arity {atom.symbol.arity}.')

    def parse_value(self, text: str) -> Fraction:
        return parse_fraction(text)

    def format_value(self, value: Fraction) -> str:
        return format_fraction(value)

    def __str__(self) -> str:
        return f'{self.name} ({self.domain}, solver: {self.capability.value})'
