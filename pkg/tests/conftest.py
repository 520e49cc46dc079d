from __future__ import annotations

from pathlib import Path

import pytest

from ra_theories.default_theories import LinearRationalTheory
from symbolic_ra.automaton import RegisterAutomaton
from symbolic_ra.syntax import parse_automaton

AUTOMATA = Path(__file__).resolve().parent.parent / 'automata'

BUNDLED = (
    'monotone_runs', 'proportional_controller', 'sign_split', 'sign_blind', 'sign_router_upper', 'sign_router_lower',
)


def automaton_path(name: str) -> str:
    return str(AUTOMATA / f'{name}.ra')


def load(name: str) -> RegisterAutomaton:
    return parse_automaton((AUTOMATA / f'{name}.ra').read_text(encoding='utf-8'))


@pytest.fixture
def theory() -> LinearRationalTheory:
    return LinearRationalTheory()


@pytest.fixture
def monotone_runs() -> RegisterAutomaton:
    return load('monotone_runs')


@pytest.fixture
def controller() -> RegisterAutomaton:
    return load('proportional_controller')


@pytest.fixture(autouse=True)
def isolated_directory(tmp_path, monkeypatch):
    """Keeps a config.yml or .env in the working directory out of the tests."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv('RA_SOLVER_COMMAND', raising=False)
    return tmp_path
