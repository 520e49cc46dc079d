from __future__ import annotations

from inspect import getmembers, isabstract, isclass
from typing import TYPE_CHECKING, Dict, Optional, Type

from loguru import logger

from symbolic_ra.theory import Theory
from . import default_theories

if TYPE_CHECKING:
    from symbolic_ra.config import RAConfig

theories: Dict[str, Type[Theory]] = {}


def fetch_theories(module) -> Dict[str, Type[Theory]]:
    output_theories = {}
    for _, member in getmembers(module, isclass):
        if issubclass(member, Theory) and not isabstract(member) and 'name' in vars(member):
            output_theories[member.name] = member
    return output_theories


theories.update(fetch_theories(default_theories))

try:
    import custom_theories
except ImportError:
    pass
else:
    theories.update(fetch_theories(custom_theories))


def resolve_theory(selection: Optional[str] = None, config: Optional[RAConfig] = None) -> Theory:
    """
    Builds the theory named by selection, such as "linear", "external" or "external:cvc5 --lang smt2".
    Without a selection the 'theory' option of the config is used.
    """
    if selection is None:
        selection = config['theory'] if config is not None else 'linear'
    name, _, argument = str(selection).partition(':')
    try:
        theory_class = theories[name]
    except KeyError:
        raise ValueError(f'There is no theory called "{name}". Known theories: {", ".join(sorted(theories))}') from None

    if issubclass(theory_class, default_theories.ExternalSolverTheory):
        command = argument or (config.solver_command if config is not None else None)
        if not command:
            raise ValueError('The external theory needs a solver command, like "external:z3 -in", or solver_command in the config.')
        timeout = config['solver_timeout'] if config is not None else 10
        theory = theory_class(command=command, timeout=timeout)
    else:
        theory = theory_class()
    logger.info(f'Using the theory {theory}')
    return theory
