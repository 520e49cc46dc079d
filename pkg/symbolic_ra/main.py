from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

from loguru import logger
from ruamel.yaml import YAML

import ra_theories
from symbolic_ra.automaton import (
    AutomatonError, NondeterminismError, NotInjective, Run, RegisterAutomaton, check_well_formed_bounded,
    check_well_formed_syntactic, run_word, to_dot, validate,
)
from symbolic_ra.config import ConfigError, RAConfig, load_config
from symbolic_ra.equivalence import EquivalenceMode, Outcome, check_equivalence
from symbolic_ra.families import pairwise_equality_automaton
from symbolic_ra.guards import GuardError, UndefinedVariable, marker
from symbolic_ra.nerode import (
    PresentationIllFormed, SynthesisIllFormed, check_conditions,
    check_derived_determinism, extract_relations, synthesize,
)
from symbolic_ra.smtlib import export_smt
from symbolic_ra.symbolic import SymbolicRejection, WitnessRejected, concretize, enumerate_symbolic, symbolic_run
from symbolic_ra.syntax import (
    ParseError, parse_automaton, parse_data_word, parse_guard, parse_presentation, parse_sample,
    parse_symbolic_word, print_automaton, print_presentation, print_sample,
)
from symbolic_ra.theory import Theory
from symbolic_ra.utilities import parse_fraction

VERSION = "0.1.0"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3

USAGE_ERRORS = (ParseError, GuardError, AutomatonError, PresentationIllFormed, ConfigError, OSError)

yaml = YAML()


class UsageError(Exception):
    def __init__(self, message=None):
        if message is not None:
            super().__init__(message)


class ArgumentParser(argparse.ArgumentParser):
    """Reports bad arguments as UsageError instead of exiting, so main() keeps its exit codes."""

    def error(self, message):
        raise UsageError(f'{self.prog}: {message}')


def configure_logging(config: RAConfig, verbosity: int = 0) -> None:
    level = str(config['log_level']).upper()
    if verbosity == 1:
        level = 'INFO'
    elif verbosity > 1:
        level = 'DEBUG'
    logger.remove()
    logger.add(sys.stderr, level=level)
    if config.log_path is not None:
        logger.add(config.log_path, rotation='1 week', level='DEBUG', mode='a')


def read_text(path: str) -> str:
    with open(path, encoding='utf-8') as fp:
        return fp.read()


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, mode='w', encoding='utf-8') as fp:
        fp.write(text)
    logger.info(f'Wrote {path}')


def load_automaton(path: str) -> RegisterAutomaton:
    try:
        return parse_automaton(read_text(path))
    except ParseError as e:
        raise ParseError(f'{path}: {e}') from e


def load_sample_and_presentation(sample_path: str, presentation_path: str):
    sample = parse_sample(read_text(sample_path))
    return sample, parse_presentation(read_text(presentation_path), sample)


def _depth(args, config: RAConfig) -> int:
    depth = config['default_depth'] if args.depth is None else args.depth
    if depth < 0:
        raise UsageError(f'The depth must not be negative, got {depth}.')
    return depth


def _caused_by(error: BaseException, kind: type) -> bool:
    while error is not None:
        if isinstance(error, kind):
            return True
        error = error.__cause__
    return False


def cmd_check(args, config: RAConfig, theory: Theory) -> int:
    try:
        automaton = load_automaton(args.file)
    except ParseError as e:
        if _caused_by(e, NotInjective):
            print(f'not injective: {e}')
            return EXIT_FAILED
        raise
    status = EXIT_OK

    report = validate(automaton, theory)
    for first, second, witness in report.determinism_violations:
        values = ', '.join(f'{variable}={theory.format_value(value)}' for variable, value in sorted(witness.items()))
        print(f'not deterministic: "{first}" and "{second}" are both enabled{" at " + values if values else ""}')
        status = EXIT_FAILED
    for transition in report.injectivity_violations:
        print(f'not injective: "{transition}" stores one value in two registers')
        status = EXIT_FAILED
    for first, second, detail in report.unknown_pairs:
        print(f'unknown: could not decide whether "{first}" and "{second}" overlap ({detail})')

    well_formed = check_well_formed_syntactic(automaton)
    for transition in well_formed.offending:
        defined = ', '.join(sorted(map(str, well_formed.defined[transition.source]))) or 'no registers'
        print(f'not well formed: "{transition}" reads registers outside {defined} at {transition.source}')
        status = EXIT_FAILED

    unknown = bool(report.unknown_pairs)
    if args.bound is not None:
        bounded = check_well_formed_bounded(automaton, args.bound, theory)
        if bounded.verdict == 'counterexample':
            print(f'not well formed: after "{bounded.run.word}" the transition "{bounded.transition}" reads an empty register')
            status = EXIT_FAILED
        elif bounded.verdict == 'unknown':
            print(f'unknown: "{bounded.transition}" may read an empty register after "{bounded.run.word}" ({bounded.detail})')
            unknown = True

    if status == EXIT_OK and unknown:
        return EXIT_UNKNOWN
    if status == EXIT_OK:
        print(f'ok: {len(automaton.locations)} locations, {len(automaton.transitions)} transitions, '
              f'{len(automaton.registers)} registers')
        logger.success(f'{args.file} is deterministic and well formed')
    return status


def cmd_run(args, config: RAConfig, theory: Theory) -> int:
    automaton = load_automaton(args.file)
    word = parse_data_word(args.word)
    result = run_word(automaton, word, theory)
    if isinstance(result, Run):
        print('accepted')
        print(', '.join(map(str, result.configurations)))
        return EXIT_OK
    print(f'rejected at position {result.position}: no transition for {word[result.position - 1]} '
          f'from {result.run.final}')
    print(', '.join(map(str, result.run.configurations)))
    return EXIT_FAILED


def cmd_symbolic(args, config: RAConfig, theory: Theory) -> int:
    automaton = load_automaton(args.file)
    word = parse_symbolic_word(args.word)
    result = symbolic_run(automaton, word, theory)
    if isinstance(result, SymbolicRejection):
        reason = 'no transition produces that guard' if result.reason == 'no-transition' else 'the guards are unsatisfiable'
        print(f'rejected at position {result.position}: {reason}')
        return EXIT_FAILED
    print('accepted')
    print(' '.join(result.locations))

    if args.witness is not None:
        values = [parse_fraction(text) for text in args.witness.split()]
        valuation = {marker(position): value for position, value in enumerate(values, start=1)}
        try:
            run = concretize(result, valuation, theory)
        except WitnessRejected as e:
            print(f'witness rejected: {e}')
            return EXIT_FAILED
        print(f'witness accepted: {" ".join(map(str, run.word))}')
        print(', '.join(map(str, run.configurations)))
    elif result.witness is not None and word:
        witness = ' '.join(theory.format_value(result.witness.get(marker(i), 0)) for i in range(1, len(word) + 1))
        print(f'witness: {witness}')

    if not result.is_certain:
        print('unknown: the theory could not decide whether the guards are satisfiable')
        return EXIT_UNKNOWN
    return EXIT_OK


def cmd_enumerate(args, config: RAConfig, theory: Theory) -> int:
    automaton = load_automaton(args.file)
    enumeration = enumerate_symbolic(automaton, _depth(args, config), theory)
    for word in enumeration.words:
        print(word)
    for word in enumeration.undetermined_words:
        print(f'? {word}')
    logger.success(f'{len(enumeration.runs)} symbolic words up to depth {enumeration.depth}')
    return EXIT_UNKNOWN if enumeration.undetermined else EXIT_OK


def cmd_extract(args, config: RAConfig, theory: Theory) -> int:
    automaton = load_automaton(args.file)
    extraction = extract_relations(automaton, _depth(args, config), theory)
    sample_text = print_sample(extraction.sample)
    presentation_text = print_presentation(extraction.presentation, extraction.sample)
    if args.out is None:
        print(sample_text, end='')
        print(presentation_text, end='')
    else:
        write_text(Path(args.out) / 'sample.txt', sample_text)
        write_text(Path(args.out) / 'presentation.txt', presentation_text)
    if extraction.undetermined:
        logger.warning(f'{len(extraction.undetermined)} words with undecided satisfiability were left out of the sample')
        return EXIT_UNKNOWN
    return EXIT_OK


def _print_condition_report(report, determinism) -> None:
    for violation in report.violations:
        print(violation)
    for first, second in determinism.violations:
        print(f'not deterministic: "{first}" and "{second}" share a guard but not a transition class')
    for word in report.infeasible:
        print(f'infeasible: "{word}" has unsatisfiable guards')
    if report.boundary_skips:
        logger.warning(f'{report.boundary_skips} checks needed words beyond the sample depth and were skipped')


def cmd_check_regular(args, config: RAConfig, theory: Theory) -> int:
    sample, presentation = load_sample_and_presentation(args.sample, args.presentation)
    report = check_conditions(sample, presentation, theory)
    determinism = check_derived_determinism(sample, presentation, theory)
    _print_condition_report(report, determinism)
    if args.report is not None:
        data = report.to_yaml_dict()
        data['determinism_violations'] = len(determinism.violations)
        with open(args.report, mode='w') as fp:
            yaml.dump(data, fp)
    if not report.ok or not determinism.ok:
        return EXIT_FAILED
    if report.unknowns or determinism.unknowns:
        print(f'unknown: {report.unknowns + determinism.unknowns} checks could not be decided')
        return EXIT_UNKNOWN
    print(f'ok: {len(sample)} words satisfy every condition')
    return EXIT_OK


def cmd_synthesize(args, config: RAConfig, theory: Theory) -> int:
    sample, presentation = load_sample_and_presentation(args.sample, args.presentation)
    report = check_conditions(sample, presentation, theory)
    determinism = check_derived_determinism(sample, presentation, theory)
    if not report.ok or not determinism.ok:
        _print_condition_report(report, determinism)
        logger.error('The presentation violates the regularity conditions, so nothing was synthesized')
        return EXIT_FAILED
    automaton = synthesize(sample, presentation, theory)
    text = print_automaton(automaton)
    if args.output is None:
        print(text, end='')
    else:
        write_text(Path(args.output), text)
    return EXIT_OK


def cmd_equiv(args, config: RAConfig, theory: Theory) -> int:
    first, second = load_automaton(args.first), load_automaton(args.second)
    verdict = check_equivalence(
        first, second, EquivalenceMode(args.mode), _depth(args, config), theory,
        sampling_attempts=config['sampling_attempts'], sampling_seed=config['sampling_seed'],
    )
    print(verdict)
    return verdict.exit_status


def cmd_export_smt(args, config: RAConfig, theory: Theory) -> int:
    guard = parse_guard(args.guard)
    theory.validate_guard(guard)
    print(export_smt(guard, theory, with_model=args.model), end='')
    return EXIT_OK


def cmd_gen_an(args, config: RAConfig, theory: Theory) -> int:
    try:
        automaton = pairwise_equality_automaton(args.n)
    except ValueError as e:
        raise UsageError(str(e)) from e
    text = print_automaton(automaton)
    if args.output is None:
        print(text, end='')
    else:
        write_text(Path(args.output), text)
    return EXIT_OK


def cmd_dot(args, config: RAConfig, theory: Theory) -> int:
    text = to_dot(load_automaton(args.file))
    if args.output is None:
        print(text, end='')
    else:
        write_text(Path(args.output), text)
    return EXIT_OK


def cmd_pipeline(args, config: RAConfig, theory: Theory) -> int:
    automaton = load_automaton(args.file)
    depth = _depth(args, config)
    out = Path(args.out)

    report = validate(automaton, theory)
    if not report.ok:
        for first, second, _ in report.determinism_violations:
            print(f'not deterministic: "{first}" and "{second}" are both enabled')
        for transition in report.injectivity_violations:
            print(f'not injective: "{transition}" stores one value in two registers')
        return EXIT_FAILED

    extraction = extract_relations(automaton, depth, theory)
    sample, presentation = extraction.sample, extraction.presentation
    sample_text = print_sample(sample)
    presentation_text = print_presentation(presentation, sample)
    write_text(out / 'sample.txt', sample_text)
    write_text(out / 'presentation.txt', presentation_text)

    reparsed = parse_sample(sample_text)
    if reparsed != sample or parse_presentation(presentation_text, reparsed) != presentation:
        logger.error('The written sample or presentation does not read back to the same structure')
        return EXIT_FAILED

    conditions = check_conditions(sample, presentation, theory)
    determinism = check_derived_determinism(sample, presentation, theory)
    summary = conditions.to_yaml_dict()
    summary['depth'] = depth
    summary['determinism_violations'] = len(determinism.violations)
    summary['undetermined'] = [str(word) for word in extraction.undetermined]

    status = EXIT_OK
    if not conditions.ok or not determinism.ok:
        _print_condition_report(conditions, determinism)
        summary['round_trip'] = 'skipped'
        status = EXIT_FAILED
    else:
        try:
            synthesized = synthesize(sample, presentation, theory, alphabet=automaton.alphabet)
        except SynthesisIllFormed as e:
            logger.error(e)
            summary['round_trip'] = 'synthesis failed'
            status = EXIT_FAILED
        else:
            automaton_text = print_automaton(synthesized)
            write_text(out / 'synthesized.ra', automaton_text)
            if parse_automaton(automaton_text) != synthesized:
                logger.error('synthesized.ra does not read back to the synthesized automaton')
                status = EXIT_FAILED
            verdict = check_equivalence(automaton, synthesized, EquivalenceMode.SYMBOLIC, depth, theory)
            summary['round_trip'] = verdict.outcome.value
            print(f'round trip: {verdict}')
            if verdict.outcome is Outcome.COUNTEREXAMPLE:
                status = EXIT_FAILED
            elif verdict.outcome is Outcome.UNKNOWN and status == EXIT_OK:
                status = EXIT_UNKNOWN

    if extraction.undetermined and status == EXIT_OK:
        status = EXIT_UNKNOWN
    with open(out / 'report.yml', mode='w') as fp:
        yaml.dump(summary, fp)
    print(f'{len(sample)} words, {len(conditions.violations)} condition violations')
    if status == EXIT_OK:
        logger.success(f'Pipeline for {args.file} at depth {depth} finished in {out}')
    return status


COMMANDS: Dict[str, Callable[..., int]] = {
    'check': cmd_check,
    'run': cmd_run,
    'symbolic': cmd_symbolic,
    'enumerate': cmd_enumerate,
    'extract': cmd_extract,
    'check-regular': cmd_check_regular,
    'synthesize': cmd_synthesize,
    'equiv': cmd_equiv,
    'export-smt': cmd_export_smt,
    'gen-an': cmd_gen_an,
    'pipeline': cmd_pipeline,
    'dot': cmd_dot,
}


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog='ra', description='Register automata with symbolic traces.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {VERSION}')
    parser.add_argument('--theory', default=None, help='linear, external or external:<solver command>')
    parser.add_argument('--config', default=None, help='Path to a config.yml')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for info, -vv for debug output')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND', parser_class=ArgumentParser)
    commands.required = True

    check = commands.add_parser('check', help='Check determinism and well-formedness')
    check.add_argument('file')
    check.add_argument('--bound', type=int, default=None, help='Also search symbolic runs up to this length')

    run = commands.add_parser('run', help='Run a data word like "a(1) a(4)"')
    run.add_argument('file')
    run.add_argument('word')

    symbolic = commands.add_parser('symbolic', help='Run a symbolic word like "a [true] ; a [v1 <= v2]"')
    symbolic.add_argument('file')
    symbolic.add_argument('word')
    symbolic.add_argument('--witness', default=None, help='Values for v1, v2, ... separated by spaces')

    for name, help_text in (('enumerate', 'List the symbolic language up to a depth'),
                            ('extract', 'Extract the sample and presentation of an automaton')):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument('file')
        sub.add_argument('--depth', type=int, default=None)
        if name == 'extract':
            sub.add_argument('--out', default=None, help='Directory for sample.txt and presentation.txt')

    check_regular = commands.add_parser('check-regular', help='Check a presentation against the regularity conditions')
    check_regular.add_argument('sample')
    check_regular.add_argument('presentation')
    check_regular.add_argument('--report', default=None, help='Also write the report as YAML')

    synthesize_parser = commands.add_parser('synthesize', help='Build an automaton from a sample and presentation')
    synthesize_parser.add_argument('sample')
    synthesize_parser.add_argument('presentation')
    synthesize_parser.add_argument('-o', '--output', default=None)

    equiv = commands.add_parser('equiv', help='Compare two automata up to a depth')
    equiv.add_argument('first')
    equiv.add_argument('second')
    equiv.add_argument('--mode', choices=[mode.value for mode in EquivalenceMode], default='symbolic')
    equiv.add_argument('--depth', type=int, default=None)

    smt = commands.add_parser('export-smt', help='Print a guard as an SMT-LIB script')
    smt.add_argument('guard')
    smt.add_argument('--model', action='store_true', help='Ask the solver for a model')

    gen = commands.add_parser('gen-an', help='Print the pairwise equality automaton for n')
    gen.add_argument('--n', type=int, required=True)
    gen.add_argument('-o', '--output', default=None)

    pipeline = commands.add_parser('pipeline', help='Extract, check, synthesize and compare in one go')
    pipeline.add_argument('file')
    pipeline.add_argument('--depth', type=int, default=None)
    pipeline.add_argument('--out', required=True)

    dot = commands.add_parser('dot', help='Print the automaton as Graphviz DOT')
    dot.add_argument('file')
    dot.add_argument('-o', '--output', default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = load_config(Path(args.config) if args.config else None)
        configure_logging(config, args.verbose)
        theory = ra_theories.resolve_theory(args.theory, config)
        logger.info(f'ra {VERSION}: {args.command}')
        return COMMANDS[args.command](args, config, theory)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except (NondeterminismError, UndefinedVariable, SynthesisIllFormed) as e:
        logger.error(e)
        return EXIT_FAILED
    except USAGE_ERRORS as e:
        logger.error(e)
        return EXIT_USAGE
    except ValueError as e:
        # Unknown theory names and bad numbers on the command line
        logger.error(e)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f'{e} Run with -vv to see the traceback.')
        logger.opt(exception=True).debug(e)
        return EXIT_FAILED
