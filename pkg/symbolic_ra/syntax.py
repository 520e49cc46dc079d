"""
Text formats for guards, automata, data words, symbolic words, language samples and presentations.

Automaton files look like this:

    # monotone runs
    alphabet: a
    registers: x
    initial: q0
    q0 --a[ true ]{ x:=p }--> q1
    q1 --a[ x <= p ]{ x:=p }--> q1

An optional "locations:" line lists the locations; otherwise they are taken from the transitions.
Every printer here produces text that the matching parser reads back to an equal structure.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Tuple

import regex

from symbolic_ra.automaton import AutomatonError, DataSymbol, RegisterAutomaton, Transition
from symbolic_ra.expressions import ExpressionParser, ExpressionSyntaxError, Slot, Token, render_comparison
from symbolic_ra.guards import (
    FALSE, TRUE, And, Atom, Guard, GuardError, Not, Or, RelationSymbol, Variable, canonical,
)
from symbolic_ra.nerode import LanguageSample, RelationPresentation
from symbolic_ra.symbolic import EMPTY_WORD, SymbolicWord
from symbolic_ra.utilities import parse_fraction

HEADER = regex.compile(r'^(?P<key>alphabet|registers|initial|locations)\s*:\s*(?P<value>.*)$')
TRANSITION = regex.compile(
    r'^(?P<source>\w+)\s*--\s*(?P<symbol>\w+)\s*\[(?P<guard>[^\]]*)\]\s*'
    r'(?:\{(?P<assignment>[^}]*)\})?\s*-->\s*(?P<target>\w+)$'
)
ASSIGNMENT = regex.compile(r'^\s*(?P<register>\w+)\s*:=\s*(?P<source>\w+)\s*$')
DATA_SYMBOL = regex.compile(r'\s*(?P<symbol>\w+)\s*\(\s*(?P<value>[^()\s]+)\s*\)\s*')
SYMBOLIC_STEP = regex.compile(r'^\s*(?P<symbol>\w+)\s*\[(?P<guard>[^\]]*)\]\s*$')
DEPTH_LINE = regex.compile(r'^depth\s*:\s*(?P<depth>\d+)$')
SECTION = regex.compile(r'^\[(?P<name>loc|trans|reg)\]$')
CLASS_LINE = regex.compile(r'^(?P<index>\d+)\s+(?:v(?P<marker>[1-9]\d*)\s+)?->\s*(?P<cls>[\w.-]+)$')
EMPTY_WORD_TEXT = {'', 'ε', 'eps'}


class ParseError(ValueError):
    def __init__(self, message=None, line: Optional[int] = None):
        self.line = line
        if message is not None:
            super().__init__(f'line {line}: {message}' if line is not None else message)


class GuardParser(ExpressionParser):
    """
    Infix guards: comparisons joined by &&, ||, ! (or and, or, not), with true and false.
    Each comparison becomes one atom whose relation symbol is the comparison with its variables
    replaced by numbered slots, so "x <= p" is the atom "$1 <= $2" over (x, p).
    """

    def __init__(self, text: str):
        super().__init__(text)
        self.args: List[Variable] = []

    def parse(self) -> Guard:
        guard = self.parse_disjunction()
        if not self.at_end():
            raise self.error('Unexpected input')
        return canonical(guard)

    def parse_disjunction(self) -> Guard:
        children = [self.parse_conjunction()]
        while self.peek_text() in ('||', 'or'):
            self.advance()
            children.append(self.parse_conjunction())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def parse_conjunction(self) -> Guard:
        children = [self.parse_unary()]
        while self.peek_text() in ('&&', 'and'):
            self.advance()
            children.append(self.parse_unary())
        return children[0] if len(children) == 1 else And(tuple(children))

    def parse_unary(self) -> Guard:
        text = self.peek_text()
        if text in ('!', 'not'):
            self.advance()
            return Not(self.parse_unary())
        if text == 'true':
            self.advance()
            return TRUE
        if text == 'false':
            self.advance()
            return FALSE
        if text == '(':
            # A parenthesis opens either a nested guard or an arithmetic term of a comparison
            start = self.position
            try:
                self.advance()
                guard = self.parse_disjunction()
                self.expect(')')
                return guard
            except ExpressionSyntaxError:
                self.position = start
        token = self.peek()
        if token is not None and token.kind == 'name' and self.peek_text(1) == '(':
            return self.parse_relation()
        return self.parse_atom()

    def parse_atom(self) -> Atom:
        self.args = []
        comparison = self.parse_comparison()
        return Atom(RelationSymbol(render_comparison(comparison), len(self.args)), tuple(self.args))

    def parse_relation(self) -> Atom:
        name = self.advance().text
        self.expect('(')
        args = []
        while self.peek_text() != ')':
            if args:
                self.expect(',')
            token = self.advance()
            if token.kind != 'name':
                raise self.error(f'Expected a variable, got "{token.text}"')
            args.append(self._variable(token.text))
        self.expect(')')
        return Atom(RelationSymbol(name, len(args)), tuple(args))

    def variable(self, token: Token) -> Slot:
        self.args.append(self._variable(token.text))
        return Slot(len(self.args))

    def _variable(self, text: str) -> Variable:
        try:
            return Variable.from_name(text)
        except GuardError as e:
            raise self.error(str(e)) from e


def parse_guard(text: str, line: Optional[int] = None) -> Guard:
    try:
        return GuardParser(text).parse()
    except (ExpressionSyntaxError, GuardError) as e:
        raise ParseError(str(e), line) from e


def _lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split('#', 1)[0].strip()
        if stripped:
            yield number, stripped


def _parse_assignment(text: str, line: int) -> Dict[Variable, Variable]:
    assignment = {}
    for part in filter(None, (piece.strip() for piece in text.split(','))):
        match = ASSIGNMENT.match(part)
        if match is None:
            raise ParseError(f'"{part}" is not an assignment like x:=p', line)
        try:
            register = Variable.register(match['register'])
            source = Variable.from_name(match['source'])
        except GuardError as e:
            raise ParseError(str(e), line) from e
        if register in assignment:
            raise ParseError(f'{register} is assigned twice', line)
        assignment[register] = source
    return assignment


def parse_automaton(text: str) -> RegisterAutomaton:
    headers: Dict[str, List[str]] = {}
    transitions: List[Transition] = []
    for number, line in _lines(text):
        header = HEADER.match(line)
        if header is not None:
            if header['key'] in headers:
                raise ParseError(f'"{header["key"]}" is given twice', number)
            headers[header['key']] = header['value'].split()
            continue
        match = TRANSITION.match(line)
        if match is None:
            raise ParseError(f'Expected a header or a transition like "q0 --a[ true ]{{ x:=p }}--> q1", got "{line}"', number)
        guard = parse_guard(match['guard'].strip() or 'true', number)
        assignment = _parse_assignment(match['assignment'] or '', number)
        try:
            transitions.append(Transition(match['source'], match['symbol'], guard, assignment, match['target']))
        except AutomatonError as e:
            raise ParseError(str(e), number) from e

    for key in ('alphabet', 'initial'):
        if key not in headers:
            raise ParseError(f'The automaton has no "{key}:" line')
    if len(headers['initial']) != 1:
        raise ParseError('"initial:" takes exactly one location')
    initial = headers['initial'][0]
    if 'locations' in headers:
        locations = headers['locations']
    else:
        locations = list(dict.fromkeys([initial] + [name for t in transitions for name in (t.source, t.target)]))
    try:
        registers = [Variable.register(name) for name in headers.get('registers', [])]
        return RegisterAutomaton(tuple(headers['alphabet']), tuple(locations), initial, tuple(registers), tuple(transitions))
    except (AutomatonError, GuardError) as e:
        raise ParseError(str(e)) from e


def print_automaton(automaton: RegisterAutomaton) -> str:
    lines = [
        f'alphabet: {" ".join(automaton.alphabet)}',
        f'registers: {" ".join(map(str, automaton.registers))}'.rstrip(),
        f'initial: {automaton.initial}',
        f'locations: {" ".join(automaton.locations)}',
    ]
    lines.extend(str(transition) for transition in automaton.transitions)
    return '\n'.join(lines) + '\n'


def parse_data_word(text: str) -> Tuple[DataSymbol, ...]:
    """Reads words like "a(1) a(4) gain(0,5) a(-1/2)". The empty string is the empty word."""
    if text.strip() in EMPTY_WORD_TEXT:
        return ()
    word = []
    position = 0
    while position < len(text):
        match = DATA_SYMBOL.match(text, position)
        if match is None:
            raise ParseError(f'Cannot read a data symbol like a(1) at column {position + 1} of "{text}"')
        try:
            word.append(DataSymbol(match['symbol'], parse_fraction(match['value'])))
        except ValueError as e:
            raise ParseError(str(e)) from e
        position = match.end()
    return tuple(word)


def parse_symbolic_word(text: str, line: Optional[int] = None) -> SymbolicWord:
    if text.strip() in EMPTY_WORD_TEXT:
        return EMPTY_WORD
    steps = []
    for part in text.split(';'):
        match = SYMBOLIC_STEP.match(part)
        if match is None:
            raise ParseError(f'"{part.strip()}" is not a step like "a [v1 <= v2]"', line)
        steps.append((match['symbol'], parse_guard(match['guard'].strip() or 'true', line)))
    return SymbolicWord(tuple(steps))


def parse_sample(text: str) -> LanguageSample:
    depth = None
    words = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        match = DEPTH_LINE.match(line)
        if match is not None:
            if depth is not None:
                raise ParseError('"depth:" is given twice', number)
            depth = int(match['depth'])
            continue
        words.append(parse_symbolic_word(line, number))
    if depth is None:
        raise ParseError('The sample has no "depth:" line')
    if len(set(words)) != len(words):
        raise ParseError('The sample lists a word twice')
    return LanguageSample(depth, tuple(words))


def print_sample(sample: LanguageSample) -> str:
    return '\n'.join([f'depth: {sample.depth}'] + [str(word) for word in sample.words]) + '\n'


def parse_presentation(text: str, sample: LanguageSample) -> RelationPresentation:
    """
    Sections [loc], [trans] and [reg] with lines "index -> class" and, for [reg], "index v<i> -> class".
    Indices count the words of the sample from 0 in sorted order, so 0 is the empty word.
    """
    maps: Dict[str, dict] = {'loc': {}, 'trans': {}, 'reg': {}}
    section = None
    for number, line in _lines(text):
        header = SECTION.match(line)
        if header is not None:
            section = header['name']
            continue
        match = CLASS_LINE.match(line)
        if match is None:
            raise ParseError(f'Expected a line like "3 -> q1" or "3 v2 -> x", got "{line}"', number)
        if section is None:
            raise ParseError('Class lines must follow a [loc], [trans] or [reg] header', number)
        index = int(match['index'])
        if index >= len(sample):
            raise ParseError(f'The sample has no word number {index}', number)
        word = sample.words[index]
        if section == 'reg':
            if match['marker'] is None:
                raise ParseError('Register lines name a marker, like "3 v2 -> x"', number)
            key = (word, int(match['marker']))
        else:
            if match['marker'] is not None:
                raise ParseError('Only [reg] lines name a marker', number)
            key = word
        if key in maps[section]:
            raise ParseError(f'Word number {index} is classified twice in [{section}]', number)
        maps[section][key] = match['cls']
    presentation = RelationPresentation(maps['loc'], maps['trans'], maps['reg'])
    presentation.validate(sample)
    return presentation


def print_presentation(presentation: RelationPresentation, sample: LanguageSample) -> str:
    lines = ['[loc]']
    lines.extend(f'{index} -> {presentation.locations[word]}' for index, word in enumerate(sample.words))
    lines.append('[trans]')
    lines.extend(
        f'{index} -> {presentation.transitions[word]}' for index, word in enumerate(sample.words) if word
    )
    lines.append('[reg]')
    for index, word in enumerate(sample.words):
        for marker_index, register_class in sorted(presentation.stored(word).items()):
            lines.append(f'{index} v{marker_index} -> {register_class}')
    return '\n'.join(lines) + '\n'
