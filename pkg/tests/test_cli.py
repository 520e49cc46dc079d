from __future__ import annotations

import pytest
from ruamel.yaml import YAML

from conftest import automaton_path, load
from symbolic_ra import main
from symbolic_ra.main import EXIT_FAILED, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE, VERSION
from symbolic_ra.nerode import extract_relations
from symbolic_ra.syntax import parse_automaton, parse_symbolic_word, print_presentation, print_sample

MONOTONE = automaton_path('monotone_runs')


def test_check_ok(capsys):
    assert main(['check', MONOTONE, '--bound', '3']) == EXIT_OK
    assert capsys.readouterr().out.strip() == 'ok: 3 locations, 4 transitions, 1 registers'


def test_check_reports_overlapping_guards(capsys):
    assert main(['check', automaton_path('duplicate_guard')]) == EXIT_FAILED
    assert 'not deterministic' in capsys.readouterr().out


def test_check_reports_empty_registers(capsys):
    assert main(['check', automaton_path('monotone_runs_ill_formed'), '--bound', '1']) == EXIT_FAILED
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert all(line.startswith('not well formed') for line in lines)


def test_check_reports_shared_assignments(tmp_path, capsys):
    shared = tmp_path / 'shared.ra'
    shared.write_text('alphabet: a\nregisters: x y\ninitial: q0\nq0 --a[ true ]{ x:=p, y:=p }--> q1\n', encoding='utf-8')
    assert main(['check', str(shared)]) == EXIT_FAILED
    out = capsys.readouterr().out
    assert out.startswith('not injective')
    assert 'line 4' in out


def test_run_prints_configurations(capsys):
    assert main(['run', MONOTONE, 'a(1) a(4) a(0) a(7)']) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out == ['accepted', '(q0, ∅), (q1, x↦1), (q1, x↦4), (q2, x↦0), (q1, x↦7)']


def test_run_rejection(capsys):
    assert main(['run', MONOTONE, 'a(1) a(0) a(-1)']) == EXIT_FAILED
    assert capsys.readouterr().out.startswith('rejected at position 3')


def test_symbolic_with_witness(capsys):
    word = 'a [true] ; a [v1 <= v2] ; a [v3 < v2] ; a [v3 <= v4]'
    assert main(['symbolic', MONOTONE, word, '--witness', '1 4 0 7']) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[:3] == ['accepted', 'q0 q1 q1 q2 q1', 'witness accepted: a(1) a(4) a(0) a(7)']


def test_symbolic_witness_must_satisfy_the_guards(capsys):
    assert main(['symbolic', MONOTONE, 'a [true] ; a [v1 <= v2]', '--witness', '4 1']) == EXIT_FAILED
    assert 'witness rejected' in capsys.readouterr().out


def test_symbolic_rejection(capsys):
    assert main(['symbolic', MONOTONE, 'a [true] ; a [v2 < v1] ; a [v2 < v3]']) == EXIT_FAILED
    assert capsys.readouterr().out.startswith('rejected at position 3')


def test_enumerate(capsys):
    assert main(['enumerate', automaton_path('sign_split'), '--depth', '1']) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ['ε', 'a [v1 <= 0]', 'a [v1 > 0]']


def test_extract_check_and_synthesize(tmp_path, capsys):
    assert main(['extract', MONOTONE, '--depth', '3', '--out', str(tmp_path)]) == EXIT_OK
    sample, presentation = tmp_path / 'sample.txt', tmp_path / 'presentation.txt'
    assert sample.exists() and presentation.exists()

    report = tmp_path / 'report.yml'
    assert main(['check-regular', str(sample), str(presentation), '--report', str(report)]) == EXIT_OK
    assert capsys.readouterr().out.startswith('ok: ')
    data = YAML(typ='safe').load(report)
    assert data['violations'] == 0
    assert data['determinism_violations'] == 0

    output = tmp_path / 'synthesized.ra'
    assert main(['synthesize', str(sample), str(presentation), '-o', str(output)]) == EXIT_OK
    assert len(parse_automaton(output.read_text(encoding='utf-8')).locations) == 3


def test_check_regular_reports_violations(tmp_path, theory, capsys):
    extraction = extract_relations(load('sign_router_upper'), 4, theory)
    merged = extraction.presentation.merged_locations(
        parse_symbolic_word('a [v1 > 0]'), parse_symbolic_word('a [v1 < 0] ; c [v1 + v2 = 0]'),
    )
    (tmp_path / 'sample.txt').write_text(print_sample(extraction.sample), encoding='utf-8')
    (tmp_path / 'presentation.txt').write_text(print_presentation(merged, extraction.sample), encoding='utf-8')

    args = [str(tmp_path / 'sample.txt'), str(tmp_path / 'presentation.txt')]
    assert main(['check-regular', *args]) == EXIT_FAILED
    assert 'Condition 11 (determinism)' in capsys.readouterr().out
    assert main(['synthesize', *args]) == EXIT_FAILED


@pytest.mark.parametrize('mode, depth, expected', [
    ('symbolic', '1', EXIT_FAILED),
    ('data', '2', EXIT_OK),
])
def test_equiv(capsys, mode, depth, expected):
    args = ['equiv', automaton_path('sign_split'), automaton_path('sign_blind'), '--mode', mode, '--depth', depth]
    assert main(args) == expected
    out = capsys.readouterr().out
    assert out.startswith('equal' if expected == EXIT_OK else 'counterexample')


def test_export_smt(capsys):
    assert main(['export-smt', 'x <= p', '--model']) == EXIT_OK
    out = capsys.readouterr().out
    assert '(assert (<= x p))' in out
    assert '(check-sat)' in out
    assert '(get-value (' in out


def test_gen_an(tmp_path):
    output = tmp_path / 'a2.ra'
    assert main(['gen-an', '--n', '2', '-o', str(output)]) == EXIT_OK
    automaton = parse_automaton(output.read_text(encoding='utf-8'))
    assert len(automaton.registers) == 4
    assert main(['gen-an', '--n', '0']) == EXIT_USAGE


def test_pipeline(tmp_path, capsys):
    out = tmp_path / 'monotone'
    assert main(['pipeline', MONOTONE, '--depth', '4', '--out', str(out)]) == EXIT_OK
    for name in ('sample.txt', 'presentation.txt', 'synthesized.ra', 'report.yml'):
        assert (out / name).exists(), name
    report = YAML(typ='safe').load(out / 'report.yml')
    assert report['round_trip'] == 'equal'
    assert report['depth'] == 4
    assert report['violations'] == 0
    assert 'round trip: equal' in capsys.readouterr().out


def test_pipeline_stops_on_nondeterminism(tmp_path):
    assert main(['pipeline', automaton_path('duplicate_guard'), '--out', str(tmp_path)]) == EXIT_FAILED


def test_dot(capsys):
    assert main(['dot', MONOTONE]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith('digraph')
    assert '"q1" -> "q2"' in out


@pytest.mark.parametrize('argv', [
    ['check', 'missing.ra'],
    ['check'],
    ['frobnicate'],
    ['enumerate', MONOTONE, '--depth', '-1'],
    ['--theory', 'nonsense', 'check', MONOTONE],
    ['--theory', 'external', 'check', MONOTONE],
    ['run', MONOTONE, 'a(1'],
    ['export-smt', 'x <='],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_parse_errors_name_the_file(tmp_path, capsys):
    broken = tmp_path / 'broken.ra'
    broken.write_text('alphabet: a\ninitial: q0\nq0 --a[ x <= ]--> q1\n', encoding='utf-8')
    assert main(['check', str(broken)]) == EXIT_USAGE
    assert 'broken.ra: line 3' in capsys.readouterr().err


def test_undecided_enumeration_is_unknown(tmp_path):
    path = tmp_path / 'irrational.ra'
    path.write_text('alphabet: a\ninitial: q0\nq0 --a[ p * p = 2 ]--> q1\n', encoding='utf-8')
    assert main(['enumerate', str(path), '--depth', '1']) == EXIT_UNKNOWN


def test_version(capsys):
    with pytest.raises(SystemExit):
        main(['--version'])
    assert VERSION in capsys.readouterr().out


def test_config_file_sets_the_depth(tmp_path, capsys):
    (tmp_path / 'config.yml').write_text('default_depth: 1\n', encoding='utf-8')
    assert main(['enumerate', automaton_path('sign_split')]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 3
