import json

import pytest

from app.cli import EXIT_INVALID, EXIT_OK, EXIT_UNDECIDED, main
from utils import database


@pytest.fixture(autouse=True)
def archive(tmp_path, monkeypatch):
    path = tmp_path / 'runs.db'
    monkeypatch.setenv('COGSYN_DB_PATH', str(path))
    return path


def test_run_then_verify(tmp_path, capsys):
    out = tmp_path / 'out'
    assert main(['run', 'complementary-pair', '--out-dir', str(out), '--no-archive']) == EXIT_OK
    printed = capsys.readouterr().out
    assert 'cog-syn[idea_linker|fact_linker]' in printed
    assert (out / 'manifest.json').exists()
    assert main(['verify', str(out)]) == EXIT_OK

    with open(out / 'synergy.txt', 'a', encoding='utf-8') as handle:
        handle.write('# edited\n')
    assert main(['verify', str(out / 'manifest.json')]) == EXIT_UNDECIDED
    assert 'synergy.txt' in capsys.readouterr().out


def test_verify_empty_directory(tmp_path, capsys):
    assert main(['verify', str(tmp_path)]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert 'manifest.json' in err
    assert 'metrics.csv' in err


def test_run_records_archive(tmp_path):
    out = tmp_path / 'out'
    assert main(['run', 'self-vs-self', '--out-dir', str(out)]) == EXIT_OK
    records = database.load_run_records()
    assert list(records['scenario']) == ['self-vs-self']
    assert records.iloc[0]['out_dir'] == str(out)


def test_seed_override_and_gnuplot(tmp_path):
    out = tmp_path / 'out'
    argv = ['run', 'complementary-pair', '--out-dir', str(out), '--seed', '5', '--emit-gnuplot',
            '--partition-cells', '4', '--no-archive']
    assert main(argv) == EXIT_OK
    manifest = json.loads((out / 'manifest.json').read_text(encoding='utf-8'))
    assert manifest['overrides'] == {'partition_cells': 4, 'seed': 5}
    assert manifest['seeds'] != {'facts-a': 13, 'facts-b': 14, 'ideas-a': 11, 'ideas-b': 12}
    assert (out / 'gnuplot' / 'synergy-idea_linker-fact_linker.dat').exists()
    assert main(['verify', str(out), '--rerun']) == EXIT_OK


def test_invalid_scenario_lists_fields(tmp_path, capsys):
    broken = tmp_path / 'broken.toml'
    broken.write_text('name = "broken"\nticks = 3\n', encoding='utf-8')
    assert main(['run', str(broken), '--out-dir', str(tmp_path / 'out'), '--no-archive']) == EXIT_INVALID
    err = capsys.readouterr().err
    assert 'environment' in err
    assert 'situations' in err
    assert not (tmp_path / 'out').exists()


def test_missing_scenario_file(tmp_path):
    assert main(['run', str(tmp_path / 'nope.toml'), '--no-archive']) == EXIT_INVALID


def test_bad_partition_cells(tmp_path):
    argv = ['run', 'complementary-pair', '--out-dir', str(tmp_path), '--partition-cells', '0', '--no-archive']
    assert main(argv) == EXIT_INVALID


def test_demo_diagrams(capsys):
    assert main(['demo-diagrams']) == EXIT_OK
    printed = capsys.readouterr().out
    assert '间接 3' in printed and '直接 10' in printed and '差值 7' in printed
    assert main(['demo-diagrams', '--equal-costs']) == EXIT_OK
    assert '不等式不成立' in capsys.readouterr().out


def test_census_command(tmp_path, capsys):
    chain = "0 NODE state\n1 NODE state\n2 LINK transition (0,1)\n"
    first, second = tmp_path / 'a.txt', tmp_path / 'b.txt'
    first.write_text(chain, encoding='utf-8')
    second.write_text(chain, encoding='utf-8')
    assert main(['census', str(first), str(second), '--size-bound', '2']) == EXIT_OK
    assert 'n_hom=' in capsys.readouterr().out


def test_census_unreadable_file(tmp_path):
    assert main(['census', str(tmp_path / 'a.txt'), str(tmp_path / 'b.txt')]) == EXIT_INVALID
