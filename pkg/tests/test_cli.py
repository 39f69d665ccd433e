import argparse
import json
import os
import pytest

from finered import MinPlusInstance, real, serialize
from finered.cli import (EXIT_BUDGET, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, cl_account, cl_gen, cl_reduce,
                         cl_verify, cmd_account, cmd_gen, cmd_reduce, cmd_verify, format_account,
                         parse_params, read_ledger)
from finered.errors import MissingLedger, UnknownPipeline
from finered.pipelines import PipelineParams

from .fixtures import config, workdir

def _exit_code(fn, argv):
    with pytest.raises(SystemExit) as e:
        fn(argv)
    return e.value.code

def test_parse_params():
    assert parse_params(['n=4', 'planted=true', 'variant=light', 'density=0.5']) == \
        {'n': 4, 'planted': True, 'variant': 'light', 'density': 0.5}
    with pytest.raises(argparse.ArgumentTypeError):
        parse_params(['n'])

def test_gen(workdir, config, capsys):
    inst = cmd_gen('3sum', {'n': 5}, seed=3, out='a.json')
    with open('a.json') as f:
        assert f.read() == serialize(inst)
    cmd_gen('3sum', {'n': 5}, seed=3)
    doc = json.loads(capsys.readouterr().out)
    assert doc['kind'] == '3sum' and doc['payload'] == inst.to_payload()

def test_reduce(workdir, config):
    cmd_gen('3sum', {'n': 8, 'planted': True}, seed=1, out='src.json')
    paths = cmd_reduce('3sum-sparse', 'src.json', PipelineParams(seed=1), 'out1', 'ledger.jsonl')
    assert os.path.basename(paths[-1]) == 'decode.json'
    with open(paths[-1]) as f:
        doc = json.load(f)
    assert doc['pipeline'] == '3sum-sparse'
    assert doc['targets'] == [os.path.basename(p) for p in paths[:-1]]
    again = cmd_reduce('3sum-sparse', 'src.json', PipelineParams(seed=1), 'out2')
    for a, b in zip(paths, again):
        with open(a) as fa, open(b) as fb:
            assert fa.read() == fb.read()
    rows = read_ledger('ledger.jsonl')
    assert rows[-1].construction == 'summary'
    assert any(r.construction == 'reduce' for r in rows)

def test_reduce_one_shot(workdir, config):
    cmd_gen('ov', {'n': 8, 'f': 4}, seed=0, out='ov.json')
    paths = cmd_reduce('ov-cbmm', 'ov.json', PipelineParams(), 'out')
    assert [os.path.basename(p) for p in paths] == ['target-000.json', 'decode.json']
    with open(paths[0]) as f:
        assert json.load(f)['kind'] == 'cbmm'

def test_verify(workdir, config):
    report = cmd_verify('3sum-sparse', trials=3, ledger_path='ledger.jsonl')
    assert report.passed and report.failures == 0
    assert [t.seed for t in report.trials] == [0, 1, 2]
    groups = cmd_account('ledger.jsonl')
    assert list(groups) == ['3sum-sparse']
    assert all(not line.exceeded for line in groups['3sum-sparse'])
    text = format_account(groups)
    assert text.startswith('== 3sum-sparse') and 'staircase' in text

def test_verify_without_trials(config):
    report = cmd_verify('ov-cbmm', trials=0)
    assert report.passed and not report.trials

def test_verify_fault_shrinks(workdir, config):
    report = cmd_verify('ov-cbmm', trials=2, fault=True)
    assert not report.passed and report.failures == 2
    assert report.shrunk_params['n'] < 8
    assert json.loads(report.counterexample)['kind'] == 'ov'

def test_verify_fixed_instance(workdir, config):
    cmd_gen('ov', {'n': 6, 'f': 3}, seed=4, out='ov.json')
    report = cmd_verify('ov-trico', 'ov.json', trials=2)
    assert report.passed
    report = cmd_verify('ov-trico', 'ov.json', trials=1, fault=True)
    assert not report.passed and report.shrunk_params is None
    assert json.loads(report.counterexample)['payload'] == json.loads(open('ov.json').read())['payload']

def test_unknown_pipeline(config):
    with pytest.raises(UnknownPipeline):
        cmd_verify('no-such-pipeline')

def test_read_ledger(workdir):
    with pytest.raises(MissingLedger):
        read_ledger('missing.jsonl')
    with open('empty.jsonl', 'w'):
        pass
    with pytest.raises(MissingLedger):
        read_ledger('empty.jsonl')
    with open('junk.jsonl', 'w') as f:
        f.write('not json\n')
    with pytest.raises(MissingLedger):
        read_ledger('junk.jsonl')

def test_command_lines(workdir, config):
    assert _exit_code(cl_gen, ['3sum', 'n=6', 'planted=true', '--seed', '2', '-o', 'src.json']) == EXIT_OK
    assert _exit_code(cl_reduce, ['3sum-count', '-i', 'src.json', '-o', 'out',
                                  '--ledger', 'ledger.jsonl']) == EXIT_OK
    assert os.path.exists(os.path.join('out', 'decode.json'))
    assert _exit_code(cl_verify, ['3sum-sparse', 'n=5', '--trials', '2', '--ledger', 'ledger.jsonl']) == EXIT_OK
    assert _exit_code(cl_account, ['ledger.jsonl']) == EXIT_OK
    assert _exit_code(cl_verify, ['ov-cbmm', '--trials', '1', '--fault', '--ledger', 'ledger.jsonl']) \
        == EXIT_MISMATCH
    assert _exit_code(cl_verify, ['no-such-pipeline', '--ledger', 'ledger.jsonl']) == EXIT_USAGE
    assert _exit_code(cl_account, ['missing.jsonl']) == EXIT_USAGE

def test_budget_exit_code(workdir, config):
    config.c_iter = 0
    config.c_retry = 1
    inst = MinPlusInstance([[real(0), real(9)], [real(9), real(0)]],
                           [[real(0), real(0)], [real(0), real(0)]])
    with open('tight.json', 'w') as f:
        f.write(serialize(inst))
    assert _exit_code(cl_verify, ['apsp-sparse', '-i', 'tight.json', '--trials', '1',
                                  '--ledger', 'ledger.jsonl']) == EXIT_BUDGET
