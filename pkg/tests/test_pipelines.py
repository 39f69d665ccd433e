import json
import pytest

from finered import generate, local_ledger, real
from finered.errors import BadParams, UnknownPipeline
from finered.pipelines import PipelineParams, canonical, corrupt, get_pipeline, pipeline_ids, run

from .fixtures import config, ledger

PIPELINES = ['apsp-sparse', 'exacttri-sparse', 'exacttri-count', '3sum-sparse', '3sum-count',
             '3sum-exacttri', 'mono-overlay', 'mono-acptrico', 'mono-intexact', 'ov-cbmm', 'ov-trico',
             'minplus-cbmm', 'cbmm-acptrico', 'cbmm-colorsparse', 'cbmm-strings', 'trico-tripartite',
             'trico-light', 'light-star2']

def _sample(name, seed):
    kind, params = get_pipeline(name).sample
    return generate(kind, params, seed=seed)

def test_registry():
    assert pipeline_ids() == sorted(PIPELINES)
    with pytest.raises(UnknownPipeline):
        get_pipeline('apsp-dense')

@pytest.mark.parametrize('seed', range(3))
@pytest.mark.parametrize('name', PIPELINES)
def test_pipeline_agrees(ledger, name, seed):
    got, want = run(name, _sample(name, seed), PipelineParams(seed=seed))
    assert got == want

def _size(seed):
    return 32 if seed % 10 == 9 else 16 if seed % 3 == 0 else 8

# per pipeline: (n, d, f, p, planted) -> (kind, generator params, pipeline params)
SWEEPS = {
    'apsp-sparse': lambda n, d, f, p, planted: ('minplus', {'n': n, 'd': 4}, {'d': d}),
    'exacttri-sparse': lambda n, d, f, p, planted: ('exacttri', {'n': n, 'planted': planted}, {'d': d}),
    'exacttri-count': lambda n, d, f, p, planted: ('exacttri', {'n': n, 'planted': planted}, {'d': d}),
    '3sum-sparse': lambda n, d, f, p, planted: ('3sum', {'n': n, 'planted': planted}, {'d': d}),
    '3sum-count': lambda n, d, f, p, planted: ('3sum', {'n': n, 'planted': planted}, {'d': d}),
    '3sum-exacttri': lambda n, d, f, p, planted: ('3sum', {'n': n, 'planted': planted}, {}),
    'mono-overlay': lambda n, d, f, p, planted: ('bundle', {'n': n, 'count': 3}, {}),
    'mono-acptrico': lambda n, d, f, p, planted: ('mono', {'n': n // 4 + 1, 'colors': 3}, {}),
    'mono-intexact': lambda n, d, f, p, planted: ('mono', {'n': n // 4 + 1, 'colors': 3}, {}),
    'ov-cbmm': lambda n, d, f, p, planted: ('ov', {'n': n, 'f': f, 'planted': planted}, {'d': d}),
    'ov-trico': lambda n, d, f, p, planted: ('ov', {'n': n, 'f': f, 'planted': planted}, {'d': d}),
    'minplus-cbmm': lambda n, d, f, p, planted: ('minplus', {'n': n, 'd': d}, {}),
    'cbmm-acptrico': lambda n, d, f, p, planted: ('cbmm', {'n1': n // 4, 'inner': 3 * p, 'colors': 3}, {'p': p}),
    'cbmm-colorsparse': lambda n, d, f, p, planted: ('cbmm', {'n1': n // 4, 'inner': n // 4 + 2, 'colors': 3}, {}),
    'cbmm-strings': lambda n, d, f, p, planted: ('cbmm', {'n1': n // 8 + 1, 'inner': n // 8 + 2, 'colors': 2}, {}),
    'trico-tripartite': lambda n, d, f, p, planted: ('trico', {'variant': 'general', 'n': n, 'colors': 4,
                                                                'density': 0.5}, {}),
    'trico-light': lambda n, d, f, p, planted: ('trico', {'variant': 'tripartite', 'n': n // 2, 'colors': 3,
                                                           'density': 0.6}, {}),
    'light-star2': lambda n, d, f, p, planted: ('trico', {'variant': 'light', 'colors': n // 8 + 1, 'p': p}, {}),
}

@pytest.mark.parametrize('name', PIPELINES)
def test_pipeline_sweep(config, name):
    assert set(SWEEPS) == set(PIPELINES)
    for seed in range(50):
        n = _size(seed)
        kind, params, extra = SWEEPS[name](n, (2, 4)[seed % 2], (4, 8)[seed // 2 % 2], 1 + seed % 3, seed % 3 != 2)
        inst = generate(kind, params, seed=seed)
        with local_ledger(name) as lg:
            got, want = run(name, inst, PipelineParams(seed=seed, **extra))
        assert got == want, (seed, params, extra)
        assert all(not row.exceeded() for row in lg.rows), seed

@pytest.mark.parametrize('name', PIPELINES)
def test_reduce_step(ledger, name):
    p = get_pipeline(name)
    inst = _sample(name, 1)
    red = p.reduce(inst, PipelineParams(seed=1))
    json.dumps(red.decode)
    if red.oracle is not None:
        answers = [red.oracle(t) for t in red.targets]
        assert canonical(red.finish(answers)) == canonical(p.reference(inst))

@pytest.mark.parametrize('name', PIPELINES)
def test_audit(ledger, name):
    got, want = run(name, _sample(name, 2), PipelineParams(seed=2), audit=True)
    assert got == want

def test_trico_tripartite_reads_both_forms(ledger):
    inst = generate('trico', {'variant': 'tripartite', 'n': 5, 'colors': 2, 'density': 0.8}, seed=3)
    got, want = run('trico-tripartite', inst)
    assert got == want

@pytest.mark.parametrize('name', ['apsp-sparse', '3sum-sparse', 'ov-cbmm', 'trico-light'])
def test_fault_is_detected(ledger, name):
    got, want = run(name, _sample(name, 0), fault=True)
    assert got != want

def test_wrong_source_kind(ledger):
    inst = generate('ov', {'n': 4, 'f': 3}, seed=0)
    with pytest.raises(BadParams):
        run('3sum-sparse', inst)
    with pytest.raises(BadParams):
        get_pipeline('minplus-cbmm').reduce(generate('digraph', {'n': 3}, seed=0), PipelineParams())

def test_explicit_params(ledger):
    inst = _sample('3sum-exacttri', 4)
    for g, eps in [(1, 0.5), (3, 0.0), (3, 1.0)]:
        got, want = run('3sum-exacttri', inst, PipelineParams(g=g, eps=eps))
        assert got == want
    inst = _sample('minplus-cbmm', 4)
    for threshold in (0, 1000):
        got, want = run('minplus-cbmm', inst, PipelineParams(threshold=threshold))
        assert got == want
    inst = _sample('apsp-sparse', 4)
    got, want = run('apsp-sparse', inst, PipelineParams(d=2))
    assert got == want

def test_digraph_apsp(ledger):
    inst = generate('digraph', {'n': 5}, seed=6)
    got, want = run('apsp-sparse', inst, PipelineParams(d=2, seed=6))
    assert got == want

def test_canonical():
    assert canonical(real('1/2')) == '1/2'
    assert canonical({(1, 2): True, (0, 3): False}) == [[[0, 3], False], [[1, 2], True]]
    assert canonical((True, [real(3), None])) == [True, ['3', None]]
    with pytest.raises(TypeError):
        canonical(object())

def test_corrupt():
    assert corrupt(True) == (False, True)
    assert corrupt(['inf', 2]) == (['inf+1', 2], True)
    assert corrupt([[], [4]]) == ([[], [5]], True)
    assert corrupt([]) == ([], False)
    assert corrupt(None) == (None, False)
