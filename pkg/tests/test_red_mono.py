import pytest

from finered import EdgeColoredMultigraph, SparseGraph, generate
from finered.errors import NotTripartite, ParallelEdges, TooManyColors, TooManyNodes
from finered.oracles import ae_exact_tri, ae_mono_tri, ae_sparse_tri, tri_co
from finered.red_mono import (behrend_set, behrend_size, decode_acp, decode_overlay, is_progression_free,
                              mono_to_acp_trico_light, mono_to_int_exact_tri, overlay, query_edges)

from .fixtures import config, ledger

def _mono_truth(g):
    found = ae_mono_tri(g)
    return {e: found[e].found for e in query_edges(g)}

@pytest.mark.parametrize('seed', range(4))
def test_overlay(ledger, seed):
    bundle = generate('bundle', {'n': 6, 'count': 3, 'density': 0.6}, seed=seed)
    ov = overlay(bundle.graphs, seed=seed)
    assert ov.graph.m == sum(g.m for g in bundle.graphs)
    assert ov.graph.colors() == sorted({i for i, g in enumerate(bundle.graphs) if g.m})
    got = decode_overlay(bundle.graphs, ov, ae_mono_tri(ov.graph))
    want = [{e: rec.found for e, rec in ae_sparse_tri(g).items()} for g in bundle.graphs]
    assert got == want

def test_overlay_too_small(ledger):
    g = SparseGraph([0, 1, 2], [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(TooManyNodes):
        overlay([g], n=2)

@pytest.mark.parametrize('seed', range(4))
def test_mono_to_acp_trico(ledger, seed):
    g = generate('mono', {'n': 3, 'colors': 3, 'density': 0.8}, seed=seed)
    red = mono_to_acp_trico_light(g)
    assert red.instance.variant == 'light'
    assert max(red.instance.color_frequency().values()) <= red.instance.p
    assert decode_acp(red, tri_co(red.instance, 'acp')) == _mono_truth(g)

def test_missing_apex_edge_is_covered(ledger):
    parts = ['I', 'J', 'K', 'K']
    mono = EdgeColoredMultigraph(4, [(0, 1, 0), (0, 2, 0), (1, 2, 0), (0, 3, 0)], parts=parts)
    red = mono_to_acp_trico_light(mono)
    assert decode_acp(red, tri_co(red.instance, 'acp')) == {0: True}
    # node 3 has no J-side edge: it must not look like an uncovered apex
    gap = EdgeColoredMultigraph(4, [(0, 1, 0), (0, 3, 0), (0, 2, 1), (1, 2, 0)], parts=parts)
    red = mono_to_acp_trico_light(gap)
    assert decode_acp(red, tri_co(red.instance, 'acp')) == {0: False}

@pytest.mark.parametrize('seed', range(4))
def test_mono_to_int_exact_tri(ledger, seed):
    g = generate('mono', {'n': 3, 'colors': 4, 'density': 0.8}, seed=seed)
    red = mono_to_int_exact_tri(g)
    assert is_progression_free(list(red.encoding.values()))
    assert len(set(red.encoding.values())) == len(red.encoding)
    exact = ae_exact_tri(red.graph)
    assert {e: exact[cell].found for cell, e in red.edges.items()} == _mono_truth(g)

def test_too_many_colors(ledger, config):
    config.max_universe = 4
    mono = EdgeColoredMultigraph(5, [(0, 1, 0), (0, 2, 1), (0, 3, 2), (0, 4, 3), (1, 2, 4)],
                                 parts=['I', 'J', 'K', 'K', 'K'])
    with pytest.raises(TooManyColors):
        mono_to_int_exact_tri(mono)

def test_bad_shapes(ledger):
    with pytest.raises(NotTripartite):
        mono_to_acp_trico_light(EdgeColoredMultigraph(3, [(0, 1, 0)]))
    with pytest.raises(NotTripartite):
        mono_to_int_exact_tri(EdgeColoredMultigraph(2, [(0, 1, 0)], parts=['I', 'I']))
    with pytest.raises(ParallelEdges):
        mono_to_acp_trico_light(EdgeColoredMultigraph(3, [(0, 1, 0), (1, 0, 1)], parts=['I', 'J', 'K']))

@pytest.mark.parametrize('N', [1, 2, 3, 5, 9, 10, 28, 64, 200, 256, 1024, 4096])
def test_behrend_set(N):
    S = behrend_set(N)
    assert S and all(0 <= x < N for x in S)
    assert is_progression_free(sorted(S))
    assert behrend_size(N) == len(S)
    members = set(S)
    assert len(members) == len(S)
    for x in S:
        for y in S:
            if x < y:
                assert 2 * y - x not in members, (x, y)

def test_behrend_grows():
    assert behrend_size(200) >= behrend_size(28) >= 4

def test_is_progression_free():
    assert is_progression_free([0, 1, 3, 4])
    assert not is_progression_free([0, 2, 4])
    assert not is_progression_free([5, 1, 3])
    assert is_progression_free([])
    with pytest.raises(ValueError):
        behrend_set(0)

def test_mono_to_int_exact_tri_sweep(ledger):
    for seed in range(50):
        n = (2, 3, 4)[seed % 3]
        colors = 1 + seed % 6
        g = generate('mono', {'n': n, 'colors': colors, 'density': 0.7}, seed=seed)
        red = mono_to_int_exact_tri(g)
        row = ledger.rows[-1]
        assert row.construction == 'mono-intexact' and row.measured['colors'] <= row.measured['set']
        exact = ae_exact_tri(red.graph)
        assert {e: exact[cell].found for cell, e in red.edges.items()} == _mono_truth(g), seed
