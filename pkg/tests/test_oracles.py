import itertools
import networkx as nx
import numpy as np
import pytest

from finered import (INF, real, generate, ThreeSumInstance, MinPlusInstance, WeightedDigraph,
                     WeightedTripartiteGraph, OVInstance, SparseGraph, ColoredSparseGraph,
                     EdgeColoredMultigraph, ColorfulBmmInstance, TriCoInstance, StringPair,
                     SetDisjointnessInstance)
from finered.errors import NegativeCycleDetected, NotTripartite
from finered.oracles import (all_nums_3sum, min_plus, apsp_reference, ae_exact_tri, pred_succ_scan,
                             ae_sparse_tri, ae_mono_tri, degeneracy, triangles_by_degeneracy,
                             ae_colorful_sparse_tri, colorful_bmm, distinct_eq_product, tri_co,
                             ov, distinct_hamming_similarity, set_disjointness)

from .fixtures import config, ledger

def _reals(xs):
    return [real(x) for x in xs]

def _matrix(rows):
    return [[INF if x is None else real(x) for x in row] for row in rows]

def test_all_nums_3sum(ledger):
    inst = ThreeSumInstance(_reals([1, 4, -2]), _reals([0, 3, 5]), _reals([-4, 10, -7, 2]))
    assert all_nums_3sum(inst) == [True, False, True, True]
    assert ledger.comparisons > 0

@pytest.mark.parametrize('seed', range(4))
def test_all_nums_3sum_brute_force(config, seed):
    inst = generate('3sum', {'n': 7, 'planted': True}, seed=seed)
    sums = {a.value + b.value for a in inst.A for b in inst.B}
    assert all_nums_3sum(inst) == [-c.value in sums for c in inst.C]

def test_min_plus_ties_and_infinity(ledger):
    A = _matrix([[1, 0], [None, None]])
    B = _matrix([[2, 5], [3, None]])
    values, argmins = min_plus(MinPlusInstance(A, B))
    assert [[v.to_text() for v in row] for row in values] == [['3', '6'], ['inf', 'inf']]
    assert argmins == [[0, 0], [0, 0]]

@pytest.mark.parametrize('seed', range(3))
def test_apsp_against_networkx(config, seed):
    g = generate('digraph', {'n': 6, 'density': 0.5, 'negative': True}, seed=seed)
    G = nx.DiGraph()
    G.add_nodes_from(range(g.n))
    for u in range(g.n):
        for v in range(g.n):
            if not g.W[u][v].is_infinite:
                G.add_edge(u, v, weight=int(g.W[u][v].value))
    want = nx.floyd_warshall(G)
    D = apsp_reference(g)
    for u in range(g.n):
        for v in range(g.n):
            if D[u][v].is_infinite:
                assert want[u][v] == float('inf')
            else:
                assert D[u][v].value == want[u][v]

def test_negative_cycle(config):
    with pytest.raises(NegativeCycleDetected):
        apsp_reference(WeightedDigraph(_matrix([[None, -1], [-1, None]])))

def test_exact_triangle(ledger):
    g = WeightedTripartiteGraph(_matrix([[-5, None], [0, 1]]),
                                _matrix([[2, 3], [None, 1]]),
                                _matrix([[3, 4], [2, -2]]))
    out = ae_exact_tri(g, 'count')
    assert out[(0, 0)].found and out[(0, 0)].count == 2
    assert out[(0, 0)].witness == 0
    assert not out[(0, 1)].found
    assert not out[(1, 0)].found
    assert out[(1, 1)].found and out[(1, 1)].witness == 1

def test_pred_succ_scan(ledger):
    A = _matrix([[0, 5, 2, None]])
    B = _matrix([[1], [1], [1], [0]])
    ps = pred_succ_scan(A, B, _matrix([[3]]))
    assert ps[0][0].pred == 2 and ps[0][0].succ == 1
    ps = pred_succ_scan(A, B, _matrix([[-1]]))
    assert ps[0][0].pred is None and ps[0][0].succ == 0
    ps = pred_succ_scan(A, B, _matrix([[None]]))
    assert ps[0][0] == (None, None)

@pytest.mark.parametrize('seed', range(4))
def test_sparse_triangles_against_networkx(config, seed):
    g = generate('sparse', {'n': 6, 'density': 0.4}, seed=seed)
    G = g.to_networkx()
    out = ae_sparse_tri(g, 'count')
    for e in g.query_edges():
        u, v = g.edges[e]
        common = set(G[u]) & set(G[v])
        assert out[e].found == bool(common)
        assert out[e].count == len(common)
        if common:
            assert out[e].witness in common
    cliques = sorted(tuple(sorted(c)) for c in nx.enumerate_all_cliques(G) if len(c) == 3)
    assert triangles_by_degeneracy(g) == cliques
    D, order = degeneracy(g)
    assert sorted(order) == list(range(g.n))
    assert D == max(nx.core_number(G).values(), default=0)

def test_sparse_count_multiplicity(ledger):
    g = SparseGraph(['x', 'y1', 'y2', 'z'], [(0, 3), (0, 1), (1, 3), (0, 2), (2, 3)],
                    queries=[0], multiplicity=[1, 2, 3, 1, 1])
    assert ae_sparse_tri(g, 'count')[0].count == 7
    assert ae_sparse_tri(g, 'decide')[0].found

def test_mono_triangles():
    g = EdgeColoredMultigraph(3, [(0, 1, 0), (1, 2, 0), (0, 2, 0), (0, 1, 1), (1, 2, 1)])
    out = ae_mono_tri(g)
    assert [out[e].found for e in range(5)] == [True, True, True, False, False]
    assert out[0].witness == 2

def test_colorful_sparse():
    # x - k1 - z and x - k2 - z with colors r, b
    g = SparseGraph(['x', 'k1', 'k2', 'z'], [(0, 3), (0, 1), (1, 3), (0, 2), (2, 3)], queries=[0])
    assert ae_colorful_sparse_tri(ColoredSparseGraph(g, ['!', 'r', 'b', '!'], ['r', 'b'])) == {0: True}
    assert ae_colorful_sparse_tri(ColoredSparseGraph(g, ['!', 'r', 'r', '!'], ['r', 'b'])) == {0: False}

def test_colorful_bmm():
    A = np.array([[1, 1, 0], [1, 0, 1]], dtype=bool)
    B = np.array([[1, 0], [1, 1], [1, 1]], dtype=bool)
    inst = ColorfulBmmInstance(A, B, ['r', 'b', 'b'], ['r', 'b'])
    assert colorful_bmm(inst).tolist() == [[True, False], [True, False]]
    counts = distinct_eq_product(np.array([[1, 2, 2]]), np.array([[1], [2], [2]]))
    assert counts.tolist() == [[2]]

def test_tri_co_tripartite():
    # one triangle (a1, b1, c1); a2 has no triangle
    inst = TriCoInstance(['a1', 'a2', 'b1', 'c1'], [(0, 2), (0, 3), (2, 3), (1, 2)],
                         parts=['A', 'A', 'B', 'C'])
    assert not tri_co(inst)
    assert tri_co(inst, 'acp') == {('a1', 'b1'): True, ('a2', 'b1'): False}
    with pytest.raises(NotTripartite):
        tri_co(TriCoInstance(['a', 'b'], [(0, 1)], parts=['A', 'A']))

def test_tri_co_general():
    inst = TriCoInstance([0, 1, 2, 0], [(0, 1), (1, 2), (0, 2), (1, 3)], variant='general')
    assert tri_co(inst)
    K = TriCoInstance([0, 1, 2, 3], list(itertools.combinations(range(3), 2)), variant='general')
    assert not tri_co(K)
    acp = tri_co(K, 'acp')
    assert acp[(0, 1)] is False
    assert len(acp) == 12

def test_ov():
    assert ov(OVInstance(np.array([[1, 1], [1, 0], [0, 1]], dtype=bool))) == (True, (1, 2))
    assert ov(OVInstance(np.array([[1, 1], [1, 0]], dtype=bool))) == (False, None)
    assert ov(OVInstance(np.zeros((1, 3), dtype=bool))) == (False, None)

def test_strings_and_sets():
    assert distinct_hamming_similarity(StringPair([1, 2, 1, 3], [1, 3])) == [1, 0, 2]
    sets = SetDisjointnessInstance(5, [{0, 1}, {2}, {1, 4}], [(0, 1), (0, 2), (1, 2)])
    assert set_disjointness(sets) == [True, False, True]
