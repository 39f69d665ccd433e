import pytest

from finered import INF, generate, local_ledger, real, compare4, Ordering
from finered.errors import OracleProtocol
from finered.oracles import EdgeRecord, ae_exact_tri, pred_succ_scan
from finered.red_apsp import round_budget
from finered.red_exacttri import (COUNT_MODES, PredSuccState, ae_exact_tri_via_sparse, between_counts,
                                  build_exacttri_graphs, count_below, is_between, pred_succ,
                                  solve_variant2, variant2_via_counts)

from .fixtures import config, ledger

OPS = {
    'less': lambda o: o == Ordering.LESS,
    'leq': lambda o: o != Ordering.GREATER,
    'greater': lambda o: o == Ordering.GREATER,
    'geq': lambda o: o != Ordering.LESS,
}

def _minplus(seed, n=4, d=3, inf_rate=0.2):
    inst = generate('minplus', {'n': n, 'd': d, 'inf_rate': inf_rate, 'span': 6}, seed=seed)
    return inst.A, inst.B

def _targets(seed, n, span=12):
    inst = generate('minplus', {'n': n, 'span': span, 'inf_rate': 0.1}, seed=seed + 100)
    return inst.A

def _sum_text(A, B, i, j, k):
    return None if k is None else A[i][k].add(B[k][j]).to_text()

def _same_pred_succ(A, B, state, scan):
    for i, row in enumerate(scan):
        for j, want in enumerate(row):
            assert _sum_text(A, B, i, j, state.pred[i][j]) == _sum_text(A, B, i, j, want.pred)
            assert _sum_text(A, B, i, j, state.succ[i][j]) == _sum_text(A, B, i, j, want.succ)

@pytest.mark.parametrize('route', ['witness', 'count'])
@pytest.mark.parametrize('seed', range(3))
def test_pred_succ(ledger, seed, route):
    A, B = _minplus(seed)
    C = _targets(seed, len(A))
    state = pred_succ(A, B, C, seed=seed, route=route)
    _same_pred_succ(A, B, state, pred_succ_scan(A, B, C))

def test_pred_succ_unknown_route(ledger):
    A, B = _minplus(0)
    with pytest.raises(ValueError):
        pred_succ(A, B, _targets(0, len(A)), route='guess')

def test_inactive_pairs_stay_empty(ledger):
    A, B = _minplus(1, inf_rate=0.0)
    C = [[real(0)] * len(B[0]) for _ in A]
    C[0] = [INF] * len(B[0])
    state = pred_succ(A, B, C, seed=1)
    assert all(p is None for p in state.pred[0]) and all(s is None for s in state.succ[0])
    assert (0, 0) not in state.active()

@pytest.mark.parametrize('mode', COUNT_MODES)
def test_count_below(ledger, mode):
    A, B = _minplus(5, n=5, d=4)
    d = len(B)
    k = [[(i * 3 + j) % d for j in range(len(B[0]))] for i in range(len(A))]
    counts = count_below(A, B, k, mode=mode)
    for i, row in enumerate(counts):
        for j, c in enumerate(row):
            kk = k[i][j]
            want = sum(1 for kp in range(d) if OPS[mode](compare4(A[i][kp], B[kp][j], A[i][kk], B[kk][j])))
            assert c == want

def test_count_below_candidates(ledger):
    A, B = _minplus(6, n=5, d=4, inf_rate=0.0)
    k = [[0] * len(B[0]) for _ in A]
    counts = count_below(A, B, k, mode='geq', candidates=[1, 3], pairs=[(2, 2)])
    want = sum(1 for kp in (1, 3) if compare4(A[2][kp], B[kp][2], A[2][0], B[0][2]) != Ordering.LESS)
    assert counts[2][2] == want

def _one_sided(A, B, side):
    n, m = len(A), len(B[0])
    C = [[real(0)] * m for _ in range(n)]
    fixed = [[0] * m for _ in range(n)]
    return PredSuccState(C, pred=fixed) if side == 'pred' else PredSuccState(C, succ=fixed)

@pytest.mark.parametrize('side', ['pred', 'succ'])
def test_between_counts(ledger, side):
    A, B = _minplus(7, n=4, d=4, inf_rate=0.0)
    state = _one_sided(A, B, side)
    subset = [0, 2, 3]
    counts = between_counts(A, B, state, subset)
    for (i, j), c in counts.items():
        assert c == sum(1 for k2 in subset if is_between(A, B, state, i, j, k2))

@pytest.mark.parametrize('side', ['pred', 'succ'])
def test_between_index_recovery(ledger, side):
    A, B = _minplus(8, n=4, d=3, inf_rate=0.0)
    state = _one_sided(A, B, side)
    via_counts = variant2_via_counts(A, B, state, seed=3)
    via_witness = solve_variant2(A, B, state)
    for i in range(len(A)):
        for j in range(len(B[0])):
            exists = any(is_between(A, B, state, i, j, k2) for k2 in range(len(B)))
            assert (via_counts[i][j] is not None) == exists
            assert (via_witness[i][j] is not None) == exists
            if exists:
                assert is_between(A, B, state, i, j, via_counts[i][j])
                assert is_between(A, B, state, i, j, via_witness[i][j])

def test_unbounded_state_skips_infinite_sums(ledger):
    A, B = _minplus(11, n=4, d=3, inf_rate=0.0)
    A[0] = [INF] * len(B)
    B[1] = [INF] * len(B[0])
    state = PredSuccState([[real(0)] * len(B[0]) for _ in A])
    got = solve_variant2(A, B, state)
    assert got[0] == [None] * len(B[0])
    for i in range(1, len(A)):
        for j in range(len(B[0])):
            assert got[i][j] is not None and got[i][j] != 1
            assert is_between(A, B, state, i, j, got[i][j])

def test_planted_exact_triangles_with_gaps(ledger):
    g = generate('exacttri', {'n': 6, 'planted': True}, seed=0)
    want = {key: rec.found for key, rec in ae_exact_tri(g).items()}
    assert ae_exact_tri_via_sparse(g, 2, seed=0) == want
    assert ae_exact_tri_via_sparse(g, 3, seed=1, route='witness') == want

def test_bad_between_witness(ledger):
    A, B = _minplus(9, inf_rate=0.0)
    state = _one_sided(A, B, 'pred')

    def lying(g):
        x = g.nodes_in('x')[0]
        return {e: EdgeRecord(True, 1, x) for e in g.query_edges()}

    with pytest.raises(OracleProtocol):
        solve_variant2(A, B, state, lying)

def test_graph_count_is_bounded(ledger):
    A, B = _minplus(10, n=6, d=3)
    C = _targets(10, 6)
    scan = pred_succ_scan(A, B, C)
    state = PredSuccState(C, [[p.pred for p in row] for row in scan], [[p.succ for p in row] for row in scan])
    build_exacttri_graphs(A, B, state)
    assert all(not row.exceeded() for row in ledger.rows)
    counts = {r.construction: r for r in ledger.rows if r.construction.endswith('-graphs')}
    assert counts['exacttri-graphs'].bounds['graphs'] == 2 * 3 * 3
    assert 'exacttri-open-graphs' in counts

def test_open_graph_count_is_bounded(ledger):
    A, B = _minplus(12, n=6, d=2, inf_rate=0.1)
    C = _targets(12, 6)
    build_exacttri_graphs(A, B, PredSuccState(C))
    assert all(not row.exceeded() for row in ledger.rows)

@pytest.mark.parametrize('route', ['witness', 'count'])
@pytest.mark.parametrize('seed', range(3))
def test_exact_triangle_via_sparse(ledger, seed, route):
    g = generate('exacttri', {'n': 4, 'planted': True}, seed=seed)
    got = ae_exact_tri_via_sparse(g, 2, seed=seed, route=route)
    want = ae_exact_tri(g)
    assert got == {key: rec.found for key, rec in want.items()}
    assert any(got.values())

@pytest.mark.parametrize('block', range(4))
def test_pred_succ_rounds(config, block):
    budget = round_budget(16)
    for seed in range(block * 50, block * 50 + 50):
        A, B = _minplus(seed, n=16, d=4)
        C = _targets(seed, 16)
        route = 'witness' if seed % 2 == 0 else 'count'
        with local_ledger('rounds') as lg:
            state = pred_succ(A, B, C, seed=seed, route=route)
        _same_pred_succ(A, B, state, pred_succ_scan(A, B, C))
        assert lg.stats.get('max_rounds', 0) <= budget
        assert 'restarts' not in lg.stats
