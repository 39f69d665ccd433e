import itertools
import pytest

from finered import ThreeSumInstance, generate, real, compare3, Ordering
from finered.errors import BadBucketCount, QuadBudgetExceeded, ShapeMismatch
from finered.oracles import ae_exact_tri, all_nums_3sum
from finered.red_3sum import (BucketedPair, all_nums_3sum_via_sparse, decode_bucket_triangles,
                              real3sum_to_exact_tri, route_targets, sort_reals, staircase_pairs)

from .fixtures import config, ledger

def _reals(xs):
    return [real(x) for x in xs]

def test_sort_reals(ledger):
    xs = _reals([3, '1/2', -4, 3, 0])
    assert [xs[p].to_text() for p in sort_reals(xs)] == ['-4', '0', '1/2', '3', '3']

def test_bucketed_pair():
    bp = BucketedPair(_reals([5, 1, 3, 2, 4]), _reals([0, -1]), 2)
    assert [[x.to_text() for x in grp] for grp in bp.A] == [['1', '2'], ['3', '4'], ['5']]
    assert bp.A_index == [[1, 3], [2, 4], [0]]
    assert bp.groups == 3
    with pytest.raises(ShapeMismatch):
        BucketedPair(_reals([1]), _reals([1]), 0)

@pytest.mark.parametrize('seed', range(4))
def test_staircase_pairs(config, seed):
    inst = generate('3sum', {'n': 10}, seed=seed)
    bp = BucketedPair(inst.A, inst.B, 3)
    for c in inst.C:
        target = c.neg()
        want = [(i, j) for i in range(len(bp.A)) for j in range(len(bp.B))
                if compare3(bp.lo_A(i), bp.lo_B(j), target) != Ordering.GREATER
                and compare3(bp.hi_A(i), bp.hi_B(j), target) != Ordering.LESS]
        got = staircase_pairs(bp, target)
        assert sorted(got) == sorted(want)
        assert len(got) <= 2 * bp.groups

def test_route_targets(ledger):
    inst = generate('3sum', {'n': 8, 'planted': True}, seed=2)
    bp = BucketedPair(inst.A, inst.B, 2)
    targets = route_targets(bp, inst.C)
    assert {t.q for t in targets} <= set(range(inst.n_hat))
    assert all(t.pred is None and t.succ is None for t in targets)
    assert not ledger.rows[-1].exceeded()

@pytest.mark.parametrize('route', ['witness', 'count'])
@pytest.mark.parametrize('seed', range(3))
def test_all_nums_via_sparse(ledger, seed, route):
    inst = generate('3sum', {'n': 8, 'planted': True}, seed=seed)
    got = all_nums_3sum_via_sparse(inst, 3, seed=seed, route=route)
    assert got == all_nums_3sum(inst)
    assert any(got)
    assert all(not row.exceeded() for row in ledger.rows)
    quad = [r for r in ledger.rows if r.construction == '3sum-quad-graph']
    assert all(r.formulas['edges'] == 'sum|Q| + 2*(n/d)*d^3*levels^2' for r in quad)

@pytest.mark.parametrize('d', [1, 2, 8])
def test_bucket_sizes(ledger, d):
    inst = generate('3sum', {'n': 8, 'planted': True}, seed=7)
    assert all_nums_3sum_via_sparse(inst, d, seed=1) == all_nums_3sum(inst)

def test_repeated_values(ledger):
    inst = ThreeSumInstance(_reals([1, 1, 2, 2]), _reals([0, 0, 3, 3]), _reals([-1, -4, -2, 7]))
    assert all_nums_3sum_via_sparse(inst, 2, seed=5) == [True, True, True, False]

def test_quadruple_budget(ledger, config):
    config.quad_budget = 0
    inst = generate('3sum', {'n': 8, 'planted': True}, seed=0)
    with pytest.raises(QuadBudgetExceeded):
        all_nums_3sum_via_sparse(inst, 4, seed=0)

def test_empty_instance(ledger):
    inst = ThreeSumInstance([], [], [])
    assert all_nums_3sum_via_sparse(inst, 2) == []

@pytest.mark.parametrize('g,eps', [(1, 0.5), (3, 0.0), (3, 0.5), (3, 1.0), (9, 0.5)])
@pytest.mark.parametrize('seed', range(3))
def test_real3sum_to_exact_tri(ledger, seed, g, eps):
    inst = generate('3sum', {'n': 9, 'planted': True}, seed=seed)
    red = real3sum_to_exact_tri(inst, g, eps)
    answers = [ae_exact_tri(t) for t in red.output.targets]
    assert decode_bucket_triangles(inst, red, answers) == all_nums_3sum(inst)
    for target, dec in zip(red.output.targets, red.output.decode):
        assert set(dec) <= set(itertools.product(range(target.ni), range(target.nj)))

def test_all_heavy_pairs_are_solved_directly(ledger):
    inst = generate('3sum', {'n': 9, 'planted': True}, seed=1)
    red = real3sum_to_exact_tri(inst, 3, 0.0)
    assert len(red.output) == 0
    assert sorted(red.partial) == [q for q, hit in enumerate(all_nums_3sum(inst)) if hit]

def test_bad_bucket_count(config):
    inst = generate('3sum', {'n': 4}, seed=0)
    with pytest.raises(BadBucketCount):
        real3sum_to_exact_tri(inst, 0)
    with pytest.raises(BadBucketCount):
        real3sum_to_exact_tri(inst, 5)
