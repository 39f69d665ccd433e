import pytest
from fractions import Fraction

from finered import ComparisonModelViolation, INF, ZERO, Ordering, real, compare3, compare4, tattling
from finered.errors import EqualRanks, NotAMember, NotSeparable
from finered.numeric import (Difference, DyadicInterval, PerturbedReal, RankList, compare_differences,
                             compare_perturbed, covering_halves, half_keys, refined_compare4,
                             separating_interval, untattled)

from .fixtures import config, ledger

def test_parse_and_text():
    assert real('3/4').to_text() == '3/4'
    assert real(-6).to_text() == '-6'
    assert real(' inf ').is_infinite
    assert real(Fraction(4, 2)).to_text() == '2'
    assert real('inf') == INF
    with pytest.raises(ValueError):
        real(True)
    with pytest.raises(ValueError):
        real(1.5)  # type: ignore
    with pytest.raises(ValueError):
        INF.value

def test_compare_counts(ledger):
    assert compare4(real(1), real(2), real(0), real(3)) == Ordering.EQUAL
    assert compare4(real(1), real(2), real(0), real(4)) == Ordering.LESS
    assert compare3(real(5), real(-2), real(2)) == Ordering.GREATER
    assert ledger.comparisons == 3

def test_infinite_sums(ledger):
    assert compare4(INF, ZERO, real(10 ** 9), ZERO) == Ordering.GREATER
    assert compare4(real(1), INF, INF, real(-5)) == Ordering.EQUAL
    assert compare3(real(3), real(4), INF) == Ordering.LESS
    # the refinement orders by the number of infinite terms first
    assert refined_compare4(INF, INF, INF, real(7)) == Ordering.GREATER
    assert refined_compare4(INF, real(1), INF, real(2)) == Ordering.LESS

def test_perturbed(ledger):
    a = PerturbedReal(real(1), 2)
    b = PerturbedReal(real(1), 1)
    z = PerturbedReal(ZERO)
    assert compare_perturbed(a, z, b, z) == Ordering.GREATER
    assert compare_perturbed(PerturbedReal(real(0), 5), z, b, z) == Ordering.LESS

def test_differences(ledger):
    # 5 - 2 < 7 - 3
    x = Difference(real(5), real(2))
    y = Difference(real(7), real(3))
    assert compare_differences(x, y) == Ordering.LESS
    assert compare_differences(y, x) == Ordering.GREATER
    assert compare_differences(Difference(real(4), real(1)), Difference(real(4), real(1), eps=1)) == Ordering.LESS
    assert ledger.comparisons == 3

def test_tattling_real(ledger):
    x = tattling(real(3))
    with pytest.raises(ComparisonModelViolation):
        x == real(3)
    with pytest.raises(ComparisonModelViolation):
        hash(x)
    with pytest.raises(ComparisonModelViolation):
        str(x)
    with pytest.raises(ComparisonModelViolation):
        x.value
    with pytest.raises(ComparisonModelViolation):
        '{}'.format(x)
    assert compare3(x, tattling(real(4)), real(7)) == Ordering.EQUAL
    assert compare4(x, ZERO, tattling(INF), ZERO) == Ordering.LESS
    assert untattled(x.add(tattling(real(2)))) == real(5)
    assert untattled(x.neg()) == real(-3)

def test_rank_list_ties(ledger):
    ranks = RankList([('a', Difference(real(1), ZERO)),
                      ('b', Difference(real(3), real(2))),
                      ('c', Difference(real(5), ZERO)),
                      ('d', Difference(real(-1), ZERO)),
                      ('a', Difference(real(9), ZERO))])
    assert len(ranks) == 3
    assert ranks.rank_of('d') == 0
    assert ranks.rank_of('a') == ranks.rank_of('b') == 1
    assert ranks.rank_of('c') == 2
    assert ranks.universe_log == 2
    assert ranks.levels == 3
    assert 'c' in ranks and 'z' not in ranks
    with pytest.raises(NotAMember):
        ranks.rank_of('z')

def test_rank_list_from_values(ledger):
    ranks = RankList.from_values([7, -2, 3])
    assert [ranks.rank_of(v) for v in (7, -2, 3)] == [2, 0, 1]
    assert RankList([]).universe_log == 0

def _all_intervals(L):
    return [DyadicInterval(s, t, L) for s in range(1, L + 1) for t in range(1 << (L - s))]

def test_dyadic_interval():
    iv = DyadicInterval(2, 1, 3)
    assert (iv.start, iv.stop) == (4, 8)
    assert list(iv.left_half()) == [4, 5]
    assert list(iv.right_half()) == [6, 7]
    assert list(DyadicInterval(0, 3, 3).left_half()) == []
    with pytest.raises(ValueError):
        DyadicInterval(2, 2, 3)

def test_separating_interval():
    L = 3
    for a in range(8):
        for b in range(a + 1, 8):
            iv = separating_interval(a, b, L)
            assert a in iv.left_half()
            assert b in iv.right_half()
            shared = set(x.key() for x in covering_halves(a, L, 'left')) & \
                set(x.key() for x in covering_halves(b, L, 'right'))
            assert shared == {iv.key()}
    with pytest.raises(EqualRanks):
        separating_interval(2, 2, L)
    with pytest.raises(NotSeparable):
        separating_interval(5, 1, L)

def test_covering_halves():
    L = 3
    for r in range(8):
        for side in ('left', 'right'):
            want = sorted(iv.key() for iv in _all_intervals(L)
                          if r in (iv.left_half() if side == 'left' else iv.right_half()))
            got = sorted(iv.key() for iv in covering_halves(r, L, side))
            assert got == want
            assert sorted(half_keys(r, L, side)) == want
    assert [iv.key() for iv in covering_halves(3, 3, 'left')] == [(3, 0)]
    assert covering_halves(0, 0, 'left') == []
