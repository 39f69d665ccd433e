'''
3SUM through all-edges sparse triangle detection (bucketed pairs,
staircase routing, quadruple and pair graphs) and the bucketing reduction
to exact triangle
'''

from typing import Dict, Hashable, List, NamedTuple, Optional, Sequence, Set, Tuple
import functools
import itertools
import logging
import math
from collections import defaultdict

import numpy as np

from .errors import BadBucketCount, OracleProtocol, QuadBudgetExceeded, ShapeMismatch
from .instances import SparseGraph, SparseGraphBuilder, ThreeSumInstance, WeightedTripartiteGraph
from .ledger import current_ledger
from .numeric import (INF, ZERO, Difference, DyadicInterval, Ordering, RankList, RestrictedReal,
                      compare3, compare4, half_keys)
from .red_apsp import (ReductionOutput, RoundBudgetOverrun, SparseOracle, count_oracle, las_vegas,
                       round_budget, witness_oracle)
from .utils import FineredConfig, ceil_div, get_config

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

def sort_reals(xs: Sequence[RestrictedReal]) -> List[int]:
    '''indices of xs in increasing order'''
    return sorted(range(len(xs)), key=functools.cmp_to_key(
        lambda p, q: int(compare4(xs[p], ZERO, xs[q], ZERO))))

def _buckets(xs: Sequence[RestrictedReal], size: int) -> Tuple[List[List[RestrictedReal]], List[List[int]]]:
    order = sort_reals(xs)
    idx = [order[s:s + size] for s in range(0, len(order), size)]
    return [[xs[p] for p in grp] for grp in idx], idx

class BucketedPair:
    '''sorted A and B cut into buckets of at most d values'''
    def __init__(self, A: Sequence[RestrictedReal], B: Sequence[RestrictedReal], d: int):
        if d < 1:
            raise ShapeMismatch(f'bucket size {d} must be positive')
        self.d = d
        self.A, self.A_index = _buckets(A, d)
        self.B, self.B_index = _buckets(B, d)

    @property
    def groups(self) -> int:
        return max(len(self.A), len(self.B))

    def lo_A(self, i: int) -> RestrictedReal:
        return self.A[i][0]

    def hi_A(self, i: int) -> RestrictedReal:
        return self.A[i][-1]

    def lo_B(self, j: int) -> RestrictedReal:
        return self.B[j][0]

    def hi_B(self, j: int) -> RestrictedReal:
        return self.B[j][-1]

    def cell_sum(self, i: int, j: int, cell: Cell) -> Tuple[RestrictedReal, RestrictedReal]:
        return self.A[i][cell[0]], self.B[j][cell[1]]

def staircase_pairs(bp: BucketedPair, c: RestrictedReal) -> List[Tuple[int, int]]:
    '''
    bucket pairs (i,j) with min A_i + min B_j <= c <= max A_i + max B_j,
    walked with a pointer into B that only moves down
    '''
    out = []
    top = len(bp.B) - 1
    for i in range(len(bp.A)):
        while top >= 0 and compare3(bp.lo_A(i), bp.lo_B(top), c) == Ordering.GREATER:
            top -= 1
        if top < 0:
            break
        j = top
        while j >= 0 and compare3(bp.hi_A(i), bp.hi_B(j), c) != Ordering.LESS:
            out.append((i, j))
            j -= 1
    return out

class RoutedTarget:
    '''one target c routed to bucket pair (i,j); pred / succ are cells or None'''
    __slots__ = ('q', 'i', 'j', 'c', 'pred', 'succ')

    def __init__(self, q: int, i: int, j: int, c: RestrictedReal):
        self.q = q
        self.i = i
        self.j = j
        self.c = c
        self.pred: Optional[Cell] = None
        self.succ: Optional[Cell] = None

    def quad(self) -> Tuple[Optional[Cell], Optional[Cell]]:
        return (self.pred, self.succ)

class QuadrupleSets:
    '''per bucket pair, the distinct (pred cell, succ cell) quadruples asked about'''
    def __init__(self, targets: Sequence[RoutedTarget]):
        self.sets: Dict[Tuple[int, int], Set[Tuple[Optional[Cell], Optional[Cell]]]] = defaultdict(set)
        for t in targets:
            self.sets[(t.i, t.j)].add(t.quad())

    @property
    def total(self) -> int:
        return sum(len(s) for s in self.sets.values())

def _better_pred(bp: BucketedPair, t: RoutedTarget, cell: Cell) -> bool:
    if t.pred is None:
        return True
    a, b = bp.cell_sum(t.i, t.j, cell)
    a2, b2 = bp.cell_sum(t.i, t.j, t.pred)
    return compare4(a, b, a2, b2) == Ordering.GREATER

def _better_succ(bp: BucketedPair, t: RoutedTarget, cell: Cell) -> bool:
    if t.succ is None:
        return True
    a, b = bp.cell_sum(t.i, t.j, cell)
    a2, b2 = bp.cell_sum(t.i, t.j, t.succ)
    return compare4(a, b, a2, b2) == Ordering.LESS

def anchor(bp: BucketedPair, t: RoutedTarget, k: int) -> None:
    '''binary search B_j for the cells of column k around c; keep the better ones'''
    a = bp.A[t.i][k]
    row = bp.B[t.j]
    lo, hi = 0, len(row)
    while lo < hi:
        mid = (lo + hi) // 2
        if compare3(a, row[mid], t.c) == Ordering.GREATER:
            hi = mid
        else:
            lo = mid + 1
    # row[:lo] sums to <= c, row[lo:] to > c
    if lo > 0 and _better_pred(bp, t, (k, lo - 1)):
        t.pred = (k, lo - 1)
    if lo < len(row) and _better_succ(bp, t, (k, lo)):
        t.succ = (k, lo)

def between_column(bp: BucketedPair, t: RoutedTarget, k: int) -> Optional[int]:
    '''some l with pred < A_i[k] + B_j[l] < succ, by binary search'''
    a = bp.A[t.i][k]
    row = bp.B[t.j]
    lo, hi = 0, len(row)
    if t.pred is not None:
        pa, pb = bp.cell_sum(t.i, t.j, t.pred)
        while lo < hi:
            mid = (lo + hi) // 2
            if compare4(a, row[mid], pa, pb) == Ordering.GREATER:
                hi = mid
            else:
                lo = mid + 1
    if lo == len(row):
        return None
    if t.succ is not None:
        sa, sb = bp.cell_sum(t.i, t.j, t.succ)
        if compare4(a, row[lo], sa, sb) != Ordering.LESS:
            return None
    return lo

def _quad_items(bp: BucketedPair, targets: Sequence[RoutedTarget], cols: Sequence[int]):
    lower = []
    upper = []
    seen = set()
    for t in targets:
        if (t.i, t.j, t.pred, t.succ) in seen:
            continue
        seen.add((t.i, t.j, t.pred, t.succ))
        A_i = bp.A[t.i]
        B_j = bp.B[t.j]
        for k2 in cols:
            if k2 >= len(A_i):
                continue
            if t.pred is not None:
                lower.append((('L', t.i, t.pred[0], k2), Difference(A_i[t.pred[0]], A_i[k2])))
            if t.succ is not None:
                upper.append((('L', t.i, t.succ[0], k2), Difference(A_i[k2], A_i[t.succ[0]])))
        for l2 in range(len(B_j)):
            if t.pred is not None:
                lower.append((('R', t.j, t.pred[1], l2), Difference(B_j[l2], B_j[t.pred[1]])))
            if t.succ is not None:
                upper.append((('R', t.j, t.succ[1], l2), Difference(B_j[t.succ[1]], B_j[l2])))
    return lower, upper

def _side_keys(ranks: Optional[RankList], key: Hashable, side: str) -> List[Tuple]:
    if ranks is None:
        return [(None,)]
    return [(h,) for h in half_keys(ranks.rank_of(key), ranks.universe_log, side)]

def _check_quad_budget(targets: Sequence[RoutedTarget], n: int, n_hat: int, d: int,
                       cfg: FineredConfig) -> QuadrupleSets:
    Q = QuadrupleSets(targets)
    limit = cfg.quad_budget * max(1, n_hat) * ceil_div(max(n, 1), d)
    if Q.total > limit:
        raise QuadBudgetExceeded(f'{Q.total} quadruples exceed {limit}')
    return Q

def build_3sum_graph(bp: BucketedPair, targets: Sequence[RoutedTarget], mode: str = 'quad',
                     cols: Optional[Sequence[int]] = None, mirrored: bool = False,
                     n_hat: Optional[int] = None, cfg: Optional[FineredConfig] = None) -> ReductionOutput:
    '''
    quad: left x[i,k-,k+], middle y[I-,I+], right z[j,l-,l+]; a triangle on a
    query edge iff some (k',l') sums strictly between pred and succ.
    pair: left x[i,k], middle y[I], right z[j,l] with multiplicities; the
    triangle count of a query edge is #{(k',l'): A_i[k']+B_j[l'] < A_i[k]+B_j[l]}
    (> with mirrored=True). Pair mode anchors on the succ cell when it
    is set (pred when mirrored).
    '''
    assert mode in ('quad', 'pair'), mode
    cfg = cfg or get_config()
    cols = list(range(bp.d)) if cols is None else list(cols)
    n = sum(len(a) for a in bp.A)
    ledger = current_ledger()
    Q = _check_quad_budget(targets, n, n_hat if n_hat is not None else len(targets), bp.d, cfg)
    if mode == 'quad':
        out = _build_quad(bp, targets, cols)
        levels = out.tags[0][1]
        # an open pred or succ side contributes one key instead of up to levels - 1
        bound = Q.total + 2 * bp.groups * bp.d ** 3 * levels * levels
        formula = 'sum|Q| + 2*(n/d)*d^3*levels^2'
    else:
        out = _build_pair(bp, targets, cols, mirrored)
        levels = out.tags[0][1]
        bound = Q.total + 2 * bp.groups * bp.d * bp.d * levels
        formula = 'sum|Q| + 2*(n/d)*d^2*levels'
    g = out.targets[0]
    ledger.record(f'3sum-{mode}-graph', {'edges': g.m, 'quadruples': Q.total, 'nodes': g.n},
                  {'edges': bound}, {'edges': formula}, d=bp.d, levels=levels)
    ledger.bump('quadruples', Q.total)
    return out

def _build_quad(bp: BucketedPair, targets: Sequence[RoutedTarget], cols: List[int]) -> ReductionOutput:
    lower_items, upper_items = _quad_items(bp, targets, cols)
    ledger = current_ledger()
    lower = RankList(lower_items, ledger=ledger) if lower_items else None
    upper = RankList(upper_items, ledger=ledger) if upper_items else None
    b = SparseGraphBuilder()
    decode: Dict[int, List[int]] = defaultdict(list)
    xs: Dict[Hashable, Tuple[int, Optional[int], Optional[int]]] = {}
    zs: Dict[Hashable, Tuple[int, Optional[int], Optional[int]]] = {}
    for idx, t in enumerate(targets):
        km = t.pred[0] if t.pred else None
        kp = t.succ[0] if t.succ else None
        lm = t.pred[1] if t.pred else None
        lp = t.succ[1] if t.succ else None
        x = ('x', t.i, km, kp)
        z = ('z', t.j, lm, lp)
        xs[x] = (t.i, km, kp)
        zs[z] = (t.j, lm, lp)
        decode[b.query(b.node(x, 'x'), b.node(z, 'z'))].append(idx)
    left: Dict[Hashable, List[Hashable]] = defaultdict(list)
    right: Dict[Hashable, List[Hashable]] = defaultdict(list)
    for x, (i, km, kp) in xs.items():
        for k2 in cols:
            if k2 >= len(bp.A[i]):
                continue
            lk = _side_keys(lower if km is not None else None, ('L', i, km, k2), 'left')
            uk = _side_keys(upper if kp is not None else None, ('L', i, kp, k2), 'left')
            for a, c in itertools.product(lk, uk):
                left[('y',) + a + c].append(x)
    for z, (j, lm, lp) in zs.items():
        for l2 in range(len(bp.B[j])):
            lk = _side_keys(lower if lm is not None else None, ('R', j, lm, l2), 'right')
            uk = _side_keys(upper if lp is not None else None, ('R', j, lp, l2), 'right')
            for a, c in itertools.product(lk, uk):
                right[('y',) + a + c].append(z)
    for y, lefts in left.items():
        rights = right.get(y)
        if not rights:
            continue
        yu = b.node(y, 'y')
        for x in set(lefts):
            b.edge(b.node(x, 'x'), yu)
        for z in set(rights):
            b.edge(yu, b.node(z, 'z'))
    levels = max(lower.levels if lower else 1, upper.levels if upper else 1)
    out = ReductionOutput()
    out.add(b.build(provenance={'construction': '3sum-quad-graph'}), ('quad', levels), dict(decode))
    out.ranks = (lower, upper)  # type: ignore
    return out

def _build_pair(bp: BucketedPair, targets: Sequence[RoutedTarget], cols: List[int],
                mirrored: bool) -> ReductionOutput:
    items = []
    anchors = []
    for t in targets:
        cell = t.pred if mirrored else t.succ
        assert cell is not None, 'pair mode needs an anchor cell'
        anchors.append(cell)
        k, l = cell
        A_i, B_j = bp.A[t.i], bp.B[t.j]
        for k2 in cols:
            if k2 < len(A_i):
                diff = Difference(A_i[k], A_i[k2]) if mirrored else Difference(A_i[k2], A_i[k])
                items.append((('L', t.i, k, k2), diff))
        for l2 in range(len(B_j)):
            diff = Difference(B_j[l2], B_j[l]) if mirrored else Difference(B_j[l], B_j[l2])
            items.append((('R', t.j, l, l2), diff))
    ranks = RankList(items, ledger=current_ledger())
    L = ranks.universe_log
    b = SparseGraphBuilder()
    decode: Dict[int, List[int]] = defaultdict(list)
    done_x = set()
    done_z = set()
    for idx, (t, (k, l)) in enumerate(zip(targets, anchors)):
        xu = b.node(('x', t.i, k), 'x')
        zu = b.node(('z', t.j, l), 'z')
        decode[b.query(xu, zu)].append(idx)
    # multiplicities are added after all query edges exist
    for t, (k, l) in zip(targets, anchors):
        if (t.i, k) not in done_x:
            done_x.add((t.i, k))
            xu = b.node(('x', t.i, k), 'x')
            for k2 in cols:
                if k2 < len(bp.A[t.i]):
                    for key in half_keys(ranks.rank_of(('L', t.i, k, k2)), L, 'left'):
                        b.edge(xu, b.node(('y',) + key, 'y'))
        if (t.j, l) not in done_z:
            done_z.add((t.j, l))
            zu = b.node(('z', t.j, l), 'z')
            for l2 in range(len(bp.B[t.j])):
                for key in half_keys(ranks.rank_of(('R', t.j, l, l2)), L, 'right'):
                    b.edge(b.node(('y',) + key, 'y'), zu)
    out = ReductionOutput()
    out.add(b.build(counted=True, provenance={'construction': '3sum-pair-graph'}),
            ('pair', ranks.levels), dict(decode))
    return out

def _decode_quad_witness(bp: BucketedPair, out: ReductionOutput, t: RoutedTarget,
                         w: Optional[int], cols: Sequence[int]) -> int:
    g: SparseGraph = out.targets[0]
    if w is None or g.parts is None or g.parts[w] != 'y':
        raise OracleProtocol(f'witness {w} is not a middle node')
    label = g.nodes[w]
    lower, upper = out.ranks  # type: ignore
    I_lo, I_hi = label[1], label[2]
    for k2 in cols:
        if k2 >= len(bp.A[t.i]):
            continue
        if I_lo is not None and not _in_left(lower, ('L', t.i, t.pred[0], k2), I_lo):
            continue
        if I_hi is not None and not _in_left(upper, ('L', t.i, t.succ[0], k2), I_hi):
            continue
        if between_column(bp, t, k2) is not None:
            return k2
    raise OracleProtocol(f'middle node {label} closes no strictly-between cell')

def _in_left(ranks: RankList, key: Hashable, interval: Tuple[int, int]) -> bool:
    level, index = interval
    r = ranks.rank_of(key)
    return r in DyadicInterval(level, index, ranks.universe_log).left_half()

def _improve_by_witness(bp: BucketedPair, targets: List[RoutedTarget], cols: List[int],
                        tri_oracle: SparseOracle, n_hat: int, cfg: FineredConfig,
                        rng: np.random.Generator) -> Dict[int, int]:
    out = build_3sum_graph(bp, targets, 'quad', cols, n_hat=n_hat, cfg=cfg)
    answers = tri_oracle(out.targets[0])
    found = {}
    for e, idxs in out.decode[0].items():
        rec = answers.get(e)
        if rec is None or not rec.found:
            continue
        for idx in idxs:
            found[idx] = _decode_quad_witness(bp, out, targets[idx], rec.witness, cols)
    return found

def _between_counts(bp: BucketedPair, targets: List[RoutedTarget], subset: Sequence[int],
                    count_oracle: SparseOracle, n_hat: int, cfg: FineredConfig) -> List[int]:
    '''per target: #{(k',l'), k' in subset, strictly between pred and succ}'''
    with_succ = [idx for idx, t in enumerate(targets) if t.succ is not None]
    with_pred = [idx for idx, t in enumerate(targets) if t.pred is not None]
    below = _pair_counts(bp, targets, with_succ, subset, False, count_oracle, n_hat, cfg)
    above = _pair_counts(bp, targets, with_pred, subset, True, count_oracle, n_hat, cfg)
    out = []
    for idx, t in enumerate(targets):
        cells = sum(len(bp.B[t.j]) for k2 in subset if k2 < len(bp.A[t.i]))
        hi = below[idx] if t.succ is not None else cells
        lo = cells - above[idx] if t.pred is not None else 0
        out.append(hi - lo)
    return out

def _pair_counts(bp: BucketedPair, targets: List[RoutedTarget], which: List[int],
                 subset: Sequence[int], mirrored: bool, count_oracle: SparseOracle,
                 n_hat: int, cfg: FineredConfig) -> Dict[int, int]:
    if not which:
        return {}
    chosen = [targets[idx] for idx in which]
    out = build_3sum_graph(bp, chosen, 'pair', subset, mirrored=mirrored, n_hat=n_hat, cfg=cfg)
    answers = count_oracle(out.targets[0])
    counts = {idx: 0 for idx in which}
    for e, locals_ in out.decode[0].items():
        rec = answers.get(e)
        for p in locals_:
            counts[which[p]] = rec.count if rec is not None and rec.found else 0
    return counts

def _improve_by_counts(bp: BucketedPair, targets: List[RoutedTarget], cols: List[int],
                       count_oracle: SparseOracle, n_hat: int, cfg: FineredConfig,
                       rng: np.random.Generator) -> Dict[int, int]:
    total = _between_counts(bp, targets, cols, count_oracle, n_hat, cfg)
    todo = {idx for idx, c in enumerate(total) if c > 0}
    found: Dict[int, int] = {}
    if not todo:
        return found
    bits = max(1, (bp.d - 1).bit_length())
    samples = 2 * max(1, math.ceil(math.log2(len(targets) + 2)))
    for s in range(bits + 1):
        size = min(len(cols), 1 << s)
        for _ in range(samples):
            if not todo:
                return found
            subset = sorted(int(x) for x in rng.choice(cols, size=size, replace=False))
            counts = _between_counts(bp, targets, subset, count_oracle, n_hat, cfg)
            single = [idx for idx in todo if counts[idx] == 1 or _single_column(bp, targets[idx], subset, counts[idx])]
            if not single:
                continue
            value = {idx: 0 for idx in single}
            for t in range(bits):
                restricted = [k2 for k2 in subset if (k2 >> t) & 1]
                if not restricted:
                    continue
                bit_counts = _between_counts(bp, targets, restricted, count_oracle, n_hat, cfg)
                for idx in single:
                    if bit_counts[idx] > 0:
                        value[idx] |= 1 << t
            for idx, k2 in value.items():
                if k2 in subset and between_column(bp, targets[idx], k2) is not None:
                    found[idx] = k2
                    todo.discard(idx)
    if todo:
        raise RoundBudgetOverrun(f'{len(todo)} targets without an isolated column')
    return found

def _single_column(bp: BucketedPair, t: RoutedTarget, subset: Sequence[int], count: int) -> bool:
    # a single live column may carry several between cells
    return count > 0 and len([k2 for k2 in subset if k2 < len(bp.A[t.i])]) == 1

def _variant1_rec(bp: BucketedPair, targets: List[RoutedTarget], cols: List[int],
                  rng: np.random.Generator, step, budget: int) -> None:
    if len(cols) == 1:
        k = cols[0]
        for t in targets:
            if k < len(bp.A[t.i]):
                anchor(bp, t, k)
        return
    half = sorted(int(c) for c in rng.choice(cols, size=ceil_div(len(cols), 2), replace=False))
    _variant1_rec(bp, targets, half, rng, step, budget)
    rounds = 0
    while True:
        found = step(bp, targets, cols, rng)
        if not found:
            break
        for idx, k2 in found.items():
            anchor(bp, targets[idx], k2)
        rounds += 1
        current_ledger().bump('rounds')
        if rounds > budget:
            raise RoundBudgetOverrun(f'{rounds} rounds at {len(cols)} columns')
    current_ledger().peak('max_rounds', rounds)
    logger.info('%d tightening rounds at %d columns', rounds, len(cols))

def solve_3sum_variant1(bp: BucketedPair, targets: List[RoutedTarget],
                        oracle: Optional[SparseOracle] = None, seed: int = 0,
                        route: str = 'witness', n_hat: Optional[int] = None,
                        cfg: Optional[FineredConfig] = None) -> List[RoutedTarget]:
    '''
    Las Vegas: pred / succ of every routed c among A_i + B_j, recursing on
    a random half of the A-side columns
    '''
    cfg = cfg or get_config()
    n = sum(len(a) for a in bp.A)
    budget = round_budget(n, cfg)
    n_hat = len({t.q for t in targets}) if n_hat is None else n_hat
    if route == 'witness':
        tri = oracle or witness_oracle

        def step(bp_, ts, cols, rng):
            return _improve_by_witness(bp_, ts, cols, tri, n_hat, cfg, rng)
    elif route == 'count':
        cnt = oracle or count_oracle

        def step(bp_, ts, cols, rng):
            return _improve_by_counts(bp_, ts, cols, cnt, n_hat, cfg, rng)
    else:
        raise ValueError(f'unknown route {route!r}')

    def attempt(rng: np.random.Generator) -> List[RoutedTarget]:
        for t in targets:
            t.pred = t.succ = None
        if targets:
            _variant1_rec(bp, targets, list(range(bp.d)), rng, step, budget)
        return targets

    return las_vegas(attempt, seed, '3SUM predecessor search', cfg)

def route_targets(bp: BucketedPair, C: Sequence[RestrictedReal]) -> List[RoutedTarget]:
    '''negate each c once and route it through the staircase'''
    targets = []
    for q, c in enumerate(C):
        target = c.neg()
        for i, j in staircase_pairs(bp, target):
            targets.append(RoutedTarget(q, i, j, target))
    current_ledger().record('staircase', {'routings': len(targets)},
                            {'routings': 2 * bp.groups * max(1, len(C))},
                            {'routings': '2*(n/d)*n_hat'}, d=bp.d)
    return targets

def all_nums_3sum_via_sparse(inst: ThreeSumInstance, d: int, oracle: Optional[SparseOracle] = None,
                             seed: int = 0, route: str = 'witness',
                             cfg: Optional[FineredConfig] = None) -> List[bool]:
    '''c is a 3SUM number iff some routed predecessor equals -c'''
    if inst.n == 0:
        return [False] * inst.n_hat
    bp = BucketedPair(inst.A, inst.B, d)
    targets = route_targets(bp, inst.C)
    solve_3sum_variant1(bp, targets, oracle, seed, route, n_hat=inst.n_hat, cfg=cfg)
    answers = [False] * inst.n_hat
    for t in targets:
        if t.pred is not None:
            a, b = bp.cell_sum(t.i, t.j, t.pred)
            if compare3(a, b, t.c) == Ordering.EQUAL:
                answers[t.q] = True
    return answers

# bucketing reduction to exact triangle

class BucketTriangles(NamedTuple):
    partial: Set[int]
    output: ReductionOutput
    valid_triples: int

def _valid_triples(A: List[List[RestrictedReal]], B: List[List[RestrictedReal]],
                   C: List[List[RestrictedReal]]) -> Dict[Tuple[int, int], List[int]]:
    '''per (i,j): the C buckets whose range meets [min A_i + min B_j, max A_i + max B_j]'''
    out = {}
    for i in range(len(A)):
        lo = 0
        hi = 0
        for j in range(len(B)):
            while lo < len(C) and compare3(A[i][0], B[j][0], C[lo][-1]) == Ordering.GREATER:
                lo += 1
            hi = max(hi, lo)
            while hi < len(C) and compare3(A[i][-1], B[j][-1], C[hi][0]) != Ordering.LESS:
                hi += 1
            if lo < hi:
                out[(i, j)] = list(range(lo, hi))
    return out

def real3sum_to_exact_tri(inst: ThreeSumInstance, g: int, eps: Optional[float] = None) -> BucketTriangles:
    '''
    Sort A, B and C' = -C into g buckets each. Bucket pairs meeting at
    least n^eps C' buckets are solved directly (partial answer, as C
    indices); the rest become exact-triangle instances, one per
    (q, p): the p-th value of the q-th C' bucket valid for each pair.
    '''
    eps = get_config().eps if eps is None else eps
    n = max(inst.n, inst.n_hat)
    if not 1 <= g <= min(len(inst.A), len(inst.B), len(inst.C)):
        raise BadBucketCount(f'g={g} outside [1, {min(len(inst.A), len(inst.B), len(inst.C))}]')
    negC = [c.neg() for c in inst.C]
    A, _ = _buckets(inst.A, ceil_div(len(inst.A), g))
    B, _ = _buckets(inst.B, ceil_div(len(inst.B), g))
    C, C_index = _buckets(negC, ceil_div(len(negC), g))
    valid = _valid_triples(A, B, C)
    total = sum(len(v) for v in valid.values())
    cutoff = max(1, math.ceil(n ** eps))
    ledger = current_ledger()
    partial: Set[int] = set()
    light: Dict[Tuple[int, int], List[int]] = {}
    for (i, j), ks in valid.items():
        if len(ks) < cutoff:
            light[(i, j)] = ks
            continue
        for a, b in itertools.product(A[i], B[j]):
            for k in ks:
                for p, c in enumerate(C[k]):
                    if compare3(a, b, c) == Ordering.EQUAL:
                        partial.add(C_index[k][p])
    out = ReductionOutput()
    width = max(len(bk) for bk in C)
    sa = max(len(bk) for bk in A)
    sb = max(len(bk) for bk in B)
    for q in range(cutoff - 1):
        for p in range(width):
            w_ij = [[INF] * len(B) for _ in range(len(A))]
            decode = {}
            for (i, j), ks in light.items():
                if q < len(ks) and p < len(C[ks[q]]):
                    w_ij[i][j] = C[ks[q]][p].neg()
                    decode[(i, j)] = C_index[ks[q]][p]
            if not decode:
                continue
            w_ik = [[A[i][s] if s < len(A[i]) else INF for s in range(sa) for _ in range(sb)]
                    for i in range(len(A))]
            w_kj = [[B[j][t] if t < len(B[j]) else INF for j in range(len(B))]
                    for _ in range(sa) for t in range(sb)]
            out.add(WeightedTripartiteGraph(w_ij, w_ik, w_kj,
                                            provenance={'construction': '3sum-exacttri', 'q': q, 'p': p}),
                    (q, p), decode)
    ledger.record('3sum-bucket-triples', {'valid_triples': total, 'instances': len(out)},
                  {'valid_triples': 3 * g * g, 'instances': max(1, cutoff - 1) * width},
                  {'valid_triples': '3*g^2', 'instances': 'n^eps * (n/g)'},
                  g=g, eps=eps, cutoff=cutoff)
    logger.debug('%d valid bucket triples, %d exact-triangle instances, %d direct hits',
                 total, len(out), len(partial))
    return BucketTriangles(partial, out, total)

def decode_bucket_triangles(inst: ThreeSumInstance, red: BucketTriangles,
                            answers: Sequence[Dict[Tuple[int, int], object]]) -> List[bool]:
    '''per c: in the partial answer or closing an exact triangle'''
    out = [False] * inst.n_hat
    for q in red.partial:
        out[q] = True
    for dec, ans in zip(red.output.decode, answers):
        for cell, q in dec.items():
            rec = ans.get(cell)
            if rec is not None and getattr(rec, 'found', rec):
                out[q] = True
    return out
