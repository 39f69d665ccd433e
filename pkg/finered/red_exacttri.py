'''
exact triangle through all-edges sparse triangle detection: predecessor /
successor search, strictly-between indices and the counting route
'''

from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Set, Tuple
import itertools
import logging
import math
from collections import defaultdict

import numpy as np

from .errors import OracleProtocol, ShapeMismatch
from .instances import Matrix, WeightedTripartiteGraph, shape
from .ledger import current_ledger
from .numeric import INF, Difference, Ordering, RankList, compare3, compare4, half_keys
from .red_apsp import (ReductionOutput, RoundBudgetOverrun, SparseOracle, check_shapes, take_columns,
                       build_variant_graphs, count_oracle, decode_middle, emit_tripartite,
                       las_vegas, round_budget, witness_oracle)
from .runner import map_answers
from .utils import FineredConfig, ceil_div, chunked, get_config

logger = logging.getLogger(__name__)

COUNT_MODES = ('less', 'leq', 'greater', 'geq')

class PredSuccState:
    '''
    Per active pair (i,j): pred[i][j] is an index whose sum is <= C[i][j]
    and succ[i][j] one whose sum is > C[i][j]; None is the -inf / +inf
    sentinel. Pairs with C[i][j] = +inf are inactive.
    '''
    def __init__(self, C: Matrix, pred: Optional[List[List[Optional[int]]]] = None,
                 succ: Optional[List[List[Optional[int]]]] = None):
        self.C = C
        n = len(C)
        m = len(C[0]) if n else 0
        self.pred = pred if pred is not None else [[None] * m for _ in range(n)]
        self.succ = succ if succ is not None else [[None] * m for _ in range(n)]
        self.rounds = 0

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.C), len(self.C[0]) if self.C else 0

    def active(self) -> List[Tuple[int, int]]:
        n, m = self.shape
        return [(i, j) for i in range(n) for j in range(m) if not self.C[i][j].is_infinite]

    def place(self, A: Matrix, B: Matrix, i: int, j: int, kp: int) -> None:
        if compare3(A[i][kp], B[kp][j], self.C[i][j]) == Ordering.GREATER:
            self.succ[i][j] = kp
        else:
            self.pred[i][j] = kp

    def mapped(self, fn) -> 'PredSuccState':
        return PredSuccState(self.C,
                             [[fn(x) if x is not None else None for x in row] for row in self.pred],
                             [[fn(x) if x is not None else None for x in row] for row in self.succ])

def _finite(x) -> bool:
    return not x.is_infinite

def build_exacttri_graphs(A: Matrix, B: Matrix, state: PredSuccState,
                          candidates: Optional[Iterable[int]] = None) -> ReductionOutput:
    '''
    One graph per (pred, succ) index pair and chunk of its pairs; middle
    nodes y[k', I-, I+]. A triangle x[i] - y - z[j] exists iff
    sum(pred) < A[i,k'] + B[k',j] < sum(succ), a missing side dropping its
    inequality.
    '''
    n, d, m = check_shapes(A, B)
    if state.shape != (n, m):
        raise ShapeMismatch(f'state is {state.shape}, product is {n}x{m}')
    ledger = current_ledger()
    groups: Dict[Tuple[Optional[int], Optional[int]], List[Tuple[int, int]]] = defaultdict(list)
    for i, j in state.active():
        groups[(state.pred[i][j], state.succ[i][j])].append((i, j))
    cand = sorted(set(range(d)) if candidates is None else set(candidates))
    chunk = ceil_div(n * m, d * d)
    out = ReductionOutput()
    for (km, kp), group in sorted(groups.items(), key=lambda kv: (_sortkey(kv[0][0]), _sortkey(kv[0][1]))):
        rows = sorted({i for i, _ in group})
        cols = sorted({j for _, j in group})
        lower = _side_ranks(A, B, km, rows, cols, 'lower')
        upper = _side_ranks(A, B, kp, rows, cols, 'upper')
        L1 = lower.universe_log if lower is not None else 0
        L2 = upper.universe_log if upper is not None else 0
        levels = max(L1, L2) + 1
        for part in chunked(group, chunk):
            prow = sorted({i for i, _ in part})
            pcol = sorted({j for _, j in part})
            left: Dict[Hashable, List[Hashable]] = defaultdict(list)
            right: Dict[Hashable, List[Hashable]] = defaultdict(list)
            for i in prow:
                for k2 in cand:
                    if not _finite(A[i][k2]):
                        continue
                    keys = _halves(lower, upper, ('L', i, k2), L1, L2, 'left')
                    for key in keys:
                        left[('y', k2) + key].append(('x', i))
            for j in pcol:
                for k2 in cand:
                    if not _finite(B[k2][j]):
                        continue
                    keys = _halves(lower, upper, ('R', k2, j), L1, L2, 'right')
                    for key in keys:
                        right[('y', k2) + key].append(('z', j))
            g, qidx = emit_tripartite(left, right, [(('x', i), ('z', j)) for i, j in part],
                                      provenance={'construction': 'exacttri-graph', 'pred': km, 'succ': kp})
            out.add(g, (km, kp, len(out)), {e: pair for e, pair in zip(qidx, part)})
            ledger.record('exacttri-graph',
                          {'edges': g.m, 'query_edges': len(part), 'nodes': g.n},
                          {'edges': chunk + 2 * max(n, m) * d * levels * levels, 'query_edges': chunk},
                          {'edges': 'ceil(n^2/d^2) + 2*n*d*levels^2', 'query_edges': 'ceil(n^2/d^2)'},
                          n=n, d=d, levels=levels)
    bounded = sum(1 for km, kp, _ in out.tags if km is not None and kp is not None)
    ledger.record('exacttri-graphs', {'graphs': bounded},
                  {'graphs': 2 * d * d}, {'graphs': '2*d^2'}, n=n, d=d)
    # 2d + 1 index pairs have a missing side; their full chunks add at most d^2
    ledger.record('exacttri-open-graphs', {'graphs': len(out) - bounded},
                  {'graphs': d * d + 2 * d + 1}, {'graphs': 'd^2 + 2*d + 1'}, n=n, d=d)
    logger.debug('built %d exact-triangle graphs for n=%d d=%d', len(out), n, d)
    return out

def _sortkey(x: Optional[int]) -> int:
    return -1 if x is None else x

def _side_ranks(A: Matrix, B: Matrix, anchor: Optional[int], rows: Sequence[int],
                cols: Sequence[int], side: str) -> Optional[RankList]:
    '''
    lower: A[i,km] - A[i,k'] against B[k',j] - B[km,j];
    upper: A[i,k'] - A[i,kp] against B[kp,j] - B[k',j]
    '''
    if anchor is None:
        return None
    d = len(B)
    items = []
    for i in rows:
        for k2 in range(d):
            if _finite(A[i][k2]):
                diff = (Difference(A[i][anchor], A[i][k2]) if side == 'lower'
                        else Difference(A[i][k2], A[i][anchor]))
                items.append((('L', i, k2), diff))
    for j in cols:
        for k2 in range(d):
            if _finite(B[k2][j]):
                diff = (Difference(B[k2][j], B[anchor][j]) if side == 'lower'
                        else Difference(B[anchor][j], B[k2][j]))
                items.append((('R', k2, j), diff))
    return RankList(items, ledger=current_ledger())

def _halves(lower: Optional[RankList], upper: Optional[RankList], key: Tuple,
            L1: int, L2: int, side: str) -> List[Tuple]:
    sides = []
    for ranks, L in ((lower, L1), (upper, L2)):
        if ranks is None:
            sides.append([(None,)])
            continue
        if key not in ranks:
            return []
        sides.append([h for h in half_keys(ranks.rank_of(key), L, side)])
    return [a + b for a, b in itertools.product(*sides)]

def is_between(A: Matrix, B: Matrix, state: PredSuccState, i: int, j: int, k2: int) -> bool:
    if A[i][k2].is_infinite or B[k2][j].is_infinite:
        return False
    km, kp = state.pred[i][j], state.succ[i][j]
    if km is not None and compare4(A[i][km], B[km][j], A[i][k2], B[k2][j]) != Ordering.LESS:
        return False
    if kp is not None and compare4(A[i][k2], B[k2][j], A[i][kp], B[kp][j]) != Ordering.LESS:
        return False
    return True

def solve_variant2(A: Matrix, B: Matrix, state: PredSuccState,
                   tri_oracle: SparseOracle = witness_oracle,
                   jobs: Optional[int] = None) -> List[List[Optional[int]]]:
    '''per active pair: some index strictly between pred and succ, or None'''
    n, d, m = check_shapes(A, B)
    out = build_exacttri_graphs(A, B, state)
    answers = map_answers(tri_oracle, out.targets, jobs)
    between: List[List[Optional[int]]] = [[None] * m for _ in range(n)]
    for g, dec, ans in zip(out.targets, out.decode, answers):
        for e, (i, j) in dec.items():
            rec = ans.get(e)
            if rec is None or not rec.found:
                continue
            k2 = decode_middle(g, rec.witness)
            if not is_between(A, B, state, i, j, k2):
                raise OracleProtocol(f'witness {k2} is not strictly between for ({i},{j})')
            between[i][j] = k2
    return between

def count_below(A: Matrix, B: Matrix, k: List[List[int]],
                count_oracle: SparseOracle = count_oracle,
                mode: str = 'less',
                candidates: Optional[Iterable[int]] = None,
                pairs: Optional[Iterable[Tuple[int, int]]] = None,
                jobs: Optional[int] = None) -> List[List[int]]:
    '''
    per (i,j): #{k' : A[i,k'] + B[k',j] OP A[i,k] + B[k,j]} over the
    candidate indices, OP given by mode
    '''
    assert mode in COUNT_MODES, mode
    n, d, m = check_shapes(A, B, k)
    cand = sorted(set(range(d)) if candidates is None else set(candidates))
    pairs = list(pairs) if pairs is not None else None
    mirrored = mode in ('greater', 'leq')
    out = build_variant_graphs(A, B, k, mirrored=mirrored, candidates=cand, pairs=pairs)
    answers = map_answers(count_oracle, out.targets, jobs)
    counts = [[0] * m for _ in range(n)]
    for dec, ans in zip(out.decode, answers):
        for e, (i, j) in dec.items():
            rec = ans.get(e)
            counts[i][j] = rec.count if rec is not None and rec.found else 0
    if mode in ('leq', 'geq'):
        counts = [[len(cand) - c for c in row] for row in counts]
    return counts

def between_counts(A: Matrix, B: Matrix, state: PredSuccState, subset: Sequence[int],
                   count_oracle: SparseOracle = count_oracle,
                   jobs: Optional[int] = None) -> Dict[Tuple[int, int], int]:
    '''
    per active pair: #{k' in subset strictly between pred and succ}
    = less(succ) - leq(pred)
    '''
    active = state.active()
    with_succ = [(i, j) for i, j in active if state.succ[i][j] is not None]
    with_pred = [(i, j) for i, j in active if state.pred[i][j] is not None]
    fill = lambda M: [[x if x is not None else 0 for x in row] for row in M]
    below_succ = count_below(A, B, fill(state.succ), count_oracle, 'less',
                             candidates=subset, pairs=with_succ, jobs=jobs) if with_succ else None
    above_pred = count_below(A, B, fill(state.pred), count_oracle, 'greater',
                             candidates=subset, pairs=with_pred, jobs=jobs) if with_pred else None
    out = {}
    for i, j in active:
        if state.succ[i][j] is not None:
            assert below_succ is not None
            hi = below_succ[i][j]
        else:
            hi = sum(1 for k2 in subset if _finite(A[i][k2]) and _finite(B[k2][j]))
        lo = len(subset) - above_pred[i][j] if state.pred[i][j] is not None and above_pred is not None else 0
        out[(i, j)] = hi - lo
    return out

def variant2_via_counts(A: Matrix, B: Matrix, state: PredSuccState,
                        count_oracle: SparseOracle = count_oracle,
                        seed: int = 0, jobs: Optional[int] = None,
                        cfg: Optional[FineredConfig] = None) -> List[List[Optional[int]]]:
    '''
    Same contract as solve_variant2 using only counts: random subsets of each
    size 2^s isolate a single between-index, bit-restricted counts spell it out.
    '''
    n, d, m = check_shapes(A, B)
    cfg = cfg or get_config()
    total = between_counts(A, B, state, list(range(d)), count_oracle, jobs)
    wanted = {p for p, c in total.items() if c > 0}
    if not wanted:
        return [[None] * m for _ in range(n)]
    bits = max(1, (d - 1).bit_length())
    samples = 2 * max(1, math.ceil(math.log2(n + 2)))

    def attempt(rng: np.random.Generator) -> List[List[Optional[int]]]:
        found: List[List[Optional[int]]] = [[None] * m for _ in range(n)]
        todo = set(wanted)
        for s in range(bits + 1):
            size = min(d, 1 << s)
            for _ in range(samples):
                if not todo:
                    return found
                subset = sorted(int(x) for x in rng.choice(d, size=size, replace=False))
                _isolate(A, B, state, subset, bits, todo, found, count_oracle, jobs)
        if todo:
            raise RoundBudgetOverrun(f'{len(todo)} pairs without an isolated index')
        return found

    return las_vegas(attempt, seed, 'between-index recovery', cfg)

def _isolate(A: Matrix, B: Matrix, state: PredSuccState, subset: List[int], bits: int,
             todo: Set[Tuple[int, int]], found: List[List[Optional[int]]],
             count_oracle: SparseOracle, jobs: Optional[int]) -> None:
    counts = between_counts(A, B, state, subset, count_oracle, jobs)
    single = [p for p in todo if counts.get(p) == 1]
    if not single:
        return
    value = {p: 0 for p in single}
    for t in range(bits):
        restricted = [k2 for k2 in subset if (k2 >> t) & 1]
        if not restricted:
            continue
        bit_counts = between_counts(A, B, state, restricted, count_oracle, jobs)
        for p in single:
            if bit_counts.get(p) == 1:
                value[p] |= 1 << t
    for (i, j), k2 in value.items():
        if k2 in subset and is_between(A, B, state, i, j, k2):
            found[i][j] = k2
            todo.discard((i, j))

def _pred_succ_rec(A: Matrix, B: Matrix, C: Matrix, cols: List[int], rng: np.random.Generator,
                   step, budget: int) -> PredSuccState:
    n, m = len(C), len(C[0]) if C else 0
    state = PredSuccState(C)
    if len(cols) == 1:
        k = cols[0]
        for i, j in state.active():
            if _finite(A[i][k]) and _finite(B[k][j]):
                state.place(A, B, i, j, k)
        return state
    half = sorted(int(c) for c in rng.choice(cols, size=ceil_div(len(cols), 2), replace=False))
    state = _pred_succ_rec(A, B, C, half, rng, step, budget)
    pos = {c: p for p, c in enumerate(cols)}
    A_sub, B_sub = take_columns(A, B, cols)
    while True:
        local = state.mapped(lambda c: pos[c])
        between = step(A_sub, B_sub, local, rng)
        moved = 0
        for i in range(n):
            for j in range(m):
                if between[i][j] is not None:
                    state.place(A, B, i, j, cols[between[i][j]])
                    moved += 1
        if not moved:
            break
        state.rounds += 1
        current_ledger().bump('rounds')
        if state.rounds > budget:
            raise RoundBudgetOverrun(f'{state.rounds} rounds at {len(cols)} columns')
    current_ledger().peak('max_rounds', state.rounds)
    logger.info('%d tightening rounds at %d columns', state.rounds, len(cols))
    return state

def pred_succ(A: Matrix, B: Matrix, C: Matrix, tri_oracle: Optional[SparseOracle] = None,
              seed: int = 0, route: str = 'witness', jobs: Optional[int] = None,
              cfg: Optional[FineredConfig] = None) -> PredSuccState:
    '''
    Las Vegas predecessor / successor of every finite C[i,j] among the sums
    A[i,k] + B[k,j]; route 'witness' asks a witness oracle for
    strictly-between indices, route 'count' recovers them from counts.
    '''
    n, d, m = check_shapes(A, B)
    if shape(C) != (n, m) and n:
        raise ShapeMismatch(f'C must be {n}x{m}')
    cfg = cfg or get_config()
    budget = round_budget(n, cfg)
    if route == 'witness':
        oracle = tri_oracle or witness_oracle

        def step(A_s, B_s, st, rng):
            return solve_variant2(A_s, B_s, st, oracle, jobs)
    elif route == 'count':
        oracle = tri_oracle or count_oracle

        def step(A_s, B_s, st, rng):
            return variant2_via_counts(A_s, B_s, st, oracle, int(rng.integers(1 << 62)), jobs, cfg)
    else:
        raise ValueError(f'unknown route {route!r}')
    return las_vegas(lambda rng: _pred_succ_rec(A, B, C, list(range(d)), rng, step, budget),
                     seed, 'predecessor search', cfg)

def ae_exact_tri_via_sparse(g: WeightedTripartiteGraph, d: int,
                            tri_oracle: Optional[SparseOracle] = None,
                            seed: int = 0, route: str = 'witness',
                            jobs: Optional[int] = None) -> Dict[Tuple[int, int], bool]:
    '''
    per (i,j): is the predecessor of -w_ij among w_ik + w_kj equal to it,
    strip by strip over d inner nodes
    '''
    if d < 1:
        raise ShapeMismatch(f'strip width {d} must be positive')
    C = [[INF if w.is_infinite else w.neg() for w in row] for row in g.w_ij]
    answers = {(i, j): False for i in range(g.ni) for j in range(g.nj)}
    if g.nk == 0:
        return answers
    rng = np.random.default_rng(seed)
    for start in range(0, g.nk, d):
        cols = list(range(start, min(g.nk, start + d)))
        A_s, B_s = take_columns(g.w_ik, g.w_kj, cols)
        state = pred_succ(A_s, B_s, C, tri_oracle, int(rng.integers(1 << 62)), route, jobs)
        for i, j in state.active():
            p = state.pred[i][j]
            if p is not None and compare3(A_s[i][p], B_s[p][j], C[i][j]) == Ordering.EQUAL:
                answers[(i, j)] = True
    return answers
