'''
(min,+)-product and APSP through all-edges sparse triangle detection,
degeneracy control, low-degree pruning and the set-disjointness mapping
'''

from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple, TypeVar
import itertools
import logging
import math
from collections import defaultdict

import numpy as np

from .errors import NegativeCycleDetected, OracleProtocol, RetryBudgetExhausted, ShapeMismatch
from .instances import (Matrix, SetDisjointnessInstance, SparseGraph, SparseGraphBuilder,
                        WeightedDigraph, shape)
from .ledger import Ledger, current_ledger
from .numeric import ZERO, Difference, Ordering, RankList, compare3, compare4, half_keys
from .oracles import EdgeRecord, ae_sparse_tri, degeneracy
from .runner import map_answers
from .utils import FineredConfig, ceil_div, ceil_log2, chunked, get_config

logger = logging.getLogger(__name__)

SparseOracle = Callable[[SparseGraph], Dict[int, EdgeRecord]]

def witness_oracle(g: SparseGraph) -> Dict[int, EdgeRecord]:
    return ae_sparse_tri(g, 'witness')

def count_oracle(g: SparseGraph) -> Dict[int, EdgeRecord]:
    return ae_sparse_tri(g, 'count')

class ReductionOutput:
    '''
    Target instances, one tag per target, and per target a decode map from
    target query (edge index or key) to the source query it answers.
    '''
    targets: List[Any]
    tags: List[Hashable]
    decode: List[Dict[Any, Any]]

    def __init__(self, targets: Optional[List[Any]] = None,
                 tags: Optional[List[Hashable]] = None,
                 decode: Optional[List[Dict[Any, Any]]] = None,
                 ledger: Optional[Ledger] = None):
        self.targets = targets or []
        self.tags = tags or []
        self.decode = decode or []
        self.ledger = ledger if ledger is not None else current_ledger()

    def add(self, target: Any, tag: Hashable, decode: Dict[Any, Any]) -> None:
        self.targets.append(target)
        self.tags.append(tag)
        self.decode.append(decode)

    def source_queries(self) -> List[Any]:
        return [q for dec in self.decode for q in dec.values()]

    def __len__(self) -> int:
        return len(self.targets)

    def __repr__(self) -> str:
        return '<ReductionOutput targets={}>'.format(len(self.targets))

class VariantStateMinPlus:
    '''current best index per (i,j) for the improvement loop'''
    def __init__(self, k: List[List[int]], budget: int):
        self.k = k
        self.rounds = 0
        self.budget = budget

    def apply(self, improved: List[List[Optional[int]]]) -> int:
        changed = 0
        for i, row in enumerate(improved):
            for j, kk in enumerate(row):
                if kk is not None:
                    self.k[i][j] = kk
                    changed += 1
        if changed:
            self.rounds += 1
        return changed

    @property
    def exhausted(self) -> bool:
        return self.rounds > self.budget

def check_shapes(A: Matrix, B: Matrix, k: Optional[List[List[int]]] = None) -> Tuple[int, int, int]:
    n, d = shape(A)
    rows_b, m = shape(B)
    if rows_b != d:
        raise ShapeMismatch(f'A is {n}x{d} but B has {rows_b} rows')
    if d < 1:
        raise ShapeMismatch('inner dimension must be at least 1')
    if k is not None:
        if len(k) != n or any(len(row) != m for row in k):
            raise ShapeMismatch(f'index matrix must be {n}x{m}')
        for row in k:
            for kk in row:
                if not 0 <= kk < d:
                    raise ShapeMismatch(f'index {kk} outside [0, {d})')
    return n, d, m

def _middle_label(kk: int, key: Tuple[int, ...]) -> Tuple[Any, ...]:
    return ('y', kk) + key

def emit_tripartite(left_edges: Dict[Hashable, List[Hashable]],
                    right_edges: Dict[Hashable, List[Hashable]],
                    queries: Sequence[Tuple[Hashable, Hashable]],
                    counted: bool = False,
                    provenance: Optional[Dict[str, Any]] = None) -> Tuple[SparseGraph, List[int]]:
    '''
    Builds x - y - z graphs; middle nodes are kept only when they have
    neighbours on both sides. Returns the graph and its query edge indices
    in the order of `queries`.
    '''
    b = SparseGraphBuilder()
    qidx = []
    for x, z in queries:
        qidx.append(b.query(b.node(x, 'x'), b.node(z, 'z')))
    for y, xs in left_edges.items():
        zs = right_edges.get(y)
        if not zs:
            continue
        yu = b.node(y, 'y')
        for x in xs:
            b.edge(b.node(x, 'x'), yu)
        for z in zs:
            b.edge(yu, b.node(z, 'z'))
    return b.build(counted=counted, provenance=provenance), qidx

def _variant_items(A: Matrix, B: Matrix, kk: int, rows: Sequence[int], cols: Sequence[int],
                   mirrored: bool) -> List[Tuple[Hashable, Difference]]:
    # the side that must be a finite sum keeps its entries finite; the
    # refined order then agrees with the true one
    d = len(B)
    items = []
    for i in rows:
        for kp in range(d):
            if not mirrored and not A[i][kp].is_infinite:
                items.append((('L', i, kp), Difference(A[i][kp], A[i][kk])))
            elif mirrored and not A[i][kk].is_infinite:
                items.append((('L', i, kp), Difference(A[i][kk], A[i][kp])))
    for j in cols:
        for kp in range(d):
            if not mirrored and not B[kp][j].is_infinite:
                items.append((('R', kp, j), Difference(B[kk][j], B[kp][j])))
            elif mirrored and not B[kk][j].is_infinite:
                items.append((('R', kp, j), Difference(B[kp][j], B[kk][j])))
    return items

def build_variant_graphs(A: Matrix, B: Matrix, k: List[List[int]],
                         mirrored: bool = False,
                         candidates: Optional[Iterable[int]] = None,
                         pairs: Optional[Iterable[Tuple[int, int]]] = None) -> ReductionOutput:
    '''
    One graph per fixed index kk and chunk of the pairs with k[i][j] = kk.
    A triangle x[i] - y[k',I] - z[j] exists iff
    A[i,k'] + B[k',j] < A[i,kk] + B[kk,j]; mirrored=True reverses the
    inequality (>).
    Only indices in `candidates` (default all) get middle nodes; only
    `pairs` (default all) become query edges.
    '''
    n, d, m = check_shapes(A, B, k)
    ledger = current_ledger()
    allowed = set(range(d)) if candidates is None else set(candidates)
    groups: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for i, j in (pairs if pairs is not None else itertools.product(range(n), range(m))):
        groups[k[i][j]].append((i, j))
    chunk = ceil_div(n * m, d)
    out = ReductionOutput()
    cand = sorted(allowed)
    for kk in sorted(groups):
        group = groups[kk]
        rows = sorted({i for i, _ in group})
        cols = sorted({j for _, j in group})
        ranks = RankList(_variant_items(A, B, kk, rows, cols, mirrored), ledger=ledger)
        L = ranks.universe_log
        levels = ranks.levels
        for part in chunked(group, chunk):
            prow = sorted({i for i, _ in part})
            pcol = sorted({j for _, j in part})
            left: Dict[Hashable, List[Hashable]] = defaultdict(list)
            right: Dict[Hashable, List[Hashable]] = defaultdict(list)
            for i in prow:
                for kp in cand:
                    if ('L', i, kp) not in ranks:
                        continue
                    for key in half_keys(ranks.rank_of(('L', i, kp)), L, 'left'):
                        left[_middle_label(kp, key)].append(('x', i))
            for j in pcol:
                for kp in cand:
                    if ('R', kp, j) not in ranks:
                        continue
                    for key in half_keys(ranks.rank_of(('R', kp, j)), L, 'right'):
                        right[_middle_label(kp, key)].append(('z', j))
            g, qidx = emit_tripartite(left, right, [(('x', i), ('z', j)) for i, j in part],
                                      provenance={'construction': 'variant-graph', 'k': kk})
            out.add(g, (kk, len(out)), {e: pair for e, pair in zip(qidx, part)})
            ledger.record('variant-graph',
                          {'edges': g.m, 'query_edges': len(part), 'nodes': g.n},
                          {'edges': chunk + 2 * max(n, m) * d * levels, 'query_edges': chunk},
                          {'edges': 'ceil(n^2/d) + 2*n*d*levels', 'query_edges': 'ceil(n^2/d)'},
                          n=n, d=d, k=kk, levels=levels,
                          universe=1 << L, loose_universe=4 * d * d * n)
    ledger.record('variant-graphs', {'graphs': len(out)}, {'graphs': 2 * d}, {'graphs': '2*d'}, n=n, d=d)
    logger.debug('built %d variant graphs for n=%d d=%d', len(out), n, d)
    return out

def decode_middle(g: SparseGraph, w: Optional[int]) -> int:
    if w is None or g.parts is None or g.parts[w] != 'y':
        raise OracleProtocol(f'witness {w} is not a middle node')
    label = g.nodes[w]
    return int(label[1])

def solve_variant(A: Matrix, B: Matrix, k: List[List[int]],
                  tri_oracle: SparseOracle = witness_oracle,
                  jobs: Optional[int] = None) -> List[List[Optional[int]]]:
    '''per (i,j): some k' with A[i,k'] + B[k',j] < A[i,k] + B[k,j], or None'''
    n, d, m = check_shapes(A, B, k)
    out = build_variant_graphs(A, B, k)
    answers = map_answers(tri_oracle, out.targets, jobs)
    improved: List[List[Optional[int]]] = [[None] * m for _ in range(n)]
    for g, dec, ans in zip(out.targets, out.decode, answers):
        for e, (i, j) in dec.items():
            rec = ans.get(e)
            if rec is None or not rec.found:
                continue
            kp = decode_middle(g, rec.witness)
            kk = k[i][j]
            if compare4(A[i][kp], B[kp][j], A[i][kk], B[kk][j]) != Ordering.LESS:
                raise OracleProtocol(f'witness {kp} does not improve ({i},{j})')
            improved[i][j] = kp
    return improved

T = TypeVar('T')

class RoundBudgetOverrun(Exception):
    '''one Las Vegas attempt ran past its round budget'''

def las_vegas(attempt: Callable[[np.random.Generator], T], seed: int, what: str,
              cfg: Optional[FineredConfig] = None) -> T:
    '''
    run attempt(rng) until it finishes within budget; at most c_retry restarts
    '''
    cfg = cfg or get_config()
    rng = np.random.default_rng(seed)
    ledger = current_ledger()
    for tries in range(cfg.c_retry + 1):
        try:
            return attempt(rng)
        except RoundBudgetOverrun as e:
            ledger.bump('restarts')
            logger.warning('restarting %s (attempt %d): %s', what, tries + 1, e)
    raise RetryBudgetExhausted(f'{what}: no attempt finished within budget after {cfg.c_retry} restarts')

def take_columns(A: Matrix, B: Matrix, cols: Sequence[int]) -> Tuple[Matrix, Matrix]:
    return [[row[c] for c in cols] for row in A], [B[c] for c in cols]

def round_budget(n: int, cfg: Optional[FineredConfig] = None) -> int:
    cfg = cfg or get_config()
    return int(cfg.c_iter * math.log2(n + 2))

def _rect(A: Matrix, B: Matrix, cols: List[int], rng: np.random.Generator,
          tri_oracle: SparseOracle, budget: int, jobs: Optional[int]) -> List[List[int]]:
    n, m = len(A), len(B[0])
    if len(cols) == 1:
        return [[cols[0]] * m for _ in range(n)]
    half = sorted(int(c) for c in rng.choice(cols, size=ceil_div(len(cols), 2), replace=False))
    state = VariantStateMinPlus(_rect(A, B, half, rng, tri_oracle, budget, jobs), budget)
    pos = {c: p for p, c in enumerate(cols)}
    A_sub, B_sub = take_columns(A, B, cols)
    ledger = current_ledger()
    while True:
        local = [[pos[c] for c in row] for row in state.k]
        improved = solve_variant(A_sub, B_sub, local, tri_oracle, jobs)
        glob = [[cols[x] if x is not None else None for x in row] for row in improved]
        if not state.apply(glob):
            break
        ledger.bump('rounds')
        if state.exhausted:
            raise RoundBudgetOverrun(f'{state.rounds} rounds at {len(cols)} columns')
    ledger.peak('max_rounds', state.rounds)
    logger.info('%d improvement rounds at %d columns', state.rounds, len(cols))
    return state.k

def min_plus_rect(A: Matrix, B: Matrix, tri_oracle: SparseOracle = witness_oracle,
                  seed: int = 0, jobs: Optional[int] = None,
                  cfg: Optional[FineredConfig] = None) -> Tuple[Matrix, List[List[int]]]:
    '''
    Las Vegas: recurse on a random half of the inner indices, then improve
    until no pair improves; restarts when a level runs over its round budget
    '''
    n, d, m = check_shapes(A, B)
    budget = round_budget(n, cfg)
    k = las_vegas(lambda rng: _rect(A, B, list(range(d)), rng, tri_oracle, budget, jobs),
                  seed, 'min-plus product', cfg)
    values = [[A[i][k[i][j]].add(B[k[i][j]][j]) for j in range(m)] for i in range(n)]
    return values, k

def min_plus_square(A: Matrix, B: Matrix, d: int, tri_oracle: SparseOracle = witness_oracle,
                    seed: int = 0, jobs: Optional[int] = None) -> Tuple[Matrix, List[List[int]]]:
    '''elementwise minimum over strips of d inner indices'''
    n, inner, m = check_shapes(A, B)
    if d < 1:
        raise ShapeMismatch(f'strip width {d} must be positive')
    rng = np.random.default_rng(seed)
    best: Optional[List[List[int]]] = None
    ledger = current_ledger()
    strips = 0
    merged = 0
    for start in range(0, inner, d):
        cols = list(range(start, min(inner, start + d)))
        A_s, B_s = take_columns(A, B, cols)
        _, k = min_plus_rect(A_s, B_s, tri_oracle, int(rng.integers(1 << 62)), jobs)
        strips += 1
        if best is None:
            best = [[cols[x] for x in row] for row in k]
            continue
        before = ledger.comparisons
        for i in range(n):
            for j in range(m):
                kk = cols[k[i][j]]
                kb = best[i][j]
                if compare4(A[i][kk], B[kk][j], A[i][kb], B[kb][j]) == Ordering.LESS:
                    best[i][j] = kk
        merged += ledger.comparisons - before
    ledger.record('min-plus-strips', {'strips': strips, 'merge_comparisons': merged},
                  {'strips': ceil_div(inner, d), 'merge_comparisons': n * m * (strips - 1)},
                  {'strips': 'ceil(n/d)', 'merge_comparisons': 'n^2*(ceil(n/d) - 1)'}, n=n, d=d)
    assert best is not None
    values = [[A[i][best[i][j]].add(B[best[i][j]][j]) for j in range(m)] for i in range(n)]
    return values, best

def apsp(g: WeightedDigraph, d: int, tri_oracle: SparseOracle = witness_oracle,
         seed: int = 0, jobs: Optional[int] = None) -> Matrix:
    '''ceil(log2 n) min-plus squarings of the weight matrix with a zero diagonal'''
    n = g.n
    D = [row[:] for row in g.W]
    for i in range(n):
        if compare3(D[i][i], ZERO, ZERO) != Ordering.LESS:
            D[i][i] = ZERO
    rng = np.random.default_rng(seed)
    for step in range(ceil_log2(max(n, 1))):
        D, _ = min_plus_square(D, D, d, tri_oracle, int(rng.integers(1 << 62)), jobs)
        logger.debug('squaring %d done', step + 1)
    for i in range(n):
        if compare3(D[i][i], ZERO, ZERO) == Ordering.LESS:
            raise NegativeCycleDetected(f'node {i} lies on a negative cycle')
    return D

def split_for_degeneracy(g: SparseGraph, d: int) -> Tuple[SparseGraph, Dict[int, int]]:
    '''
    Left nodes with more than d right neighbours become ceil(deg/d) copies,
    each with d of the right edges and all middle edges. Returns the new
    graph and a map from new edge index to old edge index.
    '''
    assert g.parts is not None, 'tripartite graph required'
    assert d >= 1
    adj = g.adjacency()
    index = {}
    for e, (u, v) in enumerate(g.edges):
        index[(u, v)] = e
        index[(v, u)] = e
    b = SparseGraphBuilder()
    edge_map: Dict[int, int] = {}
    queries = set(g.query_edges())
    copies: Dict[int, List[int]] = {}
    for x in range(g.n):
        if g.parts[x] != 'x':
            continue
        right = sorted(w for w in adj[x] if g.parts[w] == 'z')
        groups = chunked(right, d) if len(right) > d else [right]
        copies[x] = []
        for c, grp in enumerate(groups):
            label = g.nodes[x] if len(groups) == 1 else (g.nodes[x], 'copy', c)
            xu = b.node(label, 'x')
            copies[x].append(xu)
            for z in grp:
                old = index[(x, z)]
                zu = b.node(g.nodes[z], 'z')
                new = b.query(xu, zu) if old in queries else b.edge(xu, zu, g.mult(old))
                edge_map[new] = old
    for u in range(g.n):
        if g.parts[u] == 'x':
            continue
        uu = b.node(g.nodes[u], g.parts[u])
        for w, mult in adj[u].items():
            if g.parts[w] == 'x':
                # left-right edges were placed with their copy above
                if g.parts[u] == 'y':
                    for xc in copies[w]:
                        edge_map[b.edge(xc, uu, mult)] = index[(u, w)]
            elif u < w:
                edge_map[b.edge(uu, b.node(g.nodes[w], g.parts[w]), mult)] = index[(u, w)]
    return b.build(counted=g.multiplicity is not None, provenance=dict(g.provenance)), edge_map

def degeneracy_controlled(tri_oracle: SparseOracle, d: int) -> SparseOracle:
    '''wraps an oracle so every graph is split before it is answered'''
    def _oracle(g: SparseGraph) -> Dict[int, EdgeRecord]:
        split, edge_map = split_for_degeneracy(g, d)
        D, _ = degeneracy(split)
        ledger = current_ledger()
        ledger.peak('degeneracy', D)
        levels = ceil_log2(max(g.n, 1)) + 1
        ledger.record('degeneracy-split', {'degeneracy': D},
                      {'degeneracy': get_config().c_deg * d * levels},
                      {'degeneracy': 'c_deg*d*levels'}, d=d)
        answers = tri_oracle(split)
        where = {label: u for u, label in enumerate(g.nodes)}
        out = {}
        for e, rec in answers.items():
            if rec.found and rec.witness is not None:
                rec = rec._replace(witness=where[split.nodes[rec.witness]])
            out[edge_map[e]] = rec
        return out
    return _oracle

def prune_low_degree_middle(g: SparseGraph, threshold: int,
                            ) -> Tuple[Dict[int, EdgeRecord], SparseGraph, List[int]]:
    '''
    Middle nodes of degree at most threshold resolve the query edges they
    close and are removed. Returns the resolved records (keyed by edge of g),
    the pruned graph and its edge map (new edge index -> edge of g).
    '''
    assert g.parts is not None, 'tripartite graph required'
    adj = g.adjacency()
    index = {}
    for e, (u, v) in enumerate(g.edges):
        index[(min(u, v), max(u, v))] = e
    queries = set(g.query_edges())
    resolved: Dict[int, EdgeRecord] = {}
    removed = set()
    for y in range(g.n):
        deg = len(adj[y])
        if g.parts[y] != 'y' or not 0 < deg <= threshold:
            continue
        removed.add(y)
        lefts = [w for w in adj[y] if g.parts[w] == 'x']
        rights = [w for w in adj[y] if g.parts[w] == 'z']
        for x in lefts:
            for z in rights:
                e = index.get((min(x, z), max(x, z)))
                if e is None or e not in queries:
                    continue
                prev = resolved.get(e, EdgeRecord(False))
                resolved[e] = EdgeRecord(True, prev.count + adj[y][x] * adj[y][z],
                                         prev.witness if prev.found else y)
    pruned, edge_map = g.subgraph(u for u in range(g.n) if u not in removed)
    current_ledger().record('prune-low-degree',
                            {'middle_left': sum(1 for u in range(pruned.n) if pruned.parts and pruned.parts[u] == 'y')},
                            {'middle_left': _middle_edges(g) / threshold if threshold > 0 else float(g.n)},
                            {'middle_left': 'middle-incident edges / threshold'},
                            threshold=threshold)
    return resolved, pruned, edge_map

def _middle_edges(g: SparseGraph) -> int:
    assert g.parts is not None
    return sum(1 for u, v in g.edges if 'y' in (g.parts[u], g.parts[v]))

def combine_pruned(g: SparseGraph, resolved: Dict[int, EdgeRecord], pruned: SparseGraph,
                   edge_map: List[int], answers: Dict[int, EdgeRecord]) -> Dict[int, EdgeRecord]:
    '''merge pruned-graph oracle answers with the resolved records'''
    out = {e: EdgeRecord(False) for e in g.query_edges()}
    for e, rec in resolved.items():
        out[e] = rec
    where = {label: u for u, label in enumerate(g.nodes)}
    for e_new, rec in answers.items():
        if not rec.found:
            continue
        e = edge_map[e_new]
        prev = out[e]
        if prev.found:
            witness = prev.witness
        else:
            witness = where[pruned.nodes[rec.witness]] if rec.witness is not None else None
        out[e] = EdgeRecord(True, prev.count + rec.count, witness)
    return out

def sparse_tri_to_set_disjointness(g: SparseGraph) -> Tuple[SetDisjointnessInstance, List[int]]:
    '''
    Family = middle neighbourhoods of left and right nodes; one query per
    left-right query edge. Returns the instance and, per query, its edge index.
    '''
    assert g.parts is not None, 'tripartite graph required'
    adj = g.adjacency()
    middle = [u for u in range(g.n) if g.parts[u] == 'y']
    slot = {u: s for s, u in enumerate(middle)}
    family_index: Dict[int, int] = {}
    family = []
    for u in range(g.n):
        if g.parts[u] in ('x', 'z'):
            family_index[u] = len(family)
            family.append({slot[w] for w in adj[u] if w in slot})
    queries = []
    decode = []
    for e in g.query_edges():
        u, v = g.edges[e]
        assert {g.parts[u], g.parts[v]} == {'x', 'z'}, f'query edge {e} is not left-right'
        queries.append((family_index[u], family_index[v]))
        decode.append(e)
    return SetDisjointnessInstance(len(middle), family, queries), decode
