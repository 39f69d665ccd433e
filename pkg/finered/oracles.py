'''
reference solvers, ground truth for every pipeline
'''

from typing import Any, Dict, Hashable, List, NamedTuple, Optional, Sequence, Set, Tuple
import functools
import heapq
import itertools
import logging
from collections import defaultdict

import numpy as np

from .errors import NegativeCycleDetected, NotTripartite
from .instances import (ColoredSparseGraph, ColorfulBmmInstance, EdgeColoredMultigraph,
                        Matrix, MinPlusInstance, OVInstance, SetDisjointnessInstance, SparseGraph,
                        StringPair, ThreeSumInstance, TriCoInstance, WeightedDigraph,
                        WeightedTripartiteGraph, shape)
from .numeric import INF, ZERO, Ordering, RestrictedReal, compare3, compare4

logger = logging.getLogger(__name__)

class EdgeRecord(NamedTuple):
    found: bool
    count: int = 0
    witness: Optional[int] = None

class PredSucc(NamedTuple):
    '''None stands for the -inf (pred) / +inf (succ) sentinel'''
    pred: Optional[int]
    succ: Optional[int]

# 3SUM

def all_nums_3sum(inst: ThreeSumInstance) -> List[bool]:
    order = _sorted_indices(inst.B)
    answers = []
    for c in inst.C:
        target = c.neg()
        hit = False
        for a in inst.A:
            lo, hi = 0, len(order)
            while lo < hi:
                mid = (lo + hi) // 2
                o = compare3(a, inst.B[order[mid]], target)
                if o == Ordering.EQUAL:
                    hit = True
                    break
                if o == Ordering.LESS:
                    lo = mid + 1
                else:
                    hi = mid
            if hit:
                break
        answers.append(hit)
    return answers

def _sorted_indices(xs: Sequence[RestrictedReal]) -> List[int]:
    return sorted(range(len(xs)), key=functools.cmp_to_key(
        lambda p, q: int(compare4(xs[p], ZERO, xs[q], ZERO))))

# (min,+)

def min_plus(inst: MinPlusInstance) -> Tuple[Matrix, List[List[int]]]:
    '''ties go to the smallest k'''
    return min_plus_matrices(inst.A, inst.B)

def min_plus_matrices(A: Matrix, B: Matrix) -> Tuple[Matrix, List[List[int]]]:
    n, d = shape(A)
    _, m = shape(B)
    values: Matrix = []
    argmins: List[List[int]] = []
    for i in range(n):
        vrow = []
        arow = []
        for j in range(m):
            best = 0
            for k in range(1, d):
                if compare4(A[i][k], B[k][j], A[i][best], B[best][j]) == Ordering.LESS:
                    best = k
            vrow.append(A[i][best].add(B[best][j]) if d else INF)
            arow.append(best)
        values.append(vrow)
        argmins.append(arow)
    return values, argmins

def apsp_reference(g: WeightedDigraph) -> Matrix:
    n = g.n
    D = [row[:] for row in g.W]
    for i in range(n):
        if compare3(D[i][i], ZERO, ZERO) != Ordering.LESS:
            D[i][i] = ZERO
    for k in range(n):
        for i in range(n):
            if D[i][k].is_infinite:
                continue
            for j in range(n):
                if compare3(D[i][k], D[k][j], D[i][j]) == Ordering.LESS:
                    D[i][j] = D[i][k].add(D[k][j])
    for i in range(n):
        if compare3(D[i][i], ZERO, ZERO) == Ordering.LESS:
            raise NegativeCycleDetected(f'node {i} lies on a negative cycle')
    return D

# Exact-Triangle

def ae_exact_tri(g: WeightedTripartiteGraph, mode: str = 'decide') -> Dict[Tuple[int, int], EdgeRecord]:
    '''
    per (i,j): is there k with w_ij + w_ik + w_kj = 0, all three finite
    '''
    assert mode in ('decide', 'count', 'witness'), mode
    out = {}
    for i in range(g.ni):
        for j in range(g.nj):
            w = g.w_ij[i][j]
            if w.is_infinite:
                out[(i, j)] = EdgeRecord(False)
                continue
            target = w.neg()
            count = 0
            witness = None
            for k in range(g.nk):
                if compare3(g.w_ik[i][k], g.w_kj[k][j], target) == Ordering.EQUAL:
                    count += 1
                    if witness is None:
                        witness = k
                    if mode == 'decide':
                        break
            out[(i, j)] = EdgeRecord(count > 0, count, witness)
    return out

def pred_succ_scan(A: Matrix, B: Matrix, C: Matrix) -> List[List[PredSucc]]:
    '''
    pred: largest finite A[i,k]+B[k,j] <= C[i,j] (so C itself when attained),
    succ: smallest finite sum > C[i,j]; ties go to the smallest k
    '''
    n, d = shape(A)
    _, m = shape(B)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            c = C[i][j]
            pred: Optional[int] = None
            succ: Optional[int] = None
            if not c.is_infinite:
                for k in range(d):
                    if A[i][k].is_infinite or B[k][j].is_infinite:
                        continue
                    if compare3(A[i][k], B[k][j], c) != Ordering.GREATER:
                        if pred is None or compare4(A[i][k], B[k][j], A[i][pred], B[pred][j]) == Ordering.GREATER:
                            pred = k
                    elif succ is None or compare4(A[i][k], B[k][j], A[i][succ], B[succ][j]) == Ordering.LESS:
                        succ = k
            row.append(PredSucc(pred, succ))
        out.append(row)
    return out

# sparse triangles

def ae_sparse_tri(g: SparseGraph, mode: str = 'decide') -> Dict[int, EdgeRecord]:
    '''
    per query edge; iterates the adjacency of the lower-degree endpoint and
    multiplies edge multiplicities in count mode
    '''
    assert mode in ('decide', 'count', 'witness'), mode
    adj = g.adjacency()
    out = {}
    for e in g.query_edges():
        u, v = g.edges[e]
        if len(adj[u]) > len(adj[v]):
            u, v = v, u
        count = 0
        witness = None
        for w in sorted(adj[u]):
            mv = adj[v].get(w)
            if mv is None:
                continue
            if witness is None:
                witness = w
            count += adj[u][w] * mv
            if mode != 'count':
                break
        out[e] = EdgeRecord(witness is not None, count, witness)
    return out

def ae_mono_tri(g: EdgeColoredMultigraph, mode: str = 'decide') -> Dict[int, EdgeRecord]:
    '''per colored edge (u,v,x): triangles whose other two edges also carry x'''
    assert mode in ('decide', 'count', 'witness'), mode
    by_color: Dict[int, Dict[int, Set[int]]] = defaultdict(lambda: defaultdict(set))
    for u, v, c in g.edges:
        by_color[c][u].add(v)
        by_color[c][v].add(u)
    out = {}
    for e, (u, v, c) in enumerate(g.edges):
        adj = by_color[c]
        common = sorted(adj[u] & adj[v])
        out[e] = EdgeRecord(bool(common), len(common), common[0] if common else None)
    return out

# degeneracy

def degeneracy(g: SparseGraph) -> Tuple[int, List[int]]:
    '''
    min-degree elimination; D is the largest degree seen at removal
    '''
    adj = g.adjacency()
    deg = [len(a) for a in adj]
    heap = [(deg[u], u) for u in range(g.n)]
    heapq.heapify(heap)
    removed = [False] * g.n
    order = []
    D = 0
    while heap:
        d, u = heapq.heappop(heap)
        if removed[u] or d != deg[u]:
            continue
        removed[u] = True
        order.append(u)
        D = max(D, d)
        for w in adj[u]:
            if not removed[w]:
                deg[w] -= 1
                heapq.heappush(heap, (deg[w], w))
    return D, order

def triangles_by_degeneracy(g: SparseGraph) -> List[Tuple[int, int, int]]:
    '''every triangle once, as a sorted node triple; O(m D) in the elimination order'''
    _, order = degeneracy(g)
    pos = {u: i for i, u in enumerate(order)}
    adj = g.adjacency()
    later = [[w for w in adj[u] if pos[w] > pos[u]] for u in range(g.n)]
    found = []
    for u in order:
        out = later[u]
        for a, b in itertools.combinations(out, 2):
            if b in adj[a]:
                found.append(tuple(sorted((u, a, b))))
    return sorted(found)  # type: ignore

def ae_colorful_sparse_tri(cg: ColoredSparseGraph) -> Dict[int, bool]:
    g = cg.graph
    seen: Dict[Tuple[int, int], Set[Hashable]] = defaultdict(set)
    for a, b, c in triangles_by_degeneracy(g):
        seen[(a, b)].add(cg.colors[c])
        seen[(a, c)].add(cg.colors[b])
        seen[(b, c)].add(cg.colors[a])
    palette = set(cg.palette)
    out = {}
    for e in g.query_edges():
        u, v = g.edges[e]
        out[e] = palette <= seen.get((min(u, v), max(u, v)), set())
    return out

# Colorful-BMM

def colorful_bmm(inst: ColorfulBmmInstance) -> np.ndarray:
    '''entry (i,j) is true iff the witnesses' colors cover the palette'''
    out = np.ones((inst.n1, inst.n2), dtype=bool)
    for c in inst.palette:
        idx = inst.indices_of(c)
        if not idx:
            out[:] = False
            continue
        hits = inst.A[:, idx].astype(np.int64) @ inst.B[idx, :].astype(np.int64)
        out &= hits > 0
    return out

def distinct_eq_product(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    '''per (i,j): number of distinct values v with A[i,k] = B[k,j] = v for some k'''
    n1, inner = A.shape
    n2 = B.shape[1]
    out = np.zeros((n1, n2), dtype=np.int64)
    for i in range(n1):
        for j in range(n2):
            matched = A[i, :] == B[:, j]
            out[i, j] = len(np.unique(A[i, matched]))
    return out

# Triangle Collection

def trico_palettes(inst: TriCoInstance) -> Tuple[List[Hashable], List[Hashable], List[Hashable]]:
    if inst.parts is None:
        raise NotTripartite('instance carries no part tags')
    return inst.palette('A'), inst.palette('B'), inst.palette('C')

def _trico_graph(inst: TriCoInstance) -> SparseGraph:
    return SparseGraph(list(range(inst.n)), inst.edges)

def covered_triples(inst: TriCoInstance) -> Set[Tuple[Hashable, ...]]:
    '''
    tripartite variants: (color_A, color_B, color_C) per triangle;
    general: frozensets of three distinct colors, as sorted-by-repr tuples
    '''
    tri = triangles_by_degeneracy(_trico_graph(inst))
    covered: Set[Tuple[Hashable, ...]] = set()
    if inst.variant == 'general':
        for t in tri:
            cs = {inst.colors[u] for u in t}
            if len(cs) == 3:
                covered.add(tuple(sorted(cs, key=repr)))
        return covered
    assert inst.parts is not None
    for t in tri:
        by_part = {inst.parts[u]: inst.colors[u] for u in t}
        if len(by_part) != 3:
            raise NotTripartite('triangle inside fewer than three parts')
        covered.add((by_part['A'], by_part['B'], by_part['C']))
    return covered

def _check_tripartite(inst: TriCoInstance) -> None:
    if inst.parts is None:
        raise NotTripartite('instance carries no part tags')
    for u, v in inst.edges:
        if inst.parts[u] == inst.parts[v]:
            raise NotTripartite(f'edge ({u},{v}) inside part {inst.parts[u]}')

def tri_co(inst: TriCoInstance, mode: str = 'decide') -> Any:
    '''
    decide: every color triple is realized by a triangle;
    acp: per color pair (a,b), every third color completes it
    '''
    assert mode in ('decide', 'acp'), mode
    if inst.variant == 'general':
        return _tri_co_general(inst, mode)
    _check_tripartite(inst)
    KA, KB, KC = trico_palettes(inst)
    covered = covered_triples(inst)
    if mode == 'decide':
        return all((a, b, c) in covered for a in KA for b in KB for c in KC)
    return {(a, b): all((a, b, c) in covered for c in KC) for a in KA for b in KB}

def _tri_co_general(inst: TriCoInstance, mode: str) -> Any:
    K = sorted(set(inst.colors), key=repr)
    covered = covered_triples(inst)

    def has(*cs: Hashable) -> bool:
        return tuple(sorted(cs, key=repr)) in covered

    if mode == 'decide':
        return all(has(*t) for t in itertools.combinations(K, 3))
    return {(a, b): all(has(a, b, c) for c in K if c != a and c != b)
            for a in K for b in K if a != b}

# OV, strings, sets

def ov(inst: OVInstance) -> Tuple[bool, Optional[Tuple[int, int]]]:
    V = inst.vectors.astype(np.int64)
    G = V @ V.T
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            if G[i, j] == 0:
                return True, (i, j)
    return False, None

def distinct_hamming_similarity(s: StringPair) -> List[int]:
    codes: Dict[Hashable, int] = {}
    t = np.array([codes.setdefault(x, len(codes)) for x in s.text], dtype=np.int64)
    p = np.array([codes.setdefault(x, len(codes)) for x in s.pattern], dtype=np.int64)
    out = []
    for shift in range(s.N - s.M + 1):
        window = t[shift:shift + s.M]
        out.append(int(len(np.unique(p[window == p]))))
    return out

def set_disjointness(inst: SetDisjointnessInstance) -> List[bool]:
    '''true when the two queried sets are disjoint'''
    return [not (inst.family[a] & inst.family[b]) for a, b in inst.queries]
