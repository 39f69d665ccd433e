'''
monochromatic triangles: overlaying sparse instances, and reducing
AE-Mono-Tri to ACP-Tri-Co (light) and to integer exact triangles
'''

from typing import Dict, FrozenSet, Hashable, List, NamedTuple, Optional, Sequence, Set, Tuple
import functools
import itertools
import logging
from collections import defaultdict

import numpy as np

from .errors import NotTripartite, ParallelEdges, TooManyColors, TooManyNodes
from .instances import EdgeColoredMultigraph, SparseGraph, TriCoInstance, WeightedTripartiteGraph
from .ledger import current_ledger
from .numeric import INF, real
from .utils import ceil_log2, get_config

logger = logging.getLogger(__name__)

class Overlay(NamedTuple):
    graph: EdgeColoredMultigraph
    # multigraph edge -> (instance, source edge)
    source: List[Tuple[int, int]]

def overlay(instances: Sequence[SparseGraph], n: Optional[int] = None, seed: int = 0) -> Overlay:
    '''
    Instance i is placed on [n] by its own random permutation and its
    edges get color i. Colored edges stay distinct, so a color-i
    triangle through an edge exists iff the source edge lies in a
    triangle of instance i.
    '''
    if n is None:
        n = max((g.n for g in instances), default=0)
    rng = np.random.default_rng(seed)
    edges = []
    source = []
    for i, g in enumerate(instances):
        if g.n > n:
            raise TooManyNodes(f'instance {i} has {g.n} nodes, the overlay has {n}')
        perm = rng.permutation(n)
        for e, (u, v) in enumerate(g.edges):
            edges.append((int(perm[u]), int(perm[v]), i))
            source.append((i, e))
    current_ledger().record('mono-overlay', {'nodes': n, 'edges': len(edges), 'colors': len(instances)},
                            {'edges': sum(g.m for g in instances), 'colors': len(instances)},
                            {'edges': 'sum m_i', 'colors': 'instances'})
    return Overlay(EdgeColoredMultigraph(n, edges, provenance={'construction': 'mono-overlay', 'seed': seed}),
                   source)

def decode_overlay(instances: Sequence[SparseGraph], ov: Overlay,
                   answers: Dict[int, object]) -> List[Dict[int, bool]]:
    '''per instance, per query edge: in a triangle'''
    found: Dict[Tuple[int, int], bool] = {}
    for e, src in enumerate(ov.source):
        rec = answers.get(e)
        found[src] = bool(getattr(rec, 'found', rec))
    return [{e: found.get((i, e), False) for e in g.query_edges()} for i, g in enumerate(instances)]

def _tripartite_parts(g: EdgeColoredMultigraph) -> Tuple[List[int], List[int], List[int]]:
    if g.parts is None:
        raise NotTripartite('edge-colored graph carries no part tags')
    I, J, K = g.nodes_in('I'), g.nodes_in('J'), g.nodes_in('K')
    if len(I) + len(J) + len(K) != g.n:
        raise NotTripartite('parts other than I, J, K')
    for u, v, _ in g.edges:
        if g.parts[u] == g.parts[v]:
            raise NotTripartite(f'edge ({u},{v}) inside part {g.parts[u]}')
    return I, J, K

def edge_colors(g: EdgeColoredMultigraph) -> Dict[FrozenSet[int], Tuple[int, int]]:
    '''node pair -> (color, edge index); one colored edge per pair'''
    out: Dict[FrozenSet[int], Tuple[int, int]] = {}
    for e, (u, v, c) in enumerate(g.edges):
        key = frozenset((u, v))
        if key in out:
            raise ParallelEdges(f'nodes {u} and {v} carry more than one colored edge')
        out[key] = (c, e)
    return out

def query_edges(g: EdgeColoredMultigraph) -> List[int]:
    '''the I-J edges, which the tripartite reductions answer'''
    assert g.parts is not None
    return [e for e, (u, v, _) in enumerate(g.edges) if {g.parts[u], g.parts[v]} == {'I', 'J'}]

class AcpReduction(NamedTuple):
    instance: TriCoInstance
    # query edge -> (A color, B color)
    pairs: Dict[int, Tuple[Hashable, Hashable]]
    bits: int

def mono_to_acp_trico_light(g: EdgeColoredMultigraph) -> AcpReduction:
    '''
    One tripartite layer G_t per color bit t. K nodes keep one node z,
    I/J nodes get copies v_0, v_1. An edge (v,z) whose color has bit b
    joins v_b and z; a missing pair (v,z) joins both copies. I-J pairs
    get every cross-copy edge plus v_b - v'_b for b != bit t of
    color(v,v'). Colors (v,v',z) lack a triangle in every layer iff all
    three edges exist and share a color.
    '''
    I, J, K = _tripartite_parts(g)
    colored = edge_colors(g)
    T = max(1, ceil_log2(max((c for _, _, c in g.edges), default=0) + 1))
    colors: List[Hashable] = []
    parts: List[str] = []
    components: List[int] = []
    edges: List[Tuple[int, int]] = []
    part_of = {'I': 'A', 'J': 'B', 'K': 'C'}
    for t in range(T):
        ids: Dict[Tuple[int, int], int] = {}

        def node(v: int, b: int) -> int:
            if (v, b) not in ids:
                ids[(v, b)] = len(colors)
                colors.append(('v', v))
                parts.append(part_of[g.parts[v]])  # type: ignore
                components.append(t)
            return ids[(v, b)]

        for z in K:
            node(z, 0)
        for v in I + J:
            node(v, 0)
            node(v, 1)
        for v in I + J:
            for z in K:
                hit = colored.get(frozenset((v, z)))
                if hit is None:
                    edges.append((node(v, 0), node(z, 0)))
                    edges.append((node(v, 1), node(z, 0)))
                else:
                    edges.append((node(v, (hit[0] >> t) & 1), node(z, 0)))
        for v in I:
            for w in J:
                edges.append((node(v, 0), node(w, 1)))
                edges.append((node(v, 1), node(w, 0)))
                hit = colored.get(frozenset((v, w)))
                for b in (0, 1):
                    if hit is None or (hit[0] >> t) & 1 != b:
                        edges.append((node(v, b), node(w, b)))
    pairs = {}
    for e in query_edges(g):
        u, v, _ = g.edges[e]
        a, b = (u, v) if g.parts[u] == 'I' else (v, u)  # type: ignore
        pairs[e] = (('v', a), ('v', b))
    p = 2 * T
    current_ledger().record('mono-acptrico', {'nodes': len(colors), 'layers': T, 'p': p},
                            {'nodes': T * (len(K) + 2 * (len(I) + len(J))), 'p': 2 * T},
                            {'nodes': 'T*(|K| + 2|I| + 2|J|)', 'p': '2T'}, n=g.n)
    inst = TriCoInstance(colors, edges, variant='light', parts=parts, p=p, components=components,
                         provenance={'construction': 'mono-acptrico'})
    return AcpReduction(inst, pairs, T)

def decode_acp(red: AcpReduction, acp: Dict[Tuple[Hashable, Hashable], bool]) -> Dict[int, bool]:
    '''a query edge has a monochromatic triangle iff some apex color is left uncovered'''
    return {e: not acp[pair] for e, pair in red.pairs.items()}

# Salem-Spencer sets

def _digit_shells(N: int, base: int, width: int, top: int) -> Dict[int, List[int]]:
    '''values < N with `width` base-`base` digits in [0, top), keyed by digit square sum'''
    shells: Dict[int, List[int]] = defaultdict(list)
    weights = [base ** s for s in range(width)]
    for digits in itertools.product(range(top), repeat=width):
        x = sum(dg * w for dg, w in zip(digits, weights))
        if x < N:
            shells[sum(dg * dg for dg in digits)].append(x)
    return shells

def _candidates(N: int) -> List[List[int]]:
    out = []
    # base 3 with digits {0,1}: x + z = 2y forces equal digits
    width = 1
    while 3 ** width < N:
        width += 1
    base3 = _digit_shells(N, 3, width, 2)
    out.append(sorted(x for xs in base3.values() for x in xs))
    for dim in range(2, max(2, ceil_log2(N)) + 1):
        base = 3
        while base ** dim < N:
            base += 1
        for m in (base, base + 1):
            top = (m - 1) // 2 + 1
            if top < 3:
                continue
            shells = _digit_shells(N, m, dim, top)
            best = max(shells.values(), key=len)
            out.append(sorted(best))
    return out

@functools.lru_cache(maxsize=None)
def _behrend(N: int) -> Tuple[int, ...]:
    if N <= 2:
        return tuple(range(N))
    best = max(_candidates(N), key=len)
    smaller = _behrend(N // 2)
    if len(smaller) > len(best):
        return smaller
    return tuple(best)

def behrend_set(N: int) -> Set[int]:
    '''
    a 3-AP-free subset of [N]: the largest sphere shell of small-digit
    vectors over a few (base, dimension) choices, or base-3 {0,1} digits
    '''
    if N < 1:
        raise ValueError(f'N={N} must be positive')
    return set(_behrend(N))

def behrend_size(N: int) -> int:
    return len(_behrend(N))

def is_progression_free(S: Sequence[int]) -> bool:
    members = set(S)
    xs = sorted(members)
    for a, c in itertools.combinations(xs, 2):
        if (a + c) % 2 == 0 and (a + c) // 2 in members:
            return False
    return True

class IntExactReduction(NamedTuple):
    graph: WeightedTripartiteGraph
    # (i, j) -> multigraph edge
    edges: Dict[Tuple[int, int], int]
    encoding: Dict[int, int]

def mono_to_int_exact_tri(g: EdgeColoredMultigraph, N: Optional[int] = None) -> IntExactReduction:
    '''
    Colors map injectively into a Salem-Spencer set S; I-K and J-K edges
    weigh f(color), I-J edges -2 f(color). A triangle sums to zero iff
    f(x1) + f(x2) = 2 f(x3), which S only allows for equal colors.
    '''
    I, J, K = _tripartite_parts(g)
    colored = edge_colors(g)
    palette = g.colors()
    limit = get_config().max_universe
    if N is None:
        N = 1
        while behrend_size(N) < len(palette):
            if N >= limit:
                raise TooManyColors(f'{len(palette)} colors need a progression-free set beyond [{limit}]')
            N = min(2 * N, limit)
    S = sorted(behrend_set(N))
    if len(S) < len(palette):
        raise TooManyColors(f'{len(palette)} colors, progression-free set in [{N}] has {len(S)}')
    f = {c: S[r] for r, c in enumerate(palette)}

    def weight(u: int, v: int, scale: int):
        hit = colored.get(frozenset((u, v)))
        return INF if hit is None else real(scale * f[hit[0]])

    w_ij = [[weight(u, v, -2) for v in J] for u in I]
    w_ik = [[weight(u, z, 1) for z in K] for u in I]
    w_kj = [[weight(z, v, 1) for v in J] for z in K]
    pos_i = {u: r for r, u in enumerate(I)}
    pos_j = {v: r for r, v in enumerate(J)}
    index = {}
    for e in query_edges(g):
        u, v, _ = g.edges[e]
        if g.parts[u] == 'J':  # type: ignore
            u, v = v, u
        index[(pos_i[u], pos_j[v])] = e
    current_ledger().record('mono-intexact', {'colors': len(palette), 'universe': N, 'set': len(S)},
                            {'colors': len(S)}, {'colors': '|S|'})
    logger.debug('%d colors into a progression-free set of %d in [%d]', len(palette), len(S), N)
    graph = WeightedTripartiteGraph(w_ij, w_ik, w_kj, provenance={'construction': 'mono-intexact', 'N': N})
    return IntExactReduction(graph, index, f)
