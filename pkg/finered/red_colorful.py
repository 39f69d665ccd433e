'''
Colorful-BMM: reductions into it from OV and (min,+), and out of it to
ACP-Tri-Co, string matching, colorful sparse triangles and the
(distinct,=)-product
'''

from typing import Callable, Dict, Hashable, List, NamedTuple, Optional, Sequence, Set, Tuple
import logging
from collections import defaultdict

import numpy as np

from .errors import BadBlock, NotLight, ShapeMismatch, TooManyPerColor
from .instances import (PAD_COLOR, ColoredSparseGraph, ColorfulBmmInstance, Matrix, OVInstance,
                        SparseGraphBuilder, StringPair, TriCoInstance)
from .ledger import current_ledger
from .numeric import Difference, Ordering, PerturbedReal, RankList, compare_perturbed, half_keys
from .oracles import colorful_bmm
from .red_apsp import check_shapes
from .runner import map_answers
from .utils import ceil_div, ceil_log2, get_config

logger = logging.getLogger(__name__)

BmmOracle = Callable[[ColorfulBmmInstance], np.ndarray]

# OV -> Colorful-BMM

class OvBmm(NamedTuple):
    instance: ColorfulBmmInstance
    n: int
    d: int
    # coordinates per vector after padding
    width: int

def ov_to_colorful_bmm(inst: OVInstance, d: int) -> OvBmm:
    '''
    Groups of d vectors on both sides. A[i,(k,l,s)] is bit s of vector k
    of group i, B[(k,l,s),j] bit s of vector l of group j, and (k,l)
    colors the index: entry (i,j) misses a color iff the two groups hold
    an orthogonal pair. When n is not a multiple of d the last group is
    filled with all-ones vectors and two coordinates are appended that
    cover any pair touching a filler and no other pair.
    '''
    n, f = inst.n, inst.f
    if not 1 <= d <= max(n, 1):
        raise BadBlock(f'block size {d} outside [1, {n}]')
    groups = ceil_div(n, d)
    pad = groups * d - n
    left = inst.vectors.astype(bool)
    right = inst.vectors.astype(bool)
    if pad:
        ones = np.ones((pad, f), dtype=bool)
        left = np.hstack([np.vstack([left, ones]),
                          np.array([[False, True]] * n + [[True, True]] * pad, dtype=bool)])
        right = np.hstack([np.vstack([right, ones]),
                           np.array([[True, False]] * n + [[True, True]] * pad, dtype=bool)])
    width = left.shape[1]
    VA = left.reshape(groups, d, width)
    VB = right.reshape(groups, d, width)
    A = np.broadcast_to(VA[:, :, None, :], (groups, d, d, width)).reshape(groups, d * d * width)
    B = np.broadcast_to(VB.transpose(1, 2, 0)[None], (d, d, width, groups)).reshape(d * d * width, groups)
    color = [(k, l) for k in range(d) for l in range(d) for _ in range(width)]
    palette = [(k, l) for k in range(d) for l in range(d)]
    current_ledger().record('ov-cbmm', {'inner': d * d * width, 'rows': groups, 'colors': len(palette)},
                            {'inner': d * d * width, 'rows': groups, 'colors': d * d},
                            {'inner': 'd^2 f', 'rows': 'n/d', 'colors': 'd^2'},
                            n=n, d=d, f=f, padded=pad)
    bmm = ColorfulBmmInstance(np.ascontiguousarray(A), np.ascontiguousarray(B), color, palette,
                              provenance={'construction': 'ov-cbmm', 'd': d})
    return OvBmm(bmm, n, d, width)

def decode_ov(red: OvBmm, vectors: np.ndarray, out: np.ndarray) -> Tuple[bool, Optional[Tuple[int, int]]]:
    '''an entry that misses a color names two groups holding an orthogonal pair'''
    if red.n < 2:
        return False, None
    V = vectors.astype(np.int64)
    for i, j in zip(*np.nonzero(~out)):
        for k in range(red.d):
            a = int(i) * red.d + k
            for l in range(red.d):
                b = int(j) * red.d + l
                if a >= red.n or b >= red.n or V[a] @ V[b]:
                    continue
                if a == b:
                    b = 1 if a == 0 else 0
                return True, (min(a, b), max(a, b))
    return False, None

# (min,+) -> Colorful-BMM

def _perturbed_argmin(A: Matrix, B: Matrix, i: int, j: int) -> int:
    best = 0
    for k in range(1, len(B)):
        if compare_perturbed(PerturbedReal(A[i][k], k), PerturbedReal(B[k][j]),
                             PerturbedReal(A[i][best], best), PerturbedReal(B[best][j])) == Ordering.LESS:
            best = k
    return best

class BitRound(NamedTuple):
    t: int
    instance: Optional[ColorfulBmmInstance]
    # rows and columns of the instance are the rows and columns of A, B
    forced: Optional[bool]
    bad: Set[Tuple[int, int]]

def bit_round(A: Matrix, B: Matrix, t: int, threshold: float) -> BitRound:
    '''
    Bit t of argmin_k (A[i,k] + k delta + B[k,j]) is 1 iff every k outside
    K_t is beaten by some k' in K_t. Index (k,k',I), colored k, is set in
    row i when A[i,k'] - A[i,k] ranks in the left half of I and in column
    j when B[k,j] - B[k',j] ranks in its right half. Indices set in at
    most `threshold` rows are dropped and their (i,j) pairs returned as bad.
    '''
    n, d, m = check_shapes(A, B)
    ones = [k for k in range(d) if (k >> t) & 1]
    zeros = [k for k in range(d) if not (k >> t) & 1]
    # AND over an empty set is true, OR over an empty set false
    if not zeros:
        return BitRound(t, None, True, set())
    if not ones:
        return BitRound(t, None, False, set())
    items = []
    for k in zeros:
        for k2 in ones:
            for i in range(n):
                items.append((('L', i, k, k2), Difference(A[i][k2], A[i][k], eps=k2 - k)))
            for j in range(m):
                items.append((('R', j, k, k2), Difference(B[k][j], B[k2][j])))
    ranks = RankList(items, ledger=current_ledger())
    L = ranks.universe_log
    rows: Dict[Tuple, Set[int]] = defaultdict(set)
    cols: Dict[Tuple, Set[int]] = defaultdict(set)
    for k in zeros:
        for k2 in ones:
            for i in range(n):
                for h in half_keys(ranks.rank_of(('L', i, k, k2)), L, 'left'):
                    rows[(k, k2, h)].add(i)
            for j in range(m):
                for h in half_keys(ranks.rank_of(('R', j, k, k2)), L, 'right'):
                    cols[(k, k2, h)].add(j)
    high = []
    bad: Set[Tuple[int, int]] = set()
    for triple in sorted(rows):
        if triple not in cols:
            continue
        if len(rows[triple]) > threshold:
            high.append(triple)
        else:
            bad.update((i, j) for i in rows[triple] for j in cols[triple])
    current_ledger().record('minplus-cbmm-round', {'inner': len(high), 'bad_pairs': len(bad)},
                            {'inner': len(zeros) * len(ones) * n * max(L, 1) / threshold} if threshold >= 1 else {},
                            {'inner': '|K0||K1| n levels / threshold'} if threshold >= 1 else {},
                            t=t, threshold=threshold)
    if {k for k, _, _ in high} != set(zeros):
        # some k outside K_t keeps no index: its OR is empty for every good pair
        return BitRound(t, None, False, bad)
    Am = np.zeros((n, len(high)), dtype=bool)
    Bm = np.zeros((len(high), m), dtype=bool)
    for c, triple in enumerate(high):
        Am[sorted(rows[triple]), c] = True
        Bm[c, sorted(cols[triple])] = True
    inst = ColorfulBmmInstance(Am, Bm, [k for k, _, _ in high], zeros,
                               provenance={'construction': 'minplus-cbmm', 't': t})
    return BitRound(t, inst, None, bad)

def default_threshold(n: int, d: int) -> float:
    '''pairs whose triples fall below n^(1-eps)/d^2 in a round are scanned directly'''
    return max(n, 1) ** (1 - get_config().eps) / max(d * d, 1)

def minplus_to_colorful_bmm(A: Matrix, B: Matrix, d: Optional[int] = None,
                            bmm_oracle: BmmOracle = colorful_bmm,
                            threshold: Optional[float] = None,
                            jobs: Optional[int] = None) -> Tuple[Matrix, List[List[int]]]:
    '''
    argmins bit by bit through Colorful-BMM (k delta breaks ties toward
    the smallest k); pairs touched by a dropped index are scanned directly
    '''
    n, inner, m = check_shapes(A, B)
    if d is not None and d != inner:
        raise ShapeMismatch(f'inner dimension {inner}, expected {d}')
    d = inner
    if threshold is None:
        threshold = default_threshold(n, d)
    rounds = [bit_round(A, B, t, threshold) for t in range(ceil_log2(d) if d > 1 else 0)]
    pending = [r for r in rounds if r.instance is not None]
    answers = dict(zip((r.t for r in pending),
                       map_answers(bmm_oracle, [r.instance for r in pending], jobs)))
    bad = set().union(*(r.bad for r in rounds)) if rounds else set()
    argmins = [[0] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            if (i, j) in bad:
                argmins[i][j] = _perturbed_argmin(A, B, i, j)
                continue
            k = 0
            for r in rounds:
                bit = r.forced if r.instance is None else bool(answers[r.t][i, j])
                if bit:
                    k |= 1 << r.t
            argmins[i][j] = k
    values: Matrix = []
    for i in range(n):
        row = []
        for j in range(m):
            k = argmins[i][j]
            v = A[i][k].add(B[k][j])
            if v.is_infinite:
                argmins[i][j] = 0
            row.append(v)
        values.append(row)
    current_ledger().record('minplus-cbmm', {'rounds': len(rounds), 'bmm_calls': len(pending),
                                             'bad_pairs': len(bad)},
                            {'rounds': ceil_log2(d) if d > 1 else 0, 'bad_pairs': n * m},
                            {'rounds': 'ceil(log2 d)', 'bad_pairs': 'n*m'},
                            n=n, d=d, m=m, threshold=threshold)
    return values, argmins

# Colorful-BMM -> ACP-Tri-Co

class TriCoFromBmm(NamedTuple):
    instance: TriCoInstance
    # entry (i,j) -> ACP color pair
    pairs: Dict[Tuple[int, int], Tuple[Hashable, Hashable]]

def colorful_bmm_to_acp_trico(inst: ColorfulBmmInstance, p: Optional[int] = None) -> TriCoFromBmm:
    '''
    rows in part A, inner indices in part C (colored by their color),
    columns in part B; rows and columns fully joined, i-t when A[i,t],
    j-t when B[t,j]. The pair (i,j) is collected by every C color iff
    entry (i,j) is true.
    '''
    colors: List[Hashable] = []
    parts: List[str] = []
    edges: List[Tuple[int, int]] = []
    rows = []
    for i in range(inst.n1):
        rows.append(len(colors))
        colors.append(('i', i))
        parts.append('A')
    cols = []
    for j in range(inst.n2):
        cols.append(len(colors))
        colors.append(('j', j))
        parts.append('B')
    per_color: Dict[Hashable, int] = defaultdict(int)
    for t, c in enumerate(inst.color):
        if c == PAD_COLOR:
            continue
        per_color[c] += 1
        u = len(colors)
        colors.append(('k', c))
        parts.append('C')
        edges.extend((rows[i], u) for i in np.nonzero(inst.A[:, t])[0])
        edges.extend((cols[j], u) for j in np.nonzero(inst.B[t, :])[0])
    edges.extend((a, b) for a in rows for b in cols)
    largest = max(per_color.values(), default=1)
    if p is not None and largest > p:
        raise NotLight(f'a color has {largest} inner indices, p={p}')
    variant = 'light' if p is not None else 'tripartite'
    out = TriCoInstance(colors, [(int(a), int(b)) for a, b in edges], variant=variant, parts=parts, p=p,
                        provenance={'construction': 'cbmm-acptrico'})
    current_ledger().record('cbmm-acptrico', {'nodes': len(colors), 'largest_class': largest},
                            {'nodes': inst.n1 + inst.n2 + inst.inner},
                            {'nodes': 'n1 + n2 + inner'})
    pairs = {(i, j): (('i', i), ('j', j)) for i in range(inst.n1) for j in range(inst.n2)}
    return TriCoFromBmm(out, pairs)

def decode_acp_bmm(red: TriCoFromBmm, acp: Dict[Tuple[Hashable, Hashable], bool], n1: int, n2: int) -> np.ndarray:
    out = np.zeros((n1, n2), dtype=bool)
    for (i, j), pair in red.pairs.items():
        out[i, j] = acp[pair]
    return out

class OvTriCo(NamedTuple):
    instance: TriCoInstance
    n: int

def ov_to_trico_light(inst: OVInstance, d: int) -> OvTriCo:
    '''every color triple collected iff no entry misses a color iff no orthogonal pair'''
    bmm = ov_to_colorful_bmm(inst, d)
    red = colorful_bmm_to_acp_trico(bmm.instance, p=bmm.width)
    return OvTriCo(red.instance, inst.n)

def decode_ov_trico(red: OvTriCo, collected: bool) -> bool:
    return red.n >= 2 and not collected

# Colorful-BMM -> strings

class StringsFromBmm(NamedTuple):
    strings: StringPair
    n: int
    slots: int
    # palette size; the aligned similarity must reach it
    d: int

    def shift(self, i: int, j: int) -> int:
        '''shift of the pattern that lays P_j over T_i'''
        return self.n * (self.slots + 1) + i * self.slots - j * (self.slots + 1)

def colorful_bmm_to_strings(inst: ColorfulBmmInstance, f: Optional[int] = None) -> StringsFromBmm:
    '''
    Inner indices are renumbered so that the s-th index of color l sits
    at s*n + l; T = $^{n(nf+1)} T_1..T_n1 $^{n(nf+1)} and P = P_1#..#P_n2
    with T_i[k] = color(k) if A[i,k] else '$', P_j[k] = color(k) if B[k,j]
    else '#'. At the shift aligning P_j with T_i only P_j can match a
    color, so the similarity there equals the palette size iff entry
    (i,j) is true.
    '''
    d = len(inst.palette)
    n = max(inst.n1, inst.n2, d, 1)
    code = {c: r for r, c in enumerate(inst.palette)}
    members = {c: inst.indices_of(c) for c in inst.palette}
    largest = max((len(v) for v in members.values()), default=0)
    if f is None:
        f = max(largest, 1)
    elif largest > f:
        raise TooManyPerColor(f'a color has {largest} inner indices, f={f}')
    slots = n * f
    Ar = np.zeros((inst.n1, slots), dtype=bool)
    Br = np.zeros((slots, inst.n2), dtype=bool)
    slot_color: List[Optional[int]] = [None] * slots
    for c, idx in members.items():
        for s, k in enumerate(idx):
            pos = s * n + code[c]
            slot_color[pos] = code[c]
            Ar[:, pos] = inst.A[:, k]
            Br[pos, :] = inst.B[k, :]
    margin = ['$'] * (n * (slots + 1))
    text: List[Hashable] = list(margin)
    for i in range(inst.n1):
        text.extend(slot_color[k] if Ar[i, k] else '$' for k in range(slots))
    text.extend(margin)
    pattern: List[Hashable] = []
    for j in range(inst.n2):
        if j:
            pattern.append('#')
        pattern.extend(slot_color[k] if Br[k, j] else '#' for k in range(slots))
    current_ledger().record('cbmm-strings', {'N': len(text), 'M': len(pattern), 'alphabet': d + 2},
                            {'N': (2 * n + inst.n1) * (slots + 1), 'alphabet': d + 3},
                            {'N': '(2n + n1)(nf + 1)', 'alphabet': 'd + 3'}, n=n, f=f)
    sp = StringPair(text, pattern, provenance={'construction': 'cbmm-strings'})
    return StringsFromBmm(sp, n, slots, d)

def decode_strings(red: StringsFromBmm, similarity: Sequence[int], n1: int, n2: int) -> np.ndarray:
    out = np.zeros((n1, n2), dtype=bool)
    for i in range(n1):
        for j in range(n2):
            out[i, j] = similarity[red.shift(i, j)] == red.d
    return out

# Colorful-BMM -> colorful sparse triangles

class ColorfulSparse(NamedTuple):
    instance: ColoredSparseGraph
    # query edge -> entry (i,j)
    entries: Dict[int, Tuple[int, int]]

def colorful_bmm_to_colorful_sparse_tri(inst: ColorfulBmmInstance) -> ColorfulSparse:
    '''rows, inner indices (colored) and columns as a tripartite graph; every row-column pair is queried'''
    b = SparseGraphBuilder()
    colors: Dict[int, Hashable] = {}
    for t, c in enumerate(inst.color):
        if c == PAD_COLOR:
            continue
        mid = b.node(('k', t), 'y')
        colors[mid] = c
        for i in np.nonzero(inst.A[:, t])[0]:
            b.edge(b.node(('i', int(i)), 'x'), mid)
        for j in np.nonzero(inst.B[t, :])[0]:
            b.edge(mid, b.node(('j', int(j)), 'z'))
    entries = {}
    for i in range(inst.n1):
        for j in range(inst.n2):
            entries[b.query(b.node(('i', i), 'x'), b.node(('j', j), 'z'))] = (i, j)
    g = b.build(provenance={'construction': 'cbmm-colorsparse'})
    node_colors = [colors.get(u, PAD_COLOR) for u in range(g.n)]
    current_ledger().record('cbmm-colorsparse', {'nodes': g.n, 'edges': g.m},
                            {'nodes': inst.n1 + inst.n2 + inst.inner,
                             'edges': inst.n1 * inst.n2 + int(inst.A.sum()) + int(inst.B.sum())},
                            {'nodes': 'n1 + n2 + inner', 'edges': 'n1*n2 + nnz(A) + nnz(B)'})
    return ColorfulSparse(ColoredSparseGraph(g, node_colors, inst.palette), entries)

def decode_colorful_sparse(red: ColorfulSparse, answers: Dict[int, bool], n1: int, n2: int) -> np.ndarray:
    out = np.zeros((n1, n2), dtype=bool)
    for e, (i, j) in red.entries.items():
        out[i, j] = answers[e]
    return out

# Colorful-BMM -> (distinct,=)-product

ROW_TOKEN = -1
COLUMN_TOKEN = -2

def colorful_bmm_to_distinct_eq(inst: ColorfulBmmInstance) -> Tuple[np.ndarray, np.ndarray, int]:
    '''
    A'[i,k] = color code of k where A[i,k], else -1; B'[k,j] likewise with
    -2. The distinct equal values of (i,j) are the witnessed colors.
    '''
    code = {c: r for r, c in enumerate(inst.palette)}
    colors = np.array([code.get(c, ROW_TOKEN) for c in inst.color], dtype=np.int64).reshape(-1)
    # padding indices never match
    live = colors >= 0
    A2 = np.where(inst.A & live[None, :], colors[None, :], ROW_TOKEN)
    B2 = np.where(inst.B & live[:, None], colors[:, None], COLUMN_TOKEN)
    return A2.astype(np.int64), B2.astype(np.int64), len(inst.palette)

def decode_distinct_eq(counts: np.ndarray, palette_size: int) -> np.ndarray:
    return counts == palette_size
