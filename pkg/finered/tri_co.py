'''
Triangle Collection variants: original <-> tripartite, light -> star2
(one component per index triple) and heavy-color splitting into a light
residual
'''

from typing import Any, Dict, Hashable, List, NamedTuple, Set, Tuple
import itertools
import logging
import math
from collections import defaultdict

import numpy as np

from .errors import NotLight, NotTripartite
from .instances import TriCoInstance, validate
from .ledger import current_ledger
from .oracles import trico_palettes

logger = logging.getLogger(__name__)

PARTS = ('A', 'B', 'C')

class Gadget(NamedTuple):
    instance: TriCoInstance
    # tripartite ACP pair -> original ACP pair; pairs of one color are synthetic
    pairs: Dict[Tuple[Hashable, Hashable], Tuple[Hashable, Hashable]]

def original_to_tripartite(g: TriCoInstance) -> Gadget:
    '''
    Per color k add nodes k, k', k'' with the edge k'-k'', and k-l',
    k-l'' for every pair of colors: every triple with a repeated color
    gets a triangle, no distinct triple does. Then three copies of the
    nodes, colors (k, copy), with (u_a, v_b) for a != b per edge.
    '''
    palette = sorted(set(g.colors), key=repr)
    colors: List[Hashable] = list(g.colors)
    edges: List[Tuple[int, int]] = list(g.edges)
    plain = {}
    primes = {}
    for k in palette:
        plain[k] = len(colors)
        primes[k] = (len(colors) + 1, len(colors) + 2)
        colors.extend([k, k, k])
        edges.append(primes[k])
    for k in palette:
        for l in palette:
            edges.append((plain[k], primes[l][0]))
            edges.append((plain[k], primes[l][1]))
    size = len(colors)
    out_colors = [(c, a) for a in range(3) for c in colors]
    parts = [PARTS[a] for a in range(3) for _ in colors]
    out_edges = []
    for u, v in edges:
        for a, b in itertools.permutations(range(3), 2):
            out_edges.append((a * size + u, b * size + v))
    pairs = {((a, 0), (b, 1)): (a, b) for a in palette for b in palette if a != b}
    current_ledger().record('trico-tripartite', {'nodes': 3 * size, 'edges': len(out_edges)},
                            {'nodes': 3 * (g.n + 3 * len(palette)),
                             'edges': 6 * (len(g.edges) + len(palette) + 2 * len(palette) ** 2)},
                            {'nodes': '3(n + 3|K|)', 'edges': '6(m + |K| + 2|K|^2)'})
    inst = TriCoInstance(out_colors, out_edges, variant='tripartite', parts=parts,
                         provenance={'construction': 'trico-tripartite'})
    return Gadget(inst, pairs)

def tripartite_to_original(g: TriCoInstance) -> TriCoInstance:
    '''
    For each part X, a clique over one node per color outside X: every
    distinct triple not drawn from K_A x K_B x K_C gets a triangle.
    '''
    KA, KB, KC = trico_palettes(g)
    every = KA + KB + KC
    colors: List[Hashable] = list(g.colors)
    edges = list(g.edges)
    for X in (set(KA), set(KB), set(KC)):
        clique = []
        for k in every:
            if k not in X:
                clique.append(len(colors))
                colors.append(k)
        edges.extend(itertools.combinations(clique, 2))
    current_ledger().record('trico-original', {'nodes': len(colors)},
                            {'nodes': g.n + 2 * len(every)}, {'nodes': 'n + 2|K|'})
    return TriCoInstance(colors, edges, variant='general', provenance={'construction': 'trico-original'})

def _ranks_by_color(g: TriCoInstance) -> List[int]:
    '''position of each node among the nodes of its color'''
    seen: Dict[Hashable, int] = defaultdict(int)
    out = []
    for c in g.colors:
        out.append(seen[c])
        seen[c] += 1
    return out

def light_to_star2(g: TriCoInstance) -> TriCoInstance:
    '''
    Component (i,j,k) in [p]^3 holds the i-th A nodes, j-th B nodes and
    k-th C nodes of each color with their edges; a color triple has a
    triangle in some component iff it has one in g.
    '''
    if g.variant != 'light' or g.p is None:
        raise NotLight(f'{g.variant} instance is not light')
    v = validate(g)
    if v is not None:
        raise NotLight(str(v))
    assert g.parts is not None
    p = g.p
    rank = _ranks_by_color(g)
    colors: List[Hashable] = []
    parts: List[str] = []
    components: List[int] = []
    copies: Dict[Tuple[int, int], int] = {}
    axis = {'A': 0, 'B': 1, 'C': 2}
    triples = list(itertools.product(range(p), repeat=3))
    for comp, ijk in enumerate(triples):
        for u in range(g.n):
            if ijk[axis[g.parts[u]]] == rank[u]:
                copies[(u, comp)] = len(colors)
                colors.append(g.colors[u])
                parts.append(g.parts[u])
                components.append(comp)
    edges = []
    for comp in range(len(triples)):
        for u, w in g.edges:
            if (u, comp) in copies and (w, comp) in copies:
                edges.append((copies[(u, comp)], copies[(w, comp)]))
    current_ledger().record('light-star2', {'components': len(triples), 'nodes': len(colors)},
                            {'components': p ** 3, 'nodes': g.n * p * p},
                            {'components': 'p^3', 'nodes': 'n p^2'}, p=p)
    return TriCoInstance(colors, edges, variant='star2', parts=parts, components=components,
                         provenance={'construction': 'light-star2', 'p': p})

class LightSplit(NamedTuple):
    # (A color, B color, C color) triples collected through a heavy color
    partial: Set[Tuple[Hashable, Hashable, Hashable]]
    residual: TriCoInstance
    heavy: Set[Hashable]

def trico_to_light(g: TriCoInstance, eps: float) -> LightSplit:
    '''
    Colors with at least n^eps nodes are handled by an incidence product:
    (A @ A.T)[u,v] counts the common neighbours of color c, so every edge
    (u,v) with a nonzero entry collects (color u, c, color v). The nodes
    of the remaining colors form a light instance.
    '''
    if g.parts is None:
        raise NotTripartite('instance carries no part tags')
    tau = max(g.n, 1) ** eps
    freq = g.color_frequency()
    heavy = {c for c, k in freq.items() if k >= tau}
    partial: Set[Tuple[Hashable, Hashable, Hashable]] = set()
    incident = np.zeros((g.n, g.n), dtype=np.int64)
    for u, w in g.edges:
        incident[u, w] = incident[w, u] = 1
    for c in sorted(heavy, key=repr):
        members = [u for u in range(g.n) if g.colors[u] == c]
        M = incident[:, members] @ incident[members, :]
        for u, w in g.edges:
            if M[u, w] > 0:
                by_part = {g.parts[u]: g.colors[u], g.parts[w]: g.colors[w], g.parts[members[0]]: c}
                partial.add((by_part['A'], by_part['B'], by_part['C']))
    keep = [u for u in range(g.n) if g.colors[u] not in heavy]
    index = {u: r for r, u in enumerate(keep)}
    edges = [(index[u], index[w]) for u, w in g.edges if u in index and w in index]
    p = max(1, math.ceil(tau) - 1)
    residual = TriCoInstance([g.colors[u] for u in keep], edges, variant='light',
                             parts=[g.parts[u] for u in keep], p=p,
                             provenance={'construction': 'trico-light', 'eps': eps})
    current_ledger().record('trico-light', {'heavy_colors': len(heavy), 'residual_nodes': len(keep)},
                            {'heavy_colors': g.n / tau, 'residual_nodes': g.n},
                            {'heavy_colors': 'n^(1-eps)', 'residual_nodes': 'n'}, eps=eps)
    logger.debug('%d heavy colors, %d collected triples, residual of %d nodes',
                 len(heavy), len(partial), len(keep))
    return LightSplit(partial, residual, heavy)

def combine_light(g: TriCoInstance, split: LightSplit, residual_answer: Any, mode: str = 'decide') -> Any:
    '''
    merge the heavy-color triples with a Tri-Co answer on the residual;
    triples without a heavy color are the residual's business
    '''
    assert mode in ('decide', 'acp'), mode
    KA, KB, KC = trico_palettes(g)
    heavy = split.heavy

    def heavy_ok(a: Hashable, b: Hashable, cs: List[Hashable]) -> bool:
        return all((a, b, c) in split.partial for c in cs if c in heavy or a in heavy or b in heavy)

    if mode == 'decide':
        return bool(residual_answer) and all(heavy_ok(a, b, KC) for a in KA for b in KB)
    out = {}
    for a in KA:
        for b in KB:
            ok = heavy_ok(a, b, KC)
            if a not in heavy and b not in heavy:
                ok = ok and residual_answer.get((a, b), True)
            out[(a, b)] = ok
    return out
