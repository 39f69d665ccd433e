'''
seeded instance generators
'''

from typing import Any, Callable, Dict, List, Optional, Tuple, Type
import logging

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .errors import BadParams
from .instances import (ColorfulBmmInstance, EdgeColoredMultigraph, Instance, MinPlusInstance,
                        OVInstance, SetDisjointnessInstance, SparseBundle, SparseGraph,
                        StringPair, ThreeSumInstance, TriCoInstance, WeightedDigraph,
                        WeightedTripartiteGraph, ensure_valid)
from .numeric import INF, RestrictedReal, real

logger = logging.getLogger(__name__)

Generator = Callable[[np.random.Generator, Any], Instance]

_generators: Dict[str, Tuple[Type[BaseModel], Generator]] = {}

def generator(kind: str, params_model: Type[BaseModel]):
    def _wrapper(fn: Generator) -> Generator:
        _generators[kind] = (params_model, fn)
        return fn
    return _wrapper

def generator_kinds() -> List[str]:
    return sorted(_generators)

def generate(kind: str, params: Optional[Dict[str, Any]] = None, seed: int = 0) -> Instance:
    '''
    deterministic for fixed (kind, params, seed)
    '''
    entry = _generators.get(kind)
    if entry is None:
        raise BadParams(f'unknown instance kind {kind!r}')
    model, fn = entry
    try:
        p = model(**(params or {}))
    except ValidationError as e:
        err = e.errors()[0]
        raise BadParams('{}: {}'.format('.'.join(str(x) for x in err['loc']), err['msg'])) from e
    rng = np.random.default_rng(seed)
    inst = fn(rng, p)
    inst.provenance = {'generator': kind, 'seed': seed, 'params': p.model_dump()}
    logger.debug('generated %s %s', kind, inst.params())
    return ensure_valid(inst)

def _distinct_ints(rng: np.random.Generator, count: int, span: int) -> List[int]:
    if 2 * span + 1 < count:
        raise BadParams(f'span {span} too small for {count} distinct values')
    return [int(x) for x in rng.choice(np.arange(-span, span + 1), size=count, replace=False)]

def _weights(rng: np.random.Generator, rows: int, cols: int, span: int,
             density: float = 1.0, low: Optional[int] = None) -> List[List[RestrictedReal]]:
    lo = -span if low is None else low
    values = rng.integers(lo, span + 1, size=(rows, cols))
    present = rng.random(size=(rows, cols)) < density
    return [[real(int(values[r, c])) if present[r, c] else INF for c in range(cols)]
            for r in range(rows)]

class ThreeSumParams(BaseModel):
    n: int = Field(ge=1)
    n_hat: Optional[int] = Field(default=None, ge=0)
    span: Optional[int] = Field(default=None, ge=1)
    planted: bool = False

@generator('3sum', ThreeSumParams)
def _gen_3sum(rng: np.random.Generator, p: ThreeSumParams) -> ThreeSumInstance:
    n_hat = p.n if p.n_hat is None else p.n_hat
    if n_hat > p.n:
        raise BadParams(f'n_hat={n_hat} exceeds n={p.n}')
    span = p.span or max(4 * p.n, 8)
    A = _distinct_ints(rng, p.n, span)
    B = _distinct_ints(rng, p.n, span)
    C = [int(x) for x in rng.integers(-2 * span, 2 * span + 1, size=n_hat)]
    if p.planted:
        if n_hat < 1:
            raise BadParams('a planted triple needs n_hat >= 1')
        i, j, q = int(rng.integers(p.n)), int(rng.integers(p.n)), int(rng.integers(n_hat))
        C[q] = -(A[i] + B[j])
    return ThreeSumInstance([real(x) for x in A], [real(x) for x in B], [real(x) for x in C])

class MinPlusParams(BaseModel):
    n: int = Field(ge=1)
    d: Optional[int] = Field(default=None, ge=1)
    span: int = Field(default=10, ge=0)
    inf_rate: float = Field(default=0.0, ge=0.0, le=1.0)

@generator('minplus', MinPlusParams)
def _gen_minplus(rng: np.random.Generator, p: MinPlusParams) -> MinPlusInstance:
    d = p.n if p.d is None else p.d
    if d > p.n:
        raise BadParams(f'd={d} exceeds n={p.n}')
    A = _weights(rng, p.n, d, p.span, 1.0 - p.inf_rate)
    B = _weights(rng, d, p.n, p.span, 1.0 - p.inf_rate)
    return MinPlusInstance(A, B)

class DigraphParams(BaseModel):
    n: int = Field(ge=1)
    span: int = Field(default=20, ge=0)
    density: float = Field(default=0.6, ge=0.0, le=1.0)
    negative: bool = False

@generator('digraph', DigraphParams)
def _gen_digraph(rng: np.random.Generator, p: DigraphParams) -> WeightedDigraph:
    base = rng.integers(0, p.span + 1, size=(p.n, p.n))
    potential = rng.integers(0, p.span + 1, size=p.n) if p.negative else np.zeros(p.n, dtype=int)
    present = rng.random(size=(p.n, p.n)) < p.density
    W = [[real(int(base[u, v] + potential[u] - potential[v])) if present[u, v] and u != v else INF
          for v in range(p.n)] for u in range(p.n)]
    return WeightedDigraph(W)

class ExactTriParams(BaseModel):
    n: int = Field(default=4, ge=1)
    ni: Optional[int] = Field(default=None, ge=1)
    nj: Optional[int] = Field(default=None, ge=1)
    nk: Optional[int] = Field(default=None, ge=1)
    span: int = Field(default=6, ge=0)
    density: float = Field(default=0.8, ge=0.0, le=1.0)
    planted: bool = False

@generator('exacttri', ExactTriParams)
def _gen_exacttri(rng: np.random.Generator, p: ExactTriParams) -> WeightedTripartiteGraph:
    ni, nj, nk = p.ni or p.n, p.nj or p.n, p.nk or p.n
    w_ij = _weights(rng, ni, nj, p.span, p.density)
    w_ik = _weights(rng, ni, nk, p.span, p.density)
    w_kj = _weights(rng, nk, nj, p.span, p.density)
    if p.planted:
        i, j, k = int(rng.integers(ni)), int(rng.integers(nj)), int(rng.integers(nk))
        a, b = (int(x) for x in rng.integers(-p.span, p.span + 1, size=2))
        w_ik[i][k] = real(a)
        w_kj[k][j] = real(b)
        w_ij[i][j] = real(-(a + b))
    return WeightedTripartiteGraph(w_ij, w_ik, w_kj)

class OVParams(BaseModel):
    n: int = Field(ge=1)
    f: int = Field(ge=1)
    density: float = Field(default=0.6, ge=0.0, le=1.0)
    planted: bool = False

@generator('ov', OVParams)
def _gen_ov(rng: np.random.Generator, p: OVParams) -> OVInstance:
    vectors = rng.random(size=(p.n, p.f)) < p.density
    if p.planted:
        if p.n < 2:
            raise BadParams('a planted orthogonal pair needs n >= 2')
        i, j = (int(x) for x in rng.choice(p.n, size=2, replace=False))
        vectors[j] = vectors[j] & ~vectors[i]
    return OVInstance(vectors)

class SparseParams(BaseModel):
    n: int = Field(ge=1)
    density: float = Field(default=0.3, ge=0.0, le=1.0)
    tripartite: bool = True

def _random_sparse(rng: np.random.Generator, n: int, density: float, tripartite: bool) -> SparseGraph:
    if not tripartite:
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < density]
        return SparseGraph(list(range(n)), edges)
    nodes = [(x, i) for x in ('x', 'y', 'z') for i in range(n)]
    parts = [x for x, _ in nodes]
    edges = []
    queries = []
    for a, b in (('x', 'y'), ('y', 'z'), ('x', 'z')):
        base_a = 'xyz'.index(a) * n
        base_b = 'xyz'.index(b) * n
        for i in range(n):
            for j in range(n):
                if rng.random() < density:
                    if a == 'x' and b == 'z':
                        queries.append(len(edges))
                    edges.append((base_a + i, base_b + j))
    return SparseGraph(nodes, edges, parts=parts, queries=queries)

@generator('sparse', SparseParams)
def _gen_sparse(rng: np.random.Generator, p: SparseParams) -> SparseGraph:
    return _random_sparse(rng, p.n, p.density, p.tripartite)

class BundleParams(BaseModel):
    n: int = Field(ge=1)
    count: int = Field(default=3, ge=1)
    density: float = Field(default=0.4, ge=0.0, le=1.0)

@generator('bundle', BundleParams)
def _gen_bundle(rng: np.random.Generator, p: BundleParams) -> SparseBundle:
    return SparseBundle([_random_sparse(rng, int(rng.integers(1, p.n + 1)), p.density, False)
                         for _ in range(p.count)])

class MonoParams(BaseModel):
    n: int = Field(ge=1)
    colors: int = Field(default=3, ge=1)
    density: float = Field(default=0.6, ge=0.0, le=1.0)
    parallel: float = Field(default=0.0, ge=0.0, le=1.0)
    tripartite: bool = True

@generator('mono', MonoParams)
def _gen_mono(rng: np.random.Generator, p: MonoParams) -> EdgeColoredMultigraph:
    if p.tripartite:
        total = 3 * p.n
        parts: Optional[List[str]] = [x for x in 'IJK' for _ in range(p.n)]
        pairs = [(a * p.n + u, b * p.n + v)
                 for a, b in ((0, 1), (0, 2), (1, 2)) for u in range(p.n) for v in range(p.n)]
    else:
        total = p.n
        parts = None
        pairs = [(u, v) for u in range(p.n) for v in range(u + 1, p.n)]
    edges = []
    for u, v in pairs:
        if rng.random() >= p.density:
            continue
        colors = {int(rng.integers(p.colors))}
        while rng.random() < p.parallel and len(colors) < p.colors:
            colors.add(int(rng.integers(p.colors)))
        edges.extend((u, v, c) for c in sorted(colors))
    return EdgeColoredMultigraph(total, edges, parts=parts)

class CbmmParams(BaseModel):
    n1: int = Field(ge=1)
    n2: Optional[int] = Field(default=None, ge=1)
    inner: int = Field(ge=0)
    colors: int = Field(default=2, ge=0)
    density: float = Field(default=0.5, ge=0.0, le=1.0)

@generator('cbmm', CbmmParams)
def _gen_cbmm(rng: np.random.Generator, p: CbmmParams) -> ColorfulBmmInstance:
    n2 = p.n2 or p.n1
    if p.colors > p.inner:
        raise BadParams(f'{p.colors} colors need at least as many inner indices, got {p.inner}')
    color = [int(c) for c in rng.permutation([k % p.colors for k in range(p.inner)])] if p.colors else []
    if not p.colors and p.inner:
        raise BadParams('inner indices need at least one color')
    A = rng.random(size=(p.n1, p.inner)) < p.density
    B = rng.random(size=(p.inner, n2)) < p.density
    return ColorfulBmmInstance(A, B, color, list(range(p.colors)))

class TriCoParams(BaseModel):
    variant: str = 'tripartite'
    n: int = Field(default=4, ge=1)
    colors: int = Field(default=2, ge=1)
    p: int = Field(default=2, ge=1)
    t: int = Field(default=2, ge=1)
    density: float = Field(default=0.5, ge=0.0, le=1.0)

def _tripartite_edges(rng: np.random.Generator, parts: List[str], density: float,
                      components: Optional[List[int]] = None) -> List[Tuple[int, int]]:
    edges = []
    for u in range(len(parts)):
        for v in range(u + 1, len(parts)):
            if parts[u] == parts[v]:
                continue
            if components is not None and components[u] != components[v]:
                continue
            if rng.random() < density:
                edges.append((u, v))
    return edges

@generator('trico', TriCoParams)
def _gen_trico(rng: np.random.Generator, p: TriCoParams) -> TriCoInstance:
    if p.variant == 'general':
        colors = [int(c) for c in rng.integers(p.colors, size=p.n)]
        edges = [(u, v) for u in range(p.n) for v in range(u + 1, p.n) if rng.random() < p.density]
        return TriCoInstance(colors, edges, variant='general')

    offsets = {'A': 0, 'B': p.colors, 'C': 2 * p.colors}
    node_colors: List[int] = []
    parts: List[str] = []
    components: Optional[List[int]] = None
    if p.variant == 'tripartite':
        for part in 'ABC':
            picks = [k % p.colors for k in range(max(p.n, p.colors))]
            for c in rng.permutation(picks):
                node_colors.append(offsets[part] + int(c))
                parts.append(part)
    elif p.variant == 'light':
        for part in 'ABC':
            for c in range(p.colors):
                for _ in range(int(rng.integers(1, p.p + 1))):
                    node_colors.append(offsets[part] + c)
                    parts.append(part)
    elif p.variant == 'star2':
        components = []
        for comp in range(p.t):
            for part in 'ABC':
                for c in range(p.colors):
                    if rng.random() < 0.75:
                        node_colors.append(offsets[part] + c)
                        parts.append(part)
                        components.append(comp)
    else:
        raise BadParams(f'unknown Tri-Co variant {p.variant!r}')
    # star2 keeps one node per color per component, so neighbour colors stay distinct
    edges = _tripartite_edges(rng, parts, p.density, components)
    return TriCoInstance(node_colors, edges, variant=p.variant, parts=parts,
                         p=p.p if p.variant == 'light' else None,
                         components=components)

class SetDisjParams(BaseModel):
    universe: int = Field(ge=1)
    family: int = Field(default=4, ge=1)
    queries: int = Field(default=4, ge=0)
    density: float = Field(default=0.3, ge=0.0, le=1.0)

@generator('setdisj', SetDisjParams)
def _gen_setdisj(rng: np.random.Generator, p: SetDisjParams) -> SetDisjointnessInstance:
    family = [[x for x in range(p.universe) if rng.random() < p.density] for _ in range(p.family)]
    queries = [(int(a), int(b)) for a, b in rng.integers(p.family, size=(p.queries, 2))]
    return SetDisjointnessInstance(p.universe, family, queries)

class StringParams(BaseModel):
    N: int = Field(ge=1)
    M: int = Field(ge=1)
    alphabet: int = Field(default=3, ge=1)

@generator('strings', StringParams)
def _gen_strings(rng: np.random.Generator, p: StringParams) -> StringPair:
    if p.M > p.N:
        raise BadParams(f'M={p.M} exceeds N={p.N}')
    return StringPair([int(x) for x in rng.integers(p.alphabet, size=p.N)],
                      [int(x) for x in rng.integers(p.alphabet, size=p.M)])
