'''
problem instances, validators and the interchange document
'''

from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Type
import json
import logging
from collections import defaultdict

import networkx as nx
import numpy as np
from pydantic import BaseModel, ValidationError

from .errors import ParseError, ShapeMismatch, ValidationFailed
from .numeric import RestrictedReal, real
from .utils import freeze, thaw

logger = logging.getLogger(__name__)

Matrix = List[List[RestrictedReal]]

PAD_COLOR = '!'

def _matrix_out(m: Matrix) -> List[List[str]]:
    return [[x.to_text() for x in row] for row in m]

def _matrix_in(rows: Any) -> Matrix:
    return [[real(x) for x in row] for row in rows]

def _bool_out(m: np.ndarray) -> List[List[int]]:
    return [[int(x) for x in row] for row in m]

def _bool_in(rows: Any, ncols: Optional[int] = None) -> np.ndarray:
    m = np.array(rows, dtype=bool)
    if m.ndim != 2:
        m = m.reshape((len(rows), ncols or 0))
    return m

def map_matrix(m: Matrix, fn: Callable[[RestrictedReal], RestrictedReal]) -> Matrix:
    return [[fn(x) for x in row] for row in m]

def shape(m: Matrix) -> Tuple[int, int]:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    for row in m:
        if len(row) != cols:
            raise ShapeMismatch(f'ragged matrix: row of length {len(row)} in a {rows}x{cols} matrix')
    return rows, cols

class Violation(NamedTuple):
    invariant: str
    location: str

    def __str__(self) -> str:
        return f'{self.invariant} at {self.location}'

class Instance:
    kind: str = ''
    provenance: Dict[str, Any]

    def params(self) -> Dict[str, Any]:
        return {}

    def to_payload(self) -> Dict[str, Any]:
        raise NotImplementedError

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'Instance':
        raise NotImplementedError

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.kind == other.kind and self.to_payload() == other.to_payload()

    def __repr__(self) -> str:
        return '<{} {}>'.format(self.__class__.__name__, self.params())

class ThreeSumInstance(Instance):
    kind = '3sum'

    def __init__(self, A: Sequence[RestrictedReal], B: Sequence[RestrictedReal],
                 C: Sequence[RestrictedReal], provenance: Optional[Dict[str, Any]] = None):
        self.A = list(A)
        self.B = list(B)
        self.C = list(C)
        self.provenance = provenance or {}

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def n_hat(self) -> int:
        return len(self.C)

    def params(self) -> Dict[str, Any]:
        return {'n': self.n, 'n_hat': self.n_hat}

    def map_reals(self, fn: Callable[[RestrictedReal], RestrictedReal]) -> 'ThreeSumInstance':
        return ThreeSumInstance([fn(x) for x in self.A], [fn(x) for x in self.B],
                                [fn(x) for x in self.C], dict(self.provenance))

    def to_payload(self) -> Dict[str, Any]:
        return {'A': [x.to_text() for x in self.A],
                'B': [x.to_text() for x in self.B],
                'C': [x.to_text() for x in self.C]}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'ThreeSumInstance':
        return cls([real(x) for x in payload['A']],
                   [real(x) for x in payload['B']],
                   [real(x) for x in payload['C']])

class MinPlusInstance(Instance):
    kind = 'minplus'

    def __init__(self, A: Matrix, B: Matrix, provenance: Optional[Dict[str, Any]] = None):
        self.A = A
        self.B = B
        self.provenance = provenance or {}

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def d(self) -> int:
        return len(self.B)

    def params(self) -> Dict[str, Any]:
        return {'n': self.n, 'd': self.d}

    def map_reals(self, fn: Callable[[RestrictedReal], RestrictedReal]) -> 'MinPlusInstance':
        return MinPlusInstance(map_matrix(self.A, fn), map_matrix(self.B, fn), dict(self.provenance))

    def to_payload(self) -> Dict[str, Any]:
        return {'A': _matrix_out(self.A), 'B': _matrix_out(self.B)}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'MinPlusInstance':
        return cls(_matrix_in(payload['A']), _matrix_in(payload['B']))

class WeightedDigraph(Instance):
    kind = 'digraph'

    def __init__(self, W: Matrix, provenance: Optional[Dict[str, Any]] = None):
        self.W = W
        self.provenance = provenance or {}

    @property
    def n(self) -> int:
        return len(self.W)

    def params(self) -> Dict[str, Any]:
        return {'n': self.n}

    def map_reals(self, fn: Callable[[RestrictedReal], RestrictedReal]) -> 'WeightedDigraph':
        return WeightedDigraph(map_matrix(self.W, fn), dict(self.provenance))

    def to_payload(self) -> Dict[str, Any]:
        return {'W': _matrix_out(self.W)}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'WeightedDigraph':
        return cls(_matrix_in(payload['W']))

class WeightedTripartiteGraph(Instance):
    '''
    parts I, J, K; absent edges weigh +inf
    '''
    kind = 'exacttri'

    def __init__(self, w_ij: Matrix, w_ik: Matrix, w_kj: Matrix,
                 provenance: Optional[Dict[str, Any]] = None):
        self.w_ij = w_ij
        self.w_ik = w_ik
        self.w_kj = w_kj
        self.provenance = provenance or {}

    @property
    def ni(self) -> int:
        return len(self.w_ij)

    @property
    def nj(self) -> int:
        return len(self.w_ij[0]) if self.w_ij else (len(self.w_kj[0]) if self.w_kj else 0)

    @property
    def nk(self) -> int:
        return len(self.w_kj)

    def params(self) -> Dict[str, Any]:
        return {'ni': self.ni, 'nj': self.nj, 'nk': self.nk}

    def map_reals(self, fn: Callable[[RestrictedReal], RestrictedReal]) -> 'WeightedTripartiteGraph':
        return WeightedTripartiteGraph(map_matrix(self.w_ij, fn), map_matrix(self.w_ik, fn),
                                       map_matrix(self.w_kj, fn), dict(self.provenance))

    def to_payload(self) -> Dict[str, Any]:
        return {'ni': self.ni, 'nj': self.nj, 'nk': self.nk,
                'w_ij': _matrix_out(self.w_ij),
                'w_ik': _matrix_out(self.w_ik),
                'w_kj': _matrix_out(self.w_kj)}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'WeightedTripartiteGraph':
        g = cls(_matrix_in(payload['w_ij']), _matrix_in(payload['w_ik']), _matrix_in(payload['w_kj']))
        if (g.ni, g.nj, g.nk) != (payload['ni'], payload['nj'], payload['nk']):
            raise ParseError('part sizes disagree with the weight matrices', field='payload.ni')
        return g

class OVInstance(Instance):
    kind = 'ov'

    def __init__(self, vectors: np.ndarray, provenance: Optional[Dict[str, Any]] = None):
        self.vectors = np.asarray(vectors, dtype=bool)
        self.provenance = provenance or {}

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def f(self) -> int:
        return int(self.vectors.shape[1])

    def params(self) -> Dict[str, Any]:
        return {'n': self.n, 'f': self.f}

    def to_payload(self) -> Dict[str, Any]:
        return {'f': self.f, 'vectors': _bool_out(self.vectors)}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'OVInstance':
        return cls(_bool_in(payload['vectors'], payload['f']))

class SparseGraph(Instance):
    '''
    Undirected simple graph with opaque node labels, optional part tags,
    an optional subset of query edges and optional edge multiplicities.
    '''
    kind = 'sparse'

    def __init__(self, nodes: Sequence[Hashable], edges: Sequence[Tuple[int, int]],
                 parts: Optional[Sequence[str]] = None,
                 queries: Optional[Sequence[int]] = None,
                 multiplicity: Optional[Sequence[int]] = None,
                 provenance: Optional[Dict[str, Any]] = None):
        self.nodes = list(nodes)
        self.edges = [(int(u), int(v)) for u, v in edges]
        self.parts = list(parts) if parts is not None else None
        self.queries = list(queries) if queries is not None else None
        self.multiplicity = list(multiplicity) if multiplicity is not None else None
        self.provenance = provenance or {}
        self._adj: Optional[List[Dict[int, int]]] = None

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    def params(self) -> Dict[str, Any]:
        return {'n': self.n, 'm': self.m}

    def mult(self, e: int) -> int:
        return self.multiplicity[e] if self.multiplicity is not None else 1

    def adjacency(self) -> List[Dict[int, int]]:
        if self._adj is None:
            adj: List[Dict[int, int]] = [dict() for _ in self.nodes]
            for e, (u, v) in enumerate(self.edges):
                adj[u][v] = self.mult(e)
                adj[v][u] = self.mult(e)
            self._adj = adj
        return self._adj

    def degree(self, u: int) -> int:
        return len(self.adjacency()[u])

    def query_edges(self) -> List[int]:
        if self.queries is None:
            return list(range(self.m))
        return list(self.queries)

    def nodes_in(self, part: str) -> List[int]:
        assert self.parts is not None, 'graph carries no part tags'
        return [u for u, p in enumerate(self.parts) if p == part]

    def subgraph(self, keep: Iterable[int]) -> Tuple['SparseGraph', List[int]]:
        '''
        induced subgraph on kept nodes; returns the graph and, per new
        edge index, the old edge index
        '''
        keep = sorted(set(keep))
        new_id = {u: i for i, u in enumerate(keep)}
        edges = []
        mults = []
        edge_map = []
        for e, (u, v) in enumerate(self.edges):
            if u in new_id and v in new_id:
                edge_map.append(e)
                edges.append((new_id[u], new_id[v]))
                mults.append(self.mult(e))
        old_to_new = {old: new for new, old in enumerate(edge_map)}
        queries = None
        if self.queries is not None:
            queries = [old_to_new[e] for e in self.queries if e in old_to_new]
        g = SparseGraph([self.nodes[u] for u in keep], edges,
                        parts=[self.parts[u] for u in keep] if self.parts is not None else None,
                        queries=queries,
                        multiplicity=mults if self.multiplicity is not None else None,
                        provenance=dict(self.provenance))
        return g, edge_map

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        for u, label in enumerate(self.nodes):
            G.add_node(u, label=label, part=self.parts[u] if self.parts else None)
        for e, (u, v) in enumerate(self.edges):
            G.add_edge(u, v, multiplicity=self.mult(e), query=False)
        for e in self.query_edges():
            u, v = self.edges[e]
            G.edges[u, v]['query'] = True
        return G

    def to_payload(self) -> Dict[str, Any]:
        return {'nodes': [thaw(x) for x in self.nodes],
                'edges': [list(e) for e in self.edges],
                'parts': self.parts,
                'queries': self.queries,
                'multiplicity': self.multiplicity}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'SparseGraph':
        return cls([freeze(x) for x in payload['nodes']],
                   [tuple(e) for e in payload['edges']],
                   parts=payload.get('parts'),
                   queries=payload.get('queries'),
                   multiplicity=payload.get('multiplicity'))

class SparseGraphBuilder:
    '''
    Accumulates labelled nodes and edges; repeated edges add multiplicity.
    '''
    def __init__(self) -> None:
        self.nodes: List[Hashable] = []
        self.parts: List[str] = []
        self.index: Dict[Hashable, int] = {}
        self.edge_index: Dict[Tuple[int, int], int] = {}
        self.edges: List[Tuple[int, int]] = []
        self.mults: List[int] = []
        self.queries: List[int] = []

    def node(self, label: Hashable, part: str) -> int:
        u = self.index.get(label)
        if u is None:
            u = len(self.nodes)
            self.index[label] = u
            self.nodes.append(label)
            self.parts.append(part)
        return u

    def edge(self, u: int, v: int, mult: int = 1) -> int:
        assert u != v, 'self-loop'
        key = (u, v) if u < v else (v, u)
        e = self.edge_index.get(key)
        if e is None:
            e = len(self.edges)
            self.edge_index[key] = e
            self.edges.append(key)
            self.mults.append(mult)
        else:
            self.mults[e] += mult
        return e

    def query(self, u: int, v: int) -> int:
        e = self.edge(u, v)
        self.mults[e] = 1
        self.queries.append(e)
        return e

    def build(self, counted: bool = False, provenance: Optional[Dict[str, Any]] = None) -> SparseGraph:
        return SparseGraph(self.nodes, self.edges, parts=self.parts, queries=self.queries,
                           multiplicity=self.mults if counted else None,
                           provenance=provenance)

class SparseBundle(Instance):
    '''several AE-Sparse-Tri instances handed over together'''
    kind = 'bundle'

    def __init__(self, graphs: Sequence[SparseGraph], provenance: Optional[Dict[str, Any]] = None):
        self.graphs = list(graphs)
        self.provenance = provenance or {}

    def params(self) -> Dict[str, Any]:
        return {'count': len(self.graphs), 'n': max((g.n for g in self.graphs), default=0)}

    def to_payload(self) -> Dict[str, Any]:
        return {'graphs': [g.to_payload() for g in self.graphs]}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'SparseBundle':
        return cls([SparseGraph.from_payload(p) for p in payload['graphs']])

class ColoredSparseGraph(Instance):
    kind = 'colored_sparse'

    def __init__(self, graph: SparseGraph, colors: Sequence[Hashable], palette: Sequence[Hashable],
                 provenance: Optional[Dict[str, Any]] = None):
        self.graph = graph
        self.colors = list(colors)
        self.palette = list(palette)
        self.provenance = provenance or {}

    def params(self) -> Dict[str, Any]:
        return {'n': self.graph.n, 'm': self.graph.m, 'palette': len(self.palette)}

    def to_payload(self) -> Dict[str, Any]:
        return {'graph': self.graph.to_payload(),
                'colors': [thaw(c) for c in self.colors],
                'palette': [thaw(c) for c in self.palette]}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'ColoredSparseGraph':
        return cls(SparseGraph.from_payload(payload['graph']),
                   [freeze(c) for c in payload['colors']],
                   [freeze(c) for c in payload['palette']])

class EdgeColoredMultigraph(Instance):
    kind = 'mono'

    def __init__(self, n: int, edges: Sequence[Tuple[int, int, int]],
                 parts: Optional[Sequence[str]] = None,
                 provenance: Optional[Dict[str, Any]] = None):
        self.n = n
        self.edges = [(int(u), int(v), int(c)) for u, v, c in edges]
        self.parts = list(parts) if parts is not None else None
        self.provenance = provenance or {}

    @property
    def m(self) -> int:
        return len(self.edges)

    def colors(self) -> List[int]:
        return sorted({c for _, _, c in self.edges})

    def nodes_in(self, part: str) -> List[int]:
        assert self.parts is not None, 'graph carries no part tags'
        return [u for u, p in enumerate(self.parts) if p == part]

    def params(self) -> Dict[str, Any]:
        return {'n': self.n, 'm': self.m, 'colors': len(self.colors())}

    def to_payload(self) -> Dict[str, Any]:
        return {'n': self.n, 'edges': [list(e) for e in self.edges], 'parts': self.parts}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'EdgeColoredMultigraph':
        return cls(payload['n'], [tuple(e) for e in payload['edges']], parts=payload.get('parts'))

class ColorfulBmmInstance(Instance):
    kind = 'cbmm'

    def __init__(self, A: np.ndarray, B: np.ndarray, color: Sequence[Hashable],
                 palette: Sequence[Hashable], provenance: Optional[Dict[str, Any]] = None):
        self.A = np.asarray(A, dtype=bool)
        self.B = np.asarray(B, dtype=bool)
        self.color = list(color)
        self.palette = list(palette)
        self.provenance = provenance or {}

    @property
    def n1(self) -> int:
        return int(self.A.shape[0])

    @property
    def inner(self) -> int:
        return int(self.A.shape[1])

    @property
    def n2(self) -> int:
        return int(self.B.shape[1])

    @property
    def padded(self) -> bool:
        return PAD_COLOR in self.color

    def indices_of(self, c: Hashable) -> List[int]:
        return [k for k, x in enumerate(self.color) if x == c]

    def params(self) -> Dict[str, Any]:
        return {'n1': self.n1, 'inner': self.inner, 'n2': self.n2, 'colors': len(self.palette)}

    def to_payload(self) -> Dict[str, Any]:
        return {'n1': self.n1, 'inner': self.inner, 'n2': self.n2,
                'A': _bool_out(self.A), 'B': _bool_out(self.B),
                'color': [thaw(c) for c in self.color],
                'palette': [thaw(c) for c in self.palette]}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'ColorfulBmmInstance':
        A = np.array(payload['A'], dtype=bool).reshape((payload['n1'], payload['inner']))
        B = np.array(payload['B'], dtype=bool).reshape((payload['inner'], payload['n2']))
        return cls(A, B, [freeze(c) for c in payload['color']], [freeze(c) for c in payload['palette']])

TRICO_VARIANTS = ('general', 'tripartite', 'light', 'star2')

class TriCoInstance(Instance):
    kind = 'trico'

    def __init__(self, colors: Sequence[Hashable], edges: Sequence[Tuple[int, int]],
                 variant: str = 'tripartite',
                 parts: Optional[Sequence[str]] = None,
                 p: Optional[int] = None,
                 components: Optional[Sequence[int]] = None,
                 provenance: Optional[Dict[str, Any]] = None):
        assert variant in TRICO_VARIANTS, variant
        self.colors = list(colors)
        self.edges = [(int(u), int(v)) for u, v in edges]
        self.variant = variant
        self.parts = list(parts) if parts is not None else None
        self.p = p
        self.components = list(components) if components is not None else None
        self.provenance = provenance or {}

    @property
    def n(self) -> int:
        return len(self.colors)

    @property
    def t(self) -> Optional[int]:
        if self.components is None:
            return None
        return len(set(self.components))

    def palette(self, part: str) -> List[Hashable]:
        assert self.parts is not None
        seen: Dict[Hashable, None] = {}
        for u, x in enumerate(self.parts):
            if x == part:
                seen.setdefault(self.colors[u])
        return list(seen)

    def color_frequency(self) -> Dict[Hashable, int]:
        freq: Dict[Hashable, int] = defaultdict(int)
        for c in self.colors:
            freq[c] += 1
        return dict(freq)

    def params(self) -> Dict[str, Any]:
        return {'n': self.n, 'm': len(self.edges), 'variant': self.variant, 'p': self.p, 't': self.t}

    def to_payload(self) -> Dict[str, Any]:
        return {'colors': [thaw(c) for c in self.colors],
                'edges': [list(e) for e in self.edges],
                'variant': self.variant,
                'parts': self.parts,
                'p': self.p,
                'components': self.components}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'TriCoInstance':
        return cls([freeze(c) for c in payload['colors']],
                   [tuple(e) for e in payload['edges']],
                   variant=payload['variant'],
                   parts=payload.get('parts'),
                   p=payload.get('p'),
                   components=payload.get('components'))

class SetDisjointnessInstance(Instance):
    kind = 'setdisj'

    def __init__(self, universe: int, family: Sequence[Iterable[int]],
                 queries: Sequence[Tuple[int, int]], provenance: Optional[Dict[str, Any]] = None):
        self.universe = universe
        self.family: List[FrozenSet[int]] = [frozenset(s) for s in family]
        self.queries = [(int(a), int(b)) for a, b in queries]
        self.provenance = provenance or {}

    def params(self) -> Dict[str, Any]:
        return {'universe': self.universe, 'family': len(self.family), 'queries': len(self.queries)}

    def to_payload(self) -> Dict[str, Any]:
        return {'universe': self.universe,
                'family': [sorted(s) for s in self.family],
                'queries': [list(q) for q in self.queries]}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'SetDisjointnessInstance':
        return cls(payload['universe'], payload['family'], [tuple(q) for q in payload['queries']])

RESERVED_SYMBOLS = ('!', '#', '$')

class StringPair(Instance):
    kind = 'strings'

    def __init__(self, text: Sequence[Hashable], pattern: Sequence[Hashable],
                 provenance: Optional[Dict[str, Any]] = None):
        self.text = list(text)
        self.pattern = list(pattern)
        self.provenance = provenance or {}

    @property
    def N(self) -> int:
        return len(self.text)

    @property
    def M(self) -> int:
        return len(self.pattern)

    def params(self) -> Dict[str, Any]:
        return {'N': self.N, 'M': self.M}

    def to_payload(self) -> Dict[str, Any]:
        return {'text': self.text, 'pattern': self.pattern}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> 'StringPair':
        return cls(payload['text'], payload['pattern'])

INSTANCE_TYPES: Dict[str, Type[Instance]] = {
    cls.kind: cls for cls in (ThreeSumInstance, MinPlusInstance, WeightedDigraph,
                              WeightedTripartiteGraph, OVInstance, SparseGraph, SparseBundle,
                              ColoredSparseGraph, EdgeColoredMultigraph, ColorfulBmmInstance,
                              TriCoInstance, SetDisjointnessInstance, StringPair)
}

# validators

def _check_matrix(m: Matrix, rows: Optional[int], cols: Optional[int], name: str) -> Optional[Violation]:
    if rows is not None and len(m) != rows:
        return Violation('shape', f'{name} has {len(m)} rows, expected {rows}')
    for i, row in enumerate(m):
        if cols is not None and len(row) != cols:
            return Violation('shape', f'{name}[{i}] has {len(row)} entries, expected {cols}')
        for k, x in enumerate(row):
            if not isinstance(x, RestrictedReal):
                return Violation('real entry', f'{name}[{i}][{k}]')
    return None

def _validate_3sum(inst: ThreeSumInstance) -> Optional[Violation]:
    if len(inst.B) != len(inst.A):
        return Violation('sizes', f'|A|={len(inst.A)} but |B|={len(inst.B)}')
    if inst.n_hat > inst.n:
        return Violation('sizes', f'n_hat={inst.n_hat} exceeds n={inst.n}')
    for name, xs in (('A', inst.A), ('B', inst.B), ('C', inst.C)):
        for i, x in enumerate(xs):
            if x.is_infinite:
                return Violation('finite entry', f'{name}[{i}]')
    return None

def _validate_minplus(inst: MinPlusInstance) -> Optional[Violation]:
    d = len(inst.A[0]) if inst.A else 0
    v = _check_matrix(inst.A, None, d, 'A') or _check_matrix(inst.B, d, inst.n, 'B')
    if v:
        return v
    if d > inst.n:
        return Violation('d <= n', f'd={d}, n={inst.n}')
    return None

def _validate_digraph(inst: WeightedDigraph) -> Optional[Violation]:
    return _check_matrix(inst.W, inst.n, inst.n, 'W')

def _validate_exacttri(g: WeightedTripartiteGraph) -> Optional[Violation]:
    return (_check_matrix(g.w_ij, g.ni, g.nj, 'w_ij')
            or _check_matrix(g.w_ik, g.ni, g.nk, 'w_ik')
            or _check_matrix(g.w_kj, g.nk, g.nj, 'w_kj'))

def _validate_ov(inst: OVInstance) -> Optional[Violation]:
    if inst.vectors.ndim != 2:
        return Violation('shape', 'vectors must form an n x f array')
    return None

def _validate_sparse(g: SparseGraph) -> Optional[Violation]:
    if g.parts is not None and len(g.parts) != g.n:
        return Violation('part tags', f'{len(g.parts)} tags for {g.n} nodes')
    seen = set()
    for e, (u, v) in enumerate(g.edges):
        if not (0 <= u < g.n and 0 <= v < g.n):
            return Violation('node index', f'edge {e}')
        if u == v:
            return Violation('self-loop', f'edge {e} at node {u}')
        key = (min(u, v), max(u, v))
        if key in seen:
            return Violation('duplicate edge', f'edge {e} ({u},{v})')
        seen.add(key)
        if g.parts is not None and g.parts[u] == g.parts[v]:
            return Violation('intra-part edge', f'edge {e} inside part {g.parts[u]}')
    if g.queries is not None:
        for e in g.queries:
            if not 0 <= e < g.m:
                return Violation('query edge', f'edge index {e}')
    if g.multiplicity is not None:
        if len(g.multiplicity) != g.m:
            return Violation('multiplicity', f'{len(g.multiplicity)} values for {g.m} edges')
        for e, k in enumerate(g.multiplicity):
            if k < 1:
                return Violation('multiplicity', f'edge {e} has multiplicity {k}')
    return None

def _validate_bundle(b: SparseBundle) -> Optional[Violation]:
    for i, g in enumerate(b.graphs):
        v = _validate_sparse(g)
        if v:
            return Violation(v.invariant, f'graph {i}: {v.location}')
    return None

def _validate_colored_sparse(cg: ColoredSparseGraph) -> Optional[Violation]:
    v = _validate_sparse(cg.graph)
    if v:
        return v
    if len(cg.colors) != cg.graph.n:
        return Violation('node colors', f'{len(cg.colors)} colors for {cg.graph.n} nodes')
    return None

def _validate_mono(g: EdgeColoredMultigraph) -> Optional[Violation]:
    if g.parts is not None and len(g.parts) != g.n:
        return Violation('part tags', f'{len(g.parts)} tags for {g.n} nodes')
    seen = set()
    for e, (u, v, c) in enumerate(g.edges):
        if not (0 <= u < g.n and 0 <= v < g.n):
            return Violation('node index', f'edge {e}')
        if u == v:
            return Violation('self-loop', f'edge {e} at node {u}')
        key = (min(u, v), max(u, v), c)
        if key in seen:
            return Violation('duplicate colored edge', f'edge {e} ({u},{v},{c})')
        seen.add(key)
        if g.parts is not None and g.parts[u] == g.parts[v]:
            return Violation('intra-part edge', f'edge {e} inside part {g.parts[u]}')
    return None

def _validate_cbmm(inst: ColorfulBmmInstance) -> Optional[Violation]:
    if inst.A.ndim != 2 or inst.B.ndim != 2 or inst.A.shape[1] != inst.B.shape[0]:
        return Violation('shape', f'A {inst.A.shape} and B {inst.B.shape} do not chain')
    if len(inst.color) != inst.inner:
        return Violation('inner colors', f'{len(inst.color)} colors for {inst.inner} inner indices')
    image = {c for c in inst.color if c != PAD_COLOR}
    for c in inst.palette:
        if c not in image:
            return Violation('palette', f'color {c!r} has no inner index')
    if image != set(inst.palette):
        extra = sorted(map(repr, image - set(inst.palette)))
        return Violation('palette', 'inner colors outside the palette: {}'.format(', '.join(extra)))
    for k, c in enumerate(inst.color):
        if c == PAD_COLOR and (inst.A[:, k].any() or inst.B[k, :].any()):
            return Violation('padding', f'padding index {k} is not empty')
    return None

def _tripartite_violation(inst: TriCoInstance) -> Optional[Violation]:
    if inst.parts is None or len(inst.parts) != inst.n:
        return Violation('part tags', 'tripartite variants need one part tag per node')
    for u, x in enumerate(inst.parts):
        if x not in ('A', 'B', 'C'):
            return Violation('part tags', f'node {u} tagged {x!r}')
    for e, (u, v) in enumerate(inst.edges):
        if inst.parts[u] == inst.parts[v]:
            return Violation('intra-part edge', f'edge {e} ({u},{v}) inside part {inst.parts[u]}')
    owner: Dict[Hashable, str] = {}
    for u, c in enumerate(inst.colors):
        part = inst.parts[u]
        if owner.setdefault(c, part) != part:
            return Violation('disjoint color sets', f'color {c!r} used in parts {owner[c]} and {part}')
    return None

def validate_trico_star(inst: TriCoInstance, p: int) -> Optional[Violation]:
    '''
    Tri-Co* structure: disjoint components, tripartite, A colors distinct
    per component, neighbours of an A node have distinct colors, at most
    p nodes of any color per component
    '''
    v = _tripartite_violation(inst)
    if v:
        return v
    if inst.components is None or len(inst.components) != inst.n:
        return Violation('components', 'one component index per node required')
    assert inst.parts is not None
    for e, (u, w) in enumerate(inst.edges):
        if inst.components[u] != inst.components[w]:
            return Violation('cross-component edge', f'edge {e} ({u},{w})')
    per_comp: Dict[Tuple[int, Hashable], int] = defaultdict(int)
    for u, c in enumerate(inst.colors):
        key = (inst.components[u], c)
        per_comp[key] += 1
        if inst.parts[u] == 'A' and per_comp[key] > 1:
            return Violation('distinct A colors', f'component {inst.components[u]} color {c!r}')
        if per_comp[key] > p:
            return Violation('color multiplicity', f'component {inst.components[u]} color {c!r}')
    nbr_colors: Dict[Tuple[int, Hashable], int] = {}
    for u, w in inst.edges:
        for a, b in ((u, w), (w, u)):
            if inst.parts[a] == 'A':
                key2 = (a, inst.colors[b])
                if nbr_colors.setdefault(key2, b) != b:
                    return Violation('distinct neighbour colors', f'node {a} color {inst.colors[b]!r}')
    return None

def _validate_trico(inst: TriCoInstance) -> Optional[Violation]:
    for e, (u, v) in enumerate(inst.edges):
        if not (0 <= u < inst.n and 0 <= v < inst.n) or u == v:
            return Violation('edge endpoints', f'edge {e} ({u},{v})')
    if len({(min(u, v), max(u, v)) for u, v in inst.edges}) != len(inst.edges):
        return Violation('duplicate edge', 'edge list')
    if inst.variant == 'general':
        return None
    v = _tripartite_violation(inst)
    if v:
        return v
    if inst.variant == 'light':
        if inst.p is None or inst.p < 1:
            return Violation('light parameter', f'p={inst.p}')
        for c, k in inst.color_frequency().items():
            if k > inst.p:
                return Violation('color multiplicity', f'color {c!r} has {k} nodes, p={inst.p}')
    if inst.variant == 'star2':
        return validate_trico_star(inst, 1)
    return None

def _validate_setdisj(inst: SetDisjointnessInstance) -> Optional[Violation]:
    for i, s in enumerate(inst.family):
        for x in s:
            if not 0 <= x < inst.universe:
                return Violation('universe', f'family[{i}] holds {x}')
    for q, (a, b) in enumerate(inst.queries):
        if not (0 <= a < len(inst.family) and 0 <= b < len(inst.family)):
            return Violation('query index', f'query {q} ({a},{b})')
    return None

def _validate_strings(s: StringPair) -> Optional[Violation]:
    if s.M > s.N:
        return Violation('M <= N', f'M={s.M}, N={s.N}')
    return None

_validators: Dict[str, Callable[[Any], Optional[Violation]]] = {
    '3sum': _validate_3sum,
    'minplus': _validate_minplus,
    'digraph': _validate_digraph,
    'exacttri': _validate_exacttri,
    'ov': _validate_ov,
    'sparse': _validate_sparse,
    'bundle': _validate_bundle,
    'colored_sparse': _validate_colored_sparse,
    'mono': _validate_mono,
    'cbmm': _validate_cbmm,
    'trico': _validate_trico,
    'setdisj': _validate_setdisj,
    'strings': _validate_strings,
}

def validate(inst: Instance) -> Optional[Violation]:
    '''None when every invariant of the instance type holds'''
    try:
        return _validators[inst.kind](inst)
    except ShapeMismatch as e:
        return Violation('shape', str(e))

def ensure_valid(inst: Instance) -> Instance:
    violation = validate(inst)
    if violation is not None:
        raise ValidationFailed(str(violation))
    return inst

# interchange document

class InstanceDocument(BaseModel):
    kind: str
    params: Dict[str, Any] = {}
    payload: Dict[str, Any]
    provenance: Dict[str, Any] = {}

def serialize(inst: Instance) -> str:
    doc = InstanceDocument(kind=inst.kind,
                           params=inst.params(),
                           payload=inst.to_payload(),
                           provenance=inst.provenance)
    return json.dumps(doc.model_dump(), sort_keys=True, indent=1) + '\n'

def deserialize(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno) from e
    try:
        doc = InstanceDocument.model_validate(data)
    except ValidationError as e:
        err = e.errors()[0]
        raise ParseError(err['msg'], field='.'.join(str(x) for x in err['loc'])) from e
    cls = INSTANCE_TYPES.get(doc.kind)
    if cls is None:
        raise ParseError(f'unknown instance kind {doc.kind!r}', field='kind')
    try:
        inst = cls.from_payload(doc.payload)
    except KeyError as e:
        raise ParseError('missing entry', field='payload.{}'.format(e.args[0])) from e
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise ParseError(str(e), field='payload') from e
    inst.provenance = doc.provenance
    return inst

def load_instance(path: str) -> Instance:
    with open(path) as f:
        return deserialize(f.read())
