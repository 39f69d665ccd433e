'''
pipeline registry: each id wires one reduction chain to its target
oracle, decode and source oracle
'''

from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel

from .errors import BadParams, UnknownPipeline
from .instances import (ColoredSparseGraph, ColorfulBmmInstance, EdgeColoredMultigraph, Instance,
                        MinPlusInstance, OVInstance, SparseBundle, SparseGraph, StringPair,
                        ThreeSumInstance, TriCoInstance, WeightedDigraph, WeightedTripartiteGraph)
from .ledger import current_ledger
from .numeric import INF, RestrictedReal, tattling, untattled
from .oracles import (ae_colorful_sparse_tri, ae_exact_tri, ae_mono_tri, ae_sparse_tri, all_nums_3sum,
                      apsp_reference, colorful_bmm, degeneracy, distinct_hamming_similarity, min_plus,
                      ov, tri_co)
from .red_3sum import BucketedPair, all_nums_3sum_via_sparse, anchor, build_3sum_graph, \
    decode_bucket_triangles, real3sum_to_exact_tri, route_targets
from .red_apsp import apsp, build_variant_graphs, min_plus_rect, min_plus_square, take_columns
from .red_colorful import (bit_round, colorful_bmm_to_acp_trico, colorful_bmm_to_colorful_sparse_tri,
                           colorful_bmm_to_strings, decode_acp_bmm, decode_colorful_sparse, decode_ov,
                           decode_ov_trico, decode_strings, default_threshold, minplus_to_colorful_bmm,
                           ov_to_colorful_bmm, ov_to_trico_light)
from .red_exacttri import PredSuccState, ae_exact_tri_via_sparse, build_exacttri_graphs
from .red_mono import (decode_acp, decode_overlay, mono_to_acp_trico_light, mono_to_int_exact_tri,
                       overlay, query_edges)
from .runner import map_answers
from .tri_co import combine_light, light_to_star2, original_to_tripartite, trico_to_light, \
    tripartite_to_original
from .utils import get_config, thaw

logger = logging.getLogger(__name__)

class PipelineParams(BaseModel):
    seed: int = 0
    d: Optional[int] = None
    g: Optional[int] = None
    eps: Optional[float] = None
    threshold: Optional[float] = None
    p: Optional[int] = None
    jobs: Optional[int] = None

class Reduction(NamedTuple):
    targets: List[Instance]
    # json-ready description of how target answers map back
    decode: Any
    oracle: Optional[Callable[[Any], Any]] = None
    finish: Optional[Callable[[List[Any]], Any]] = None

ReduceFn = Callable[[Any, PipelineParams], Reduction]
SolveFn = Callable[[Any, PipelineParams], Any]

class Pipeline:
    '''
    reduce builds the target instances of one reduction step; solve runs
    the whole chain (defaulting to reduce, target oracle, decode);
    reference answers the source problem directly
    '''
    def __init__(self, name: str, sources: Tuple[str, ...], sample: Tuple[str, Dict[str, Any]],
                 reduce: ReduceFn, reference: Callable[[Any], Any],
                 solve: Optional[SolveFn] = None):
        self.name = name
        self.sources = sources
        self.sample = sample
        self._reduce = reduce
        self._solve = solve
        self._reference = reference

    def check_source(self, inst: Instance) -> None:
        if inst.kind not in self.sources:
            raise BadParams(f'{self.name} reads {"/".join(self.sources)} instances, got {inst.kind}')

    def reduce(self, inst: Instance, params: PipelineParams) -> Reduction:
        self.check_source(inst)
        return self._reduce(inst, params)

    def solve(self, inst: Instance, params: PipelineParams) -> Any:
        self.check_source(inst)
        if self._solve is not None:
            return self._solve(inst, params)
        red = self._reduce(inst, params)
        assert red.oracle is not None and red.finish is not None, self.name
        return red.finish(map_answers(red.oracle, red.targets, params.jobs))

    def reference(self, inst: Instance) -> Any:
        return self._reference(inst)

    def __repr__(self) -> str:
        return '<Pipeline {}>'.format(self.name)

_pipelines: Dict[str, Pipeline] = {}

def pipeline(name: str, sources: Sequence[str], sample: Tuple[str, Dict[str, Any]],
             reference: Callable[[Any], Any], solve: Optional[SolveFn] = None):
    def _wrapper(fn: ReduceFn) -> ReduceFn:
        _pipelines[name] = Pipeline(name, tuple(sources), sample, fn, reference, solve)
        return fn
    return _wrapper

def pipeline_ids() -> List[str]:
    return sorted(_pipelines)

def get_pipeline(name: str) -> Pipeline:
    p = _pipelines.get(name)
    if p is None:
        raise UnknownPipeline(f'unknown pipeline {name!r}, expected one of {", ".join(pipeline_ids())}')
    return p

# answers

def canonical(answer: Any) -> Any:
    '''a json-ready form in which equal answers compare equal'''
    if isinstance(answer, RestrictedReal):
        return untattled(answer).to_text()
    if isinstance(answer, (bool, np.bool_)):
        return bool(answer)
    if isinstance(answer, (int, np.integer)):
        return int(answer)
    if isinstance(answer, np.ndarray):
        return canonical(answer.tolist())
    if isinstance(answer, dict):
        items = [[canonical_key(k), canonical(v)] for k, v in answer.items()]
        return sorted(items, key=repr)
    if isinstance(answer, (list, tuple)):
        return [canonical(x) for x in answer]
    if answer is None or isinstance(answer, (str, float)):
        return answer
    raise TypeError(f'no canonical form for {type(answer).__name__}')

def canonical_key(key: Any) -> Any:
    if isinstance(key, (tuple, list)):
        return [canonical_key(k) for k in key]
    if isinstance(key, (np.integer, np.bool_)):
        return key.item()
    return key

def corrupt(answer: Any) -> Tuple[Any, bool]:
    '''change the first leaf of a canonical answer: booleans flip, numbers and texts move'''
    if isinstance(answer, bool):
        return not answer, True
    if isinstance(answer, int):
        return answer + 1, True
    if isinstance(answer, str):
        return answer + '+1', True
    if isinstance(answer, list):
        out = list(answer)
        for pos, x in enumerate(out):
            value, done = corrupt(x)
            if done:
                out[pos] = value
                return out, True
        return out, False
    return answer, False

def jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return [[jsonable(k), jsonable(v)] for k, v in value.items()]
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value, key=repr) if isinstance(value, (set, frozenset)) else value
        return [jsonable(x) for x in items]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer, np.bool_)):
        return value.item()
    if isinstance(value, RestrictedReal):
        return untattled(value).to_text()
    return thaw(value)

def instance_size(inst: Instance) -> Tuple[int, int]:
    '''(nodes, edges) of a target instance'''
    if isinstance(inst, SparseGraph):
        return inst.n, inst.m
    if isinstance(inst, ColoredSparseGraph):
        return inst.graph.n, inst.graph.m
    if isinstance(inst, TriCoInstance):
        return inst.n, len(inst.edges)
    if isinstance(inst, EdgeColoredMultigraph):
        return inst.n, inst.m
    if isinstance(inst, WeightedTripartiteGraph):
        finite = sum(not x.is_infinite for m in (inst.w_ij, inst.w_ik, inst.w_kj) for row in m for x in row)
        return inst.ni + inst.nj + inst.nk, finite
    if isinstance(inst, ColorfulBmmInstance):
        return inst.n1 + inst.inner + inst.n2, int(inst.A.sum()) + int(inst.B.sum())
    if isinstance(inst, StringPair):
        return inst.N + inst.M, 0
    return 0, 0

def record_reduction(name: str, red: Reduction) -> None:
    nodes = edges = degen = 0
    for t in red.targets:
        n, m = instance_size(t)
        nodes += n
        edges += m
        graph = t.graph if isinstance(t, ColoredSparseGraph) else t
        if isinstance(graph, SparseGraph):
            degen = max(degen, degeneracy(graph)[0])
    ledger = current_ledger()
    ledger.record('reduce', {'instances': len(red.targets), 'nodes': nodes, 'edges': edges,
                             'degeneracy': degen, 'comparisons': ledger.comparisons}, pipeline=name)

def run(name: str, inst: Instance, params: Optional[PipelineParams] = None,
        audit: bool = False, fault: bool = False) -> Tuple[Any, Any]:
    '''
    (decoded answer, reference answer), both canonical. audit runs the
    chain on tattling reals; fault corrupts the decoded answer.
    '''
    params = params or PipelineParams()
    p = get_pipeline(name)
    p.check_source(inst)
    source = inst
    if audit and hasattr(inst, 'map_reals'):
        source = inst.map_reals(tattling)  # type: ignore
    got = canonical(p.solve(source, params))
    if fault:
        got, done = corrupt(got)
        if not done:
            logger.warning('%s: empty answer, nothing to corrupt', name)
    return got, canonical(p.reference(inst))

# helpers

def _isqrt_at_least_one(n: int) -> int:
    return max(1, math.isqrt(max(n, 0)))

def _one_shot(targets: List[Instance], decode: Any, oracle: Callable[[Any], Any],
              finish: Callable[[List[Any]], Any]) -> Reduction:
    return Reduction(targets, jsonable(decode), oracle, finish)

def _found(answers: Dict[Any, Any]) -> Dict[Any, bool]:
    return {k: bool(rec.found) for k, rec in answers.items()}

def _trico_both(inst: TriCoInstance) -> Tuple[bool, Dict[Any, bool]]:
    return tri_co(inst, 'decide'), tri_co(inst, 'acp')

def _trico_acp(inst: TriCoInstance) -> Dict[Any, bool]:
    return tri_co(inst, 'acp')

def _trico_decide(inst: TriCoInstance) -> bool:
    return tri_co(inst, 'decide')

def _exact_tri_decide(g: WeightedTripartiteGraph) -> Dict[Any, Any]:
    return ae_exact_tri(g)

def _mono_queries(g: EdgeColoredMultigraph) -> Dict[int, bool]:
    ref = ae_mono_tri(g)
    return {e: ref[e].found for e in query_edges(g)}

# (min,+) and APSP

def _minplus_values(inst: Instance) -> Any:
    if isinstance(inst, WeightedDigraph):
        return apsp_reference(inst)
    return min_plus(inst)[0]  # type: ignore

def _apsp_solve(inst: Instance, p: PipelineParams) -> Any:
    if isinstance(inst, WeightedDigraph):
        return apsp(inst, p.d or max(inst.n, 1), seed=p.seed, jobs=p.jobs)
    assert isinstance(inst, MinPlusInstance)
    if p.d is not None and p.d < inst.d:
        return min_plus_square(inst.A, inst.B, p.d, seed=p.seed, jobs=p.jobs)[0]
    return min_plus_rect(inst.A, inst.B, seed=p.seed, jobs=p.jobs)[0]

@pipeline('apsp-sparse', ('minplus', 'digraph'), ('minplus', {'n': 8, 'd': 4}),
          reference=_minplus_values, solve=_apsp_solve)
def _apsp_sparse(inst: Instance, p: PipelineParams) -> Reduction:
    '''the first improvement round, every pair starting from the first inner index'''
    if isinstance(inst, WeightedDigraph):
        A = B = inst.W
    else:
        A, B = inst.A, inst.B  # type: ignore
    d = len(B)
    cols = list(range(min(p.d or d, d)))
    A_s, B_s = take_columns(A, B, cols)
    k0 = [[0] * (len(B[0]) if B else 0) for _ in A]
    out = build_variant_graphs(A_s, B_s, k0)
    return Reduction(out.targets, jsonable({'tags': out.tags, 'queries': out.decode}))

# Exact-Triangle

def _exact_found(g: WeightedTripartiteGraph) -> Dict[Any, bool]:
    return _found(ae_exact_tri(g))

def _exacttri_solver(route: str) -> SolveFn:
    def _solve(g: WeightedTripartiteGraph, p: PipelineParams) -> Any:
        return ae_exact_tri_via_sparse(g, p.d or max(g.nk, 1), seed=p.seed, route=route, jobs=p.jobs)
    return _solve

def _exacttri_first_round(g: WeightedTripartiteGraph, p: PipelineParams) -> Reduction:
    '''graphs of the first strip with every pair between the sentinels'''
    if g.nk == 0:
        return Reduction([], [])
    cols = list(range(min(p.d or g.nk, g.nk)))
    A_s, B_s = take_columns(g.w_ik, g.w_kj, cols)
    C = [[INF if w.is_infinite else w.neg() for w in row] for row in g.w_ij]
    out = build_exacttri_graphs(A_s, B_s, PredSuccState(C))
    return Reduction(out.targets, jsonable({'tags': out.tags, 'queries': out.decode}))

pipeline('exacttri-sparse', ('exacttri',), ('exacttri', {'n': 6, 'planted': True}),
         reference=_exact_found, solve=_exacttri_solver('witness'))(_exacttri_first_round)
pipeline('exacttri-count', ('exacttri',), ('exacttri', {'n': 6, 'planted': True}),
         reference=_exact_found, solve=_exacttri_solver('count'))(_exacttri_first_round)

# 3SUM

def _bucket_size(inst: ThreeSumInstance, p: PipelineParams) -> int:
    return p.d or _isqrt_at_least_one(inst.n)

def _3sum_solver(route: str) -> SolveFn:
    def _solve(inst: ThreeSumInstance, p: PipelineParams) -> Any:
        return all_nums_3sum_via_sparse(inst, _bucket_size(inst, p), seed=p.seed, route=route)
    return _solve

def _3sum_first_graph(route: str) -> ReduceFn:
    def _reduce(inst: ThreeSumInstance, p: PipelineParams) -> Reduction:
        '''witness: the quadruple graph between the sentinels; count: the pair graph anchored on column 0'''
        if inst.n == 0:
            return Reduction([], [])
        bp = BucketedPair(inst.A, inst.B, _bucket_size(inst, p))
        targets = route_targets(bp, inst.C)
        if not targets:
            return Reduction([], [])
        if route == 'count':
            for t in targets:
                anchor(bp, t, 0)
            targets = [t for t in targets if t.succ is not None]
            if not targets:
                return Reduction([], [])
            out = build_3sum_graph(bp, targets, 'pair', n_hat=inst.n_hat)
        else:
            out = build_3sum_graph(bp, targets, 'quad', n_hat=inst.n_hat)
        return Reduction(out.targets, jsonable({'tags': out.tags, 'queries': out.decode,
                                                'targets': [[t.q, t.i, t.j] for t in targets]}))
    return _reduce

pipeline('3sum-sparse', ('3sum',), ('3sum', {'n': 8, 'planted': True}),
         reference=all_nums_3sum, solve=_3sum_solver('witness'))(_3sum_first_graph('witness'))
pipeline('3sum-count', ('3sum',), ('3sum', {'n': 8, 'planted': True}),
         reference=all_nums_3sum, solve=_3sum_solver('count'))(_3sum_first_graph('count'))

@pipeline('3sum-exacttri', ('3sum',), ('3sum', {'n': 9, 'planted': True}), reference=all_nums_3sum)
def _3sum_exacttri(inst: ThreeSumInstance, p: PipelineParams) -> Reduction:
    g = p.g or _isqrt_at_least_one(min(len(inst.A), len(inst.B), len(inst.C)))
    red = real3sum_to_exact_tri(inst, g, p.eps)
    return _one_shot(red.output.targets,
                     {'partial': red.partial, 'tags': red.output.tags, 'cells': red.output.decode},
                     _exact_tri_decide,
                     lambda answers: decode_bucket_triangles(inst, red, answers))

# monochromatic triangles

def _bundle_reference(b: SparseBundle) -> List[Dict[int, bool]]:
    return [_found(ae_sparse_tri(g)) for g in b.graphs]

@pipeline('mono-overlay', ('bundle',), ('bundle', {'n': 6, 'count': 3}), reference=_bundle_reference)
def _mono_overlay(b: SparseBundle, p: PipelineParams) -> Reduction:
    ovl = overlay(b.graphs, seed=p.seed)
    return _one_shot([ovl.graph], {'source': ovl.source}, ae_mono_tri,
                     lambda answers: decode_overlay(b.graphs, ovl, answers[0]))

@pipeline('mono-acptrico', ('mono',), ('mono', {'n': 4, 'colors': 3}), reference=_mono_queries)
def _mono_acptrico(g: EdgeColoredMultigraph, p: PipelineParams) -> Reduction:
    red = mono_to_acp_trico_light(g)
    return _one_shot([red.instance], {'pairs': red.pairs, 'bits': red.bits}, _trico_acp,
                     lambda answers: decode_acp(red, answers[0]))

@pipeline('mono-intexact', ('mono',), ('mono', {'n': 4, 'colors': 3}), reference=_mono_queries)
def _mono_intexact(g: EdgeColoredMultigraph, p: PipelineParams) -> Reduction:
    red = mono_to_int_exact_tri(g)

    def finish(answers: List[Any]) -> Dict[int, bool]:
        return {e: answers[0][cell].found for cell, e in red.edges.items()}

    return _one_shot([red.graph], {'edges': red.edges, 'encoding': red.encoding}, _exact_tri_decide, finish)

# Colorful-BMM

def _ov_decide(inst: OVInstance) -> bool:
    return ov(inst)[0]

def _ov_block(inst: OVInstance, p: PipelineParams) -> int:
    return p.d or _isqrt_at_least_one(inst.n)

@pipeline('ov-cbmm', ('ov',), ('ov', {'n': 8, 'f': 4}), reference=_ov_decide)
def _ov_cbmm(inst: OVInstance, p: PipelineParams) -> Reduction:
    red = ov_to_colorful_bmm(inst, _ov_block(inst, p))
    return _one_shot([red.instance], {'n': red.n, 'd': red.d, 'width': red.width}, colorful_bmm,
                     lambda answers: decode_ov(red, inst.vectors, answers[0])[0])

def _minplus_both(inst: MinPlusInstance) -> Any:
    return min_plus(inst)

def _minplus_cbmm_solve(inst: MinPlusInstance, p: PipelineParams) -> Any:
    return minplus_to_colorful_bmm(inst.A, inst.B, threshold=p.threshold, jobs=p.jobs)

@pipeline('minplus-cbmm', ('minplus',), ('minplus', {'n': 8, 'd': 4}),
          reference=_minplus_both, solve=_minplus_cbmm_solve)
def _minplus_cbmm(inst: MinPlusInstance, p: PipelineParams) -> Reduction:
    '''one Colorful-BMM instance per argmin bit that is not settled directly'''
    threshold = p.threshold if p.threshold is not None else default_threshold(inst.n, inst.d)
    bits = (inst.d - 1).bit_length()
    rounds = [bit_round(inst.A, inst.B, t, threshold) for t in range(bits)]
    pending = [r for r in rounds if r.instance is not None]
    return Reduction([r.instance for r in pending],  # type: ignore
                     jsonable({'bits': [r.t for r in pending],
                               'forced': [[r.t, r.forced] for r in rounds if r.instance is None],
                               'scanned': sorted(set().union(*(r.bad for r in rounds)) if rounds else set())}))

def _bmm_reference(inst: ColorfulBmmInstance) -> np.ndarray:
    return colorful_bmm(inst)

@pipeline('cbmm-acptrico', ('cbmm',), ('cbmm', {'n1': 4, 'inner': 6, 'colors': 3}), reference=_bmm_reference)
def _cbmm_acptrico(inst: ColorfulBmmInstance, p: PipelineParams) -> Reduction:
    red = colorful_bmm_to_acp_trico(inst, p.p)
    return _one_shot([red.instance], {'pairs': red.pairs}, _trico_acp,
                     lambda answers: decode_acp_bmm(red, answers[0], inst.n1, inst.n2))

@pipeline('ov-trico', ('ov',), ('ov', {'n': 8, 'f': 4}), reference=_ov_decide)
def _ov_trico(inst: OVInstance, p: PipelineParams) -> Reduction:
    red = ov_to_trico_light(inst, _ov_block(inst, p))
    return _one_shot([red.instance], {'n': red.n}, _trico_decide,
                     lambda answers: decode_ov_trico(red, answers[0]))

@pipeline('cbmm-strings', ('cbmm',), ('cbmm', {'n1': 3, 'inner': 4, 'colors': 2}), reference=_bmm_reference)
def _cbmm_strings(inst: ColorfulBmmInstance, p: PipelineParams) -> Reduction:
    red = colorful_bmm_to_strings(inst)
    return _one_shot([red.strings], {'n': red.n, 'slots': red.slots, 'd': red.d},
                     distinct_hamming_similarity,
                     lambda answers: decode_strings(red, answers[0], inst.n1, inst.n2))

@pipeline('cbmm-colorsparse', ('cbmm',), ('cbmm', {'n1': 4, 'inner': 6, 'colors': 3}),
          reference=_bmm_reference)
def _cbmm_colorsparse(inst: ColorfulBmmInstance, p: PipelineParams) -> Reduction:
    red = colorful_bmm_to_colorful_sparse_tri(inst)
    return _one_shot([red.instance], {'entries': red.entries}, ae_colorful_sparse_tri,
                     lambda answers: decode_colorful_sparse(red, answers[0], inst.n1, inst.n2))

# Triangle Collection

def _trico_reference(g: TriCoInstance) -> Any:
    return _trico_both(g)

@pipeline('trico-tripartite', ('trico',), ('trico', {'variant': 'general', 'n': 8, 'colors': 4, 'density': 0.7}),
          reference=_trico_reference)
def _trico_tripartite(g: TriCoInstance, p: PipelineParams) -> Reduction:
    '''general instances go to the tripartite form, tripartite ones back to the general form'''
    if g.variant == 'general':
        gadget = original_to_tripartite(g)

        def finish(answers: List[Any]) -> Any:
            decide, acp = answers[0]
            return decide, {pair: acp[key] for key, pair in gadget.pairs.items()}

        return _one_shot([gadget.instance], {'pairs': gadget.pairs}, _trico_both, finish)
    if g.variant != 'tripartite':
        raise BadParams(f'trico-tripartite reads general or tripartite instances, got {g.variant}')
    orig = tripartite_to_original(g)
    KA, KB = g.palette('A'), g.palette('B')

    def back(answers: List[Any]) -> Any:
        decide, acp = answers[0]
        return decide, {(a, b): acp[(a, b)] for a in KA for b in KB}

    return _one_shot([orig], {'A': KA, 'B': KB}, _trico_both, back)

@pipeline('trico-light', ('trico',), ('trico', {'variant': 'tripartite', 'n': 6, 'colors': 3, 'density': 0.8}),
          reference=_trico_reference)
def _trico_light(g: TriCoInstance, p: PipelineParams) -> Reduction:
    eps = p.eps if p.eps is not None else get_config().eps
    split = trico_to_light(g, eps)

    def finish(answers: List[Any]) -> Any:
        decide, acp = answers[0]
        return combine_light(g, split, decide, 'decide'), combine_light(g, split, acp, 'acp')

    return _one_shot([split.residual], {'heavy': split.heavy, 'partial': split.partial}, _trico_both, finish)

@pipeline('light-star2', ('trico',), ('trico', {'variant': 'light', 'colors': 2, 'p': 2}),
          reference=_trico_reference)
def _light_star2(g: TriCoInstance, p: PipelineParams) -> Reduction:
    star = light_to_star2(g)
    return _one_shot([star], {'components': star.t, 'p': g.p}, _trico_both, lambda answers: answers[0])
