import json
import numpy as np
import pytest

from finered import (BadParams, ParseError, ValidationFailed, INF, real,
                     ThreeSumInstance, MinPlusInstance, SparseGraph, ColorfulBmmInstance,
                     TriCoInstance, EdgeColoredMultigraph, StringPair,
                     validate, serialize, deserialize, load_instance, generate, generator_kinds)
from finered.instances import SparseGraphBuilder, ensure_valid

from .fixtures import config

SAMPLES = [
    ('3sum', {'n': 6, 'planted': True}),
    ('minplus', {'n': 5, 'd': 3, 'inf_rate': 0.2}),
    ('digraph', {'n': 5, 'negative': True}),
    ('exacttri', {'n': 4, 'planted': True}),
    ('ov', {'n': 6, 'f': 4}),
    ('sparse', {'n': 7}),
    ('bundle', {'n': 5, 'count': 2}),
    ('mono', {'n': 3, 'colors': 2}),
    ('cbmm', {'n1': 3, 'inner': 5, 'colors': 2}),
    ('trico', {'variant': 'light', 'colors': 2, 'p': 2}),
    ('trico', {'variant': 'star2', 'colors': 2, 't': 2}),
    ('setdisj', {'universe': 8}),
    ('strings', {'N': 9, 'M': 3}),
]

def test_kinds():
    assert {kind for kind, _ in SAMPLES} <= set(generator_kinds())

@pytest.mark.parametrize('kind,params', SAMPLES)
def test_generate_is_seeded(config, kind, params):
    a = generate(kind, params, seed=11)
    b = generate(kind, params, seed=11)
    assert a == b
    assert validate(a) is None
    assert a.provenance['seed'] == 11
    back = deserialize(serialize(a))
    assert back == a
    assert back.provenance == a.provenance

def test_generate_bad_params():
    with pytest.raises(BadParams):
        generate('nope', {})
    with pytest.raises(BadParams):
        generate('3sum', {'n': 0})
    with pytest.raises(BadParams):
        generate('minplus', {'n': 3, 'd': 5})
    with pytest.raises(BadParams):
        generate('cbmm', {'n1': 2, 'inner': 1, 'colors': 3})

def test_planted_3sum_has_a_solution(config):
    inst = generate('3sum', {'n': 5, 'planted': True}, seed=4)
    sums = {a.value + b.value for a in inst.A for b in inst.B}
    assert any(-c.value in sums for c in inst.C)

def test_document_layout(config):
    inst = ThreeSumInstance([real(1), real('1/2')], [real(-3), real(2)], [real(2)])
    doc = json.loads(serialize(inst))
    assert doc['kind'] == '3sum'
    assert doc['params'] == {'n': 2, 'n_hat': 1}
    assert doc['payload'] == {'A': ['1', '1/2'], 'B': ['-3', '2'], 'C': ['2']}

def test_load_instance(config, tmp_path):
    inst = MinPlusInstance([[real(1), INF]], [[real(2)], [real(0)]])
    path = tmp_path / 'm.json'
    path.write_text(serialize(inst))
    back = load_instance(str(path))
    assert back == inst
    assert back.B[1][0] == real(0)
    assert back.A[0][1].is_infinite

def test_parse_errors():
    with pytest.raises(ParseError) as e:
        deserialize('{"kind": ')
    assert e.value.line == 1
    with pytest.raises(ParseError) as e:
        deserialize('{"kind": "nope", "payload": {}}')
    assert e.value.field == 'kind'
    assert 'field kind' in str(e.value)
    with pytest.raises(ParseError) as e:
        deserialize('{"kind": "3sum"}')
    assert e.value.field == 'payload'
    with pytest.raises(ParseError) as e:
        deserialize('{"kind": "3sum", "payload": {"A": ["1"], "B": ["2"]}}')
    assert e.value.field == 'payload.C'
    with pytest.raises(ParseError):
        deserialize('{"kind": "3sum", "payload": {"A": ["x"], "B": ["2"], "C": []}}')

def test_violations():
    v = validate(ThreeSumInstance([real(1), INF], [real(0), real(2)], [real(1)]))
    assert v.invariant == 'finite entry'
    v = validate(ThreeSumInstance([real(1)], [real(0)], [real(1), real(2)]))
    assert v.invariant == 'sizes'
    assert validate(SparseGraph([0, 1], [(0, 0)])).invariant == 'self-loop'
    assert validate(SparseGraph([0, 1], [(0, 1), (1, 0)])).invariant == 'duplicate edge'
    assert validate(SparseGraph([0, 1], [(0, 1)], parts=['x', 'x'])).invariant == 'intra-part edge'
    assert validate(SparseGraph([0, 1], [(0, 1)], multiplicity=[0])).invariant == 'multiplicity'
    assert validate(MinPlusInstance([[real(1)], [real(2), real(3)]], [[real(0)]])).invariant == 'shape'

    A = np.ones((2, 2), dtype=bool)
    assert validate(ColorfulBmmInstance(A, A, [0, 0], [0, 1])).invariant == 'palette'
    assert validate(ColorfulBmmInstance(A, A, [0, '!'], [0])).invariant == 'padding'
    assert validate(ColorfulBmmInstance(A, A, [0], [0])).invariant == 'inner colors'

    tri = TriCoInstance(['a', 'b'], [(0, 1)], parts=['A', 'A'])
    assert validate(tri).invariant == 'intra-part edge'
    shared = TriCoInstance(['a', 'a'], [(0, 1)], parts=['A', 'B'])
    assert validate(shared).invariant == 'disjoint color sets'
    heavy = TriCoInstance(['a', 'a', 'a', 'b'], [], variant='light', parts=['A', 'A', 'A', 'B'], p=2)
    assert validate(heavy).invariant == 'color multiplicity'

    mono = EdgeColoredMultigraph(3, [(0, 1, 0), (1, 0, 0)])
    assert validate(mono).invariant == 'duplicate colored edge'
    assert validate(StringPair('ab', 'abc')).invariant == 'M <= N'
    with pytest.raises(ValidationFailed):
        ensure_valid(mono)

def test_short_part_tags():
    # an edge reaching past the tag list is reported, not raised
    v = validate(SparseGraph([0, 1, 2], [(0, 1)], parts=['x']))
    assert v.invariant == 'part tags'
    v = validate(EdgeColoredMultigraph(3, [(0, 2, 0)], parts=['I', 'J']))
    assert v.invariant == 'part tags'
    assert validate(EdgeColoredMultigraph(3, [(0, 2, 0)], parts=['I', 'J', 'K'])) is None

def test_builder_multiplicity():
    b = SparseGraphBuilder()
    x, y, z = b.node('x', 'x'), b.node('y', 'y'), b.node('z', 'z')
    assert b.node('x', 'x') == x
    q = b.query(x, z)
    b.edge(x, y)
    b.edge(y, x)
    b.edge(y, z, 3)
    g = b.build(counted=True)
    assert g.queries == [q]
    assert g.mult(q) == 1
    assert sorted(g.multiplicity) == [1, 2, 3]
    assert validate(g) is None
    assert g.adjacency()[y] == {x: 2, z: 3}

def test_subgraph_and_networkx():
    g = SparseGraph(['a', 'b', 'c', 'd'], [(0, 1), (1, 2), (0, 2), (2, 3)], queries=[0, 3])
    sub, edge_map = g.subgraph([0, 1, 2])
    assert sub.nodes == ['a', 'b', 'c']
    assert [g.edges[e] for e in edge_map] == [(0, 1), (1, 2), (0, 2)]
    assert sub.queries == [0]
    G = g.to_networkx()
    assert G.number_of_edges() == 4
    assert G.edges[0, 1]['query'] and not G.edges[1, 2]['query']
