import pytest

from finered import TriCoInstance, generate, validate
from finered.errors import NotLight, NotTripartite
from finered.oracles import tri_co
from finered.tri_co import (combine_light, light_to_star2, original_to_tripartite, trico_to_light,
                            tripartite_to_original)

from .fixtures import config, ledger

@pytest.mark.parametrize('seed', range(5))
def test_original_to_tripartite(ledger, seed):
    g = generate('trico', {'variant': 'general', 'n': 7, 'colors': 4, 'density': 0.7}, seed=seed)
    gadget = original_to_tripartite(g)
    assert validate(gadget.instance) is None
    assert tri_co(gadget.instance) == tri_co(g)
    acp = tri_co(gadget.instance, 'acp')
    want = tri_co(g, 'acp')
    assert {pair: acp[tri] for tri, pair in gadget.pairs.items()} == want
    assert all(not row.exceeded() for row in ledger.rows)

def test_repeated_colors_are_always_collected(ledger):
    # a single triangle with colors 0, 0, 1 collects nothing
    g = TriCoInstance([0, 0, 1, 2], [(0, 1), (1, 2), (0, 2)], variant='general')
    gadget = original_to_tripartite(g)
    assert not tri_co(g) and not tri_co(gadget.instance)
    acp = tri_co(gadget.instance, 'acp')
    assert acp[((0, 0), (0, 1))] and acp[((2, 0), (2, 1))]

@pytest.mark.parametrize('seed', range(5))
def test_tripartite_to_original(ledger, seed):
    g = generate('trico', {'variant': 'tripartite', 'n': 5, 'colors': 2, 'density': 0.8}, seed=seed)
    general = tripartite_to_original(g)
    assert general.variant == 'general'
    assert tri_co(general) == tri_co(g)

def test_full_tripartite_is_collected(ledger):
    g = TriCoInstance(['a', 'b', 'c'], [(0, 1), (1, 2), (0, 2)], parts=['A', 'B', 'C'])
    assert tri_co(g) and tri_co(tripartite_to_original(g))

@pytest.mark.parametrize('seed', range(5))
def test_light_to_star2(ledger, seed):
    g = generate('trico', {'variant': 'light', 'colors': 2, 'p': 2, 'density': 0.7}, seed=seed)
    star = light_to_star2(g)
    assert star.variant == 'star2'
    assert validate(star) is None
    assert star.t <= g.p ** 3
    assert tri_co(star) == tri_co(g)
    assert tri_co(star, 'acp') == tri_co(g, 'acp')

def test_star2_needs_light(ledger):
    g = generate('trico', {'variant': 'tripartite', 'n': 3}, seed=0)
    with pytest.raises(NotLight):
        light_to_star2(g)
    heavy = TriCoInstance(['a', 'a', 'a', 'b', 'c'], [], variant='light', parts=['A', 'A', 'A', 'B', 'C'], p=2)
    with pytest.raises(NotLight):
        light_to_star2(heavy)

@pytest.mark.parametrize('eps', [0.0, 0.3, 0.5, 1.0])
@pytest.mark.parametrize('seed', range(4))
def test_trico_to_light(ledger, seed, eps):
    g = generate('trico', {'variant': 'tripartite', 'n': 6, 'colors': 3, 'density': 0.8}, seed=seed)
    split = trico_to_light(g, eps)
    assert split.residual.variant == 'light'
    assert validate(split.residual) is None
    for mode in ('decide', 'acp'):
        got = combine_light(g, split, tri_co(split.residual, mode), mode)
        assert got == tri_co(g, mode)

def test_light_split_needs_parts(ledger):
    with pytest.raises(NotTripartite):
        trico_to_light(TriCoInstance([0, 1, 2], [(0, 1)], variant='general'), 0.5)
