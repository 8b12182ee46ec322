import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcycle import (
    GenSpec,
    brute_force_k_cycle,
    build_graph,
    degeneracy,
    gen_degenerate,
    gen_grid,
    generate,
    plant_cycle,
    underlying_undirected,
    verify_cycle,
)
from kcycle.gen import MODELS


def test_d1_gives_a_forest():
    G = gen_degenerate(GenSpec(100, 1, seed=4))
    H = nx.Graph(G.edges())
    H.add_nodes_from(range(G.n))
    assert nx.is_forest(H)


def test_large_instance_degeneracy():
    assert degeneracy(gen_degenerate(GenSpec(10_000, 3, seed=0))) <= 3


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_directed_variant_degeneracy(d):
    G = gen_degenerate(GenSpec(2000, d, directed=True, seed=d))
    assert G.directed
    assert degeneracy(underlying_undirected(G)) <= d


def test_directed_orientation_is_a_fair_coin():
    G = gen_degenerate(GenSpec(20_000, 3, directed=True, seed=1))
    # each arc joins a vertex to an earlier one; count arcs pointing from the later end
    H = gen_degenerate(GenSpec(20_000, 3, seed=1))
    assert underlying_undirected(G).m == H.m
    forward = len(set(G.edges()) & set(H.edges()))
    assert abs(forward / G.m - 0.5) < 0.02


def test_grid_examples():
    C4 = gen_grid(2, 2)
    assert C4.m == 4 and degeneracy(C4) == 2
    G = gen_grid(3, 3)
    assert brute_force_k_cycle(G, 8) is not None and brute_force_k_cycle(G, 3) is None
    big = gen_grid(100, 100)
    assert (big.n, big.m) == (10_000, 19_800)
    assert degeneracy(big) == 2
    with pytest.raises(ValueError):
        gen_grid(0, 3)


def test_directed_grid_is_acyclic():
    G = gen_grid(4, 4, directed=True)
    assert all(brute_force_k_cycle(G, k) is None for k in range(3, 9))


def test_plant_on_empty_graph_gives_cycle():
    G, w = plant_cycle(build_graph(7, []), 7, 3)
    assert G.m == 7 and verify_cycle(G, w, 7)
    assert all(len(G.neighbors(v)) == 2 for v in range(7))


def test_plant_in_forest():
    F = gen_degenerate(GenSpec(60, 1, seed=2))
    G, w = plant_cycle(F, 6, 9)
    assert verify_cycle(G, w, 6)
    with pytest.raises(ValueError):
        plant_cycle(F, 61)


@pytest.mark.parametrize("directed", [False, True])
def test_planting_raises_degeneracy_by_at_most_two(directed):
    for seed in range(100):
        spec = GenSpec(80, 1 + seed % 3, directed=directed, seed=seed)
        base = gen_degenerate(spec)
        G, w = plant_cycle(base, 3 + seed % 20, seed)
        assert degeneracy(G) <= degeneracy(base) + 2
        assert verify_cycle(G, w, len(w.vertices))


@settings(max_examples=40)
@given(st.integers(3, 300), st.integers(1, 4), st.sampled_from(MODELS), st.booleans(), st.integers(0, 2**40))
def test_generators_are_pure_and_witnesses_verify(n, d, model, directed, seed):
    spec = GenSpec(n, d, model, directed, planted_k=min(n, 3 + seed % 10), seed=seed)
    G1, w1 = generate(spec)
    G2, w2 = generate(spec)
    assert np.array_equal(G1.src, G2.src) and np.array_equal(G1.dst, G2.dst) and w1 == w2
    assert verify_cycle(G1, w1, spec.planted_k)


def test_planting_does_not_move_the_base_graph():
    base, _ = generate(GenSpec(200, 3, seed=8))
    G, _ = generate(GenSpec(200, 3, planted_k=9, seed=8))
    assert set(base.edges()) <= set(G.edges())


@pytest.mark.parametrize("kwargs", [dict(model="planar"), dict(n=-1), dict(d_target=0), dict(planted_k=11),
                                    dict(planted_k=2)])
def test_bad_specs(kwargs):
    args = dict(n=10) | kwargs
    with pytest.raises(ValueError):
        GenSpec(**args)


def test_grid_model_layout():
    G, _ = generate(GenSpec(50, model="grid"))
    assert G.n == 49 and G.m == 2 * 7 * 6
