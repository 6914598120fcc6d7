import math
import random
import xml.etree.ElementTree as ET
from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dramanet.corpus import Genre, Play, Scene
from dramanet.graph import (
    CharacterGraph,
    DegenerateGraphError,
    betweenness,
    betweenness_raw,
    build_graph,
    compute_metrics,
    connected_components,
    density,
    largest_component,
    to_edge_csv,
    to_gexf,
    weighted_degrees,
)
from oracles import brute_metrics, brute_betweenness_raw, intermediate_occurrences, random_connected_graph


def play_from_casts(casts, acts=None):
    acts = acts or [1] * len(casts)
    scenes = []
    counter = {}
    for cast, act in zip(casts, acts):
        counter[act] = counter.get(act, 0) + 1
        scenes.append(Scene(act, counter[act], frozenset(cast)))
    return Play("p", "p", "", "comedy", Genre.COMEDY, (), tuple(scenes), max(acts))


def K(n):
    nodes = [chr(ord("a") + i) for i in range(n)]
    return CharacterGraph.from_edges(list(combinations(nodes, 2)))


def test_single_scene_is_clique():
    g = build_graph(play_from_casts([{"A", "B", "C"}]))
    assert g.node_ids == ("A", "B", "C")
    assert dict(g.edges) == {("A", "B"): 1, ("A", "C"): 1, ("B", "C"): 1}


def test_weights_accumulate():
    g = build_graph(play_from_casts([{"A", "B"}, {"A", "B"}]))
    assert dict(g.edges) == {("A", "B"): 2}


def test_isolated_scene_member_is_a_node():
    g = build_graph(play_from_casts([{"A", "B"}, {"B", "C"}, {"D"}]))
    assert g.node_ids == ("A", "B", "C", "D")
    assert dict(g.edges) == {("A", "B"): 1, ("B", "C"): 1}
    assert weighted_degrees(g)["D"] == 0


def test_graph_invariants_enforced():
    with pytest.raises(ValueError):
        CharacterGraph(("a",), {("a", "a"): 1})
    with pytest.raises(ValueError):
        CharacterGraph(("a",), {("a", "b"): 1})
    with pytest.raises(ValueError):
        CharacterGraph(("a", "b"), {("a", "b"): 0})


casts = st.lists(st.sets(st.sampled_from("ABCDEFG"), min_size=1, max_size=5), min_size=1, max_size=8)


@given(casts, st.randoms())
def test_build_graph_is_order_invariant(cs, rnd):
    shuffled = list(cs)
    rnd.shuffle(shuffled)
    assert build_graph(play_from_casts(cs)) == build_graph(play_from_casts(shuffled))


@given(casts)
def test_total_weight_is_sum_of_scene_pairs(cs):
    g = build_graph(play_from_casts(cs))
    assert sum(g.edges.values()) == sum(math.comb(len(c), 2) for c in cs)


def test_weighted_degree_triangle():
    g = CharacterGraph.from_edges({("a", "b"): 1, ("b", "c"): 2, ("a", "c"): 3})
    assert weighted_degrees(g) == {"a": 4.0, "b": 3.0, "c": 5.0}


def test_k4():
    m = compute_metrics(K(4))
    assert m.density == 1.0
    assert m.avg_clustering == 1.0
    assert m.diameter == 1
    assert m.max_betweenness == 0.0
    assert m.avg_path_length == 1.0
    assert m.n_components == 1


def test_path_p3():
    m = compute_metrics(CharacterGraph.from_edges([("a", "b"), ("b", "c")]))
    assert m.max_betweenness == 1.0
    assert m.density == pytest.approx(2 / 3, abs=1e-15)
    assert m.diameter == 2
    assert m.avg_clustering == 0.0


def test_k4_minus_edge_clustering_is_five_sixths():
    edges = [e for e in combinations("abcd", 2) if e != ("a", "b")]
    m = compute_metrics(CharacterGraph.from_edges(edges))
    assert m.avg_clustering == 5 / 6


def test_star5():
    g = CharacterGraph.from_edges([("hub", leaf) for leaf in "abcd"])
    m = compute_metrics(g)
    assert betweenness(g)["hub"] == 1.0
    assert m.max_betweenness == 1.0
    assert m.max_deg_over_n_minus_1 == 1.0
    assert m.avg_deg_max_deg_ratio == pytest.approx(2 * 4 / 5 / 4)


def test_degenerate_graph_rejected():
    with pytest.raises(DegenerateGraphError):
        compute_metrics(CharacterGraph(("a",), {}))


def test_disconnected_uses_largest_component():
    # path of 4 plus a separate edge
    g = CharacterGraph.from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("x", "y")])
    m = compute_metrics(g)
    assert m.n_components == 2
    assert m.diameter == 3
    # distances in the path a-b-c-d: 1,2,3,1,2,1 over 6 pairs
    assert m.avg_path_length == pytest.approx(10 / 6)
    # betweenness normalized inside the 4-node component: b lies on a-c, a-d
    assert betweenness(g)["b"] == pytest.approx(2 / 3)
    assert betweenness(g)["x"] == 0.0
    assert m.density == pytest.approx(4 / 15)


def test_largest_component_tie_breaks_on_smallest_id():
    g = CharacterGraph.from_edges([("m", "n"), ("b", "c")])
    assert largest_component(g) == ["b", "c"]
    assert connected_components(g) == [["b", "c"], ["m", "n"]]


def test_edgeless_graph():
    m = compute_metrics(CharacterGraph(("a", "b", "c"), {}))
    assert m.density == 0.0
    assert m.n_components == 3
    assert m.diameter == 0
    assert math.isnan(m.avg_path_length)
    assert m.max_deg_over_n_minus_1 == 0.0


def test_metrics_match_brute_force_on_random_graphs():
    rng = np.random.default_rng(7)
    for _ in range(150):
        nodes, edges = random_connected_graph(rng)
        m = compute_metrics(CharacterGraph.from_edges(edges, nodes))
        ref = brute_metrics(nodes, edges)
        for key, val in ref.items():
            assert getattr(m, key) == pytest.approx(val, abs=1e-9), key


def test_raw_betweenness_totals_intermediate_occurrences():
    rng = np.random.default_rng(8)
    for _ in range(100):
        nodes, edges = random_connected_graph(rng)
        raw = betweenness_raw(CharacterGraph.from_edges(edges, nodes))
        assert sum(raw.values()) == pytest.approx(intermediate_occurrences(nodes, edges), abs=1e-9)
        ref = brute_betweenness_raw(nodes, edges)
        for v in nodes:
            assert raw[v] == pytest.approx(ref[v], abs=1e-9)


def test_betweenness_agrees_with_networkx():
    rng = random.Random(3)
    for _ in range(30):
        g_nx = nx.gnp_random_graph(rng.randint(3, 12), 0.4, seed=rng.randint(0, 10**6))
        edges = [(f"n{a:02d}", f"n{b:02d}") for a, b in g_nx.edges]
        nodes = [f"n{v:02d}" for v in g_nx.nodes]
        g = CharacterGraph.from_edges(edges, nodes)
        ours = betweenness_raw(g)
        ref = nx.betweenness_centrality(nx.relabel_nodes(g_nx, lambda v: f"n{v:02d}"), normalized=False)
        for v in nodes:
            assert ours[v] == pytest.approx(ref[v], abs=1e-9)


def test_density_formula():
    g = CharacterGraph.from_edges([("a", "b")], nodes=["c", "d"])
    assert density(g) == 2 * 1 / (4 * 3)


def test_gexf_export_is_readable(tmp_path):
    g = CharacterGraph.from_edges({("a", "b"): 2, ("b", "c"): 1, ("a", "c"): 5}, nodes=["lonely"])
    path = tmp_path / "g.gexf"
    path.write_text(to_gexf(g, {"a": "Anna"}), encoding="utf-8")
    root = ET.parse(path).getroot()
    assert root.tag == "{http://www.gexf.net/1.2draft}gexf"
    h = nx.read_gexf(path)
    assert set(h.nodes) == {"a", "b", "c", "lonely"}
    assert h.nodes["a"]["label"] == "Anna"
    assert h["a"]["c"]["weight"] == 5.0
    assert h.degree("lonely") == 0


def test_edge_csv():
    g = CharacterGraph.from_edges({("b", "a"): 2, ("b", "c"): 1})
    assert to_edge_csv(g) == "source,target,weight\na,b,2\nb,c,1\n"
