import numpy as np
import pytest

from dramanet import synth
from dramanet.ablate import (
    AblationError,
    ablate_act,
    ablation_record,
    last_act_effect,
    per_act_effect,
)
from dramanet.corpus import Genre, Play, Scene
from dramanet.graph import build_graph, density, graph_from_scenes


def play(casts_by_act, genre=Genre.COMEDY, pid="p", act_count=None):
    scenes = []
    for act, casts in casts_by_act.items():
        for k, cast in enumerate(casts, 1):
            scenes.append(Scene(act, k, frozenset(cast)))
    return Play(pid, pid, "", genre.value, genre, (), tuple(scenes), act_count or max(casts_by_act))


def test_removing_act_drops_its_edge():
    p = play({1: [{"A", "B", "C"}], 2: [{"C", "D"}]})
    g = ablate_act(p, 2)
    assert g.node_ids == ("A", "B", "C")
    assert dict(g.edges) == {("A", "B"): 1, ("A", "C"): 1, ("B", "C"): 1}


def test_character_only_in_removed_act_disappears():
    p = play({1: [{"A", "B", "C"}], 2: [{"C", "D"}]})
    rec = ablation_record(p, 2)
    assert "D" not in ablate_act(p, 2).node_ids
    # ablated density is over the 3 remaining characters, not the full cast of 4
    assert rec.density_ablated == 1.0
    assert rec.density_full == pytest.approx(4 / 6)
    assert rec.delta == rec.density_full - rec.density_ablated


def test_full_cast_finale_gives_positive_delta():
    cast = {f"c{i}" for i in range(6)}
    pairs = [{"c0", "c1"}, {"c2", "c3"}, {"c4", "c5"}, {"c0", "c2"}]
    p = play({1: pairs[:2], 2: pairs[2:], 3: [cast]})
    rec = ablation_record(p, 3)
    # 4 pair edges over 6 nodes vs the complete graph
    assert rec.density_ablated == pytest.approx(2 * 4 / (6 * 5))
    assert rec.density_full == 1.0
    assert rec.delta > 0


def test_ablating_empty_act_is_identity():
    p = play({1: [{"A", "B"}], 3: [{"B", "C"}]}, act_count=3)
    assert ablate_act(p, 2) == build_graph(p)


def test_rebuilding_from_all_scenes_matches_build_graph():
    for p in synth.genre_corpus(4, 4, seed=12):
        assert graph_from_scenes(p.scenes) == build_graph(p)


def test_errors():
    single = play({1: [{"A", "B"}]})
    with pytest.raises(AblationError):
        ablate_act(single, 1)
    two = play({1: [{"A", "B"}], 2: [{"B", "C"}]})
    for bad in (0, 3):
        with pytest.raises(AblationError):
            ablate_act(two, bad)


def test_last_act_effect_skips_single_act_plays():
    corpus = [
        play({1: [{"A", "B"}]}, pid="single"),
        play({1: [{"A", "B"}, {"C", "D"}], 2: [{"A", "B", "C", "D"}]}, pid="com"),
        play({1: [{"A", "B", "C", "D"}], 2: [{"A", "E"}]}, Genre.TRAGEDY, pid="tra"),
    ]
    records, summary = last_act_effect(corpus)
    assert [r.play_id for r in records] == ["com", "tra"]
    assert summary["genres"]["Comedy"]["mean"] > 0
    assert summary["genres"]["Tragedy"]["mean"] < 0
    assert summary["wilcoxon_full"]["group_sizes"] == [1, 1]


def test_identical_acts_give_zero_delta():
    corpus = []
    rng = np.random.default_rng(3)
    for i in range(6):
        cast = [f"c{j}" for j in range(8)]
        act = [set(rng.choice(cast, size=rng.integers(2, 6), replace=False)) for _ in range(3)]
        corpus.append(play({a: act for a in range(1, 5)}, Genre.COMEDY if i % 2 else Genre.TRAGEDY, f"p{i}"))
    records, summary = last_act_effect(corpus)
    assert all(r.delta == 0 for r in records)
    assert summary["genres"]["Comedy"]["mean"] == pytest.approx(0, abs=1e-12)


def test_wedding_and_graveyard_directions():
    rng = np.random.default_rng(0)
    weddings = [synth.wedding_comedy(rng, f"w{i}") for i in range(10)]
    graves = [synth.graveyard_tragedy(rng, f"g{i}") for i in range(10)]
    _, summary = last_act_effect(weddings + graves)
    assert summary["genres"]["Comedy"]["mean"] > 0
    assert summary["genres"]["Tragedy"]["mean"] < 0


def test_per_act_effect_table():
    rng = np.random.default_rng(1)
    corpus = [synth.wedding_comedy(rng, f"w{i}") for i in range(4)] + [synth.graveyard_tragedy(rng, f"g{i}") for i in range(4)]
    records, rows = per_act_effect(corpus, 5)
    assert len(records) == 40
    assert [(r["genre"], r["act"]) for r in rows] == [(g, a) for g in ("Comedy", "Tragedy") for a in range(1, 6)]
    for r in rows:
        assert r["min"] <= r["q1"] <= r["median"] <= r["q3"] <= r["max"]


def test_per_act_effect_empty_restriction():
    rng = np.random.default_rng(2)
    corpus = [synth.comedy(rng, f"c{i}") for i in range(3)]
    with pytest.raises(AblationError, match="count 0"):
        per_act_effect(corpus, 3)


def test_density_of_ablated_uses_own_node_count():
    p = play({1: [{"A", "B"}], 2: [{"C"}, {"D"}, {"E"}]})
    g = ablate_act(p, 2)
    assert density(g) == 1.0
