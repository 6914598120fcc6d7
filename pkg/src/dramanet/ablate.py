"""Act ablation: how much does each act contribute to a play's network density?"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Genre, Play
from .graph import CharacterGraph, build_graph, density, graph_from_scenes
from .stats import WilcoxonResult, wilcoxon_ranksum

log = logging.getLogger(__name__)


class AblationError(ValueError):
    pass


@dataclass(frozen=True)
class AblationRecord:
    play_id: str
    genre: Genre
    act_removed: int
    density_full: float
    density_ablated: float

    @property
    def delta(self) -> float:
        return self.density_full - self.density_ablated


def ablate_act(play: Play, act: int) -> CharacterGraph:
    """Co-occurrence graph of the play with every scene of ``act`` left out."""
    if play.act_count < 2:
        raise AblationError(f"{play.id}: single-act play cannot be ablated")
    if not 1 <= act <= play.act_count:
        raise AblationError(f"{play.id}: act {act} outside 1..{play.act_count}")
    return graph_from_scenes(s for s in play.scenes if s.act_index != act)


def ablation_record(play: Play, act: int) -> AblationRecord:
    full = density(build_graph(play))
    ablated = density(ablate_act(play, act))
    return AblationRecord(play.id, play.genre, act, full, ablated)


def five_number(values: Sequence[float]) -> dict[str, float]:
    x = np.asarray(values, dtype=float)
    q = np.quantile(x, [0, 0.25, 0.5, 0.75, 1.0])
    return dict(zip(("min", "q1", "median", "q3", "max"), map(float, q)))


def _summary(deltas: Sequence[float]) -> dict:
    if not deltas:
        return {"n": 0}
    return {
        "n": len(deltas),
        "mean": float(np.mean(deltas)),
        "median": float(np.median(deltas)),
        **five_number(deltas),
    }


def _wilcoxon_dict(res: WilcoxonResult | None) -> dict | None:
    if res is None:
        return None
    return {"U": res.statistic_U, "p_value": res.p_value, "group_sizes": list(res.group_sizes), "exact": res.exact}


def _usable(play: Play) -> bool:
    if play.act_count < 2:
        log.info("%s: fewer than 2 acts, skipped", play.id)
        return False
    return True


def last_act_effect(corpus: Sequence[Play]) -> tuple[list[AblationRecord], dict]:
    """Density with and without the final act, per play and summarized by genre.

    The summary also compares comedy and tragedy densities with a rank-sum
    test, once on the full plays and once without their last acts.
    Plays with fewer than two acts, or whose ablated network has fewer than
    two characters, are skipped.
    """
    records = []
    for play in corpus:
        if not _usable(play):
            continue
        rec = ablation_record(play, play.act_count)
        if math.isnan(rec.density_ablated):
            log.info("%s: ablated network has < 2 characters, skipped", play.id)
            continue
        records.append(rec)

    summary: dict = {"genres": {}}
    by_genre: dict[Genre, list[AblationRecord]] = {}
    for r in records:
        by_genre.setdefault(r.genre, []).append(r)
    for g in (Genre.COMEDY, Genre.TRAGEDY):
        summary["genres"][g.value] = _summary([r.delta for r in by_genre.get(g, [])])

    com, tra = by_genre.get(Genre.COMEDY, []), by_genre.get(Genre.TRAGEDY, [])
    full_test = ablated_test = None
    if com and tra:
        full_test = wilcoxon_ranksum([r.density_full for r in com], [r.density_full for r in tra])
        ablated_test = wilcoxon_ranksum([r.density_ablated for r in com], [r.density_ablated for r in tra])
    summary["wilcoxon_full"] = _wilcoxon_dict(full_test)
    summary["wilcoxon_without_last_act"] = _wilcoxon_dict(ablated_test)
    return records, summary


def per_act_effect(corpus: Sequence[Play], acts_required: int = 5) -> tuple[list[AblationRecord], list[dict]]:
    """Ablate each act in turn for plays with exactly ``acts_required`` acts.

    Returns the records and one summary row per (genre, act).
    """
    if acts_required < 2:
        raise AblationError("acts_required must be at least 2")
    chosen = [p for p in corpus if p.act_count == acts_required]
    if not chosen:
        counts = Counter(p.act_count for p in corpus)
        raise AblationError(
            f"no play has exactly {acts_required} acts (count 0); act counts in corpus: {dict(sorted(counts.items()))}"
        )
    records = []
    for play in chosen:
        for act in range(1, acts_required + 1):
            rec = ablation_record(play, act)
            if not math.isnan(rec.density_ablated):
                records.append(rec)
    rows = []
    for g in (Genre.COMEDY, Genre.TRAGEDY):
        for act in range(1, acts_required + 1):
            deltas = [r.delta for r in records if r.genre == g and r.act_removed == act]
            if deltas:
                rows.append({"genre": g.value, "act": act, **_summary(deltas)})
    return records, rows
