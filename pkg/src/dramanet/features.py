"""Per-play structural features and the z-scored dataset built from them."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Genre, Play
from .graph import CharacterGraph, GraphMetrics, build_graph, compute_metrics, weighted_degrees

log = logging.getLogger(__name__)

HIGH, MEDIUM, LOW = "High", "Medium", "Low"

FEATURE_NAMES = (
    "avg_clustering",
    "density",
    "diameter",
    "max_betweenness",
    "max_deg_over_n_minus_1",
    "high_speech",
    "medium_speech",
    "low_speech",
    "high_wdeg",
    "medium_wdeg",
    "low_wdeg",
    "avg_character_speech",
    "avg_char_per_scene_norm",
)
EXCLUDED_NAMES = ("avg_path_length", "avg_deg_max_deg_ratio", "n_components")
EXTRA_NAMES = EXCLUDED_NAMES + ("n_characters",)
ALL_MEASURES = FEATURE_NAMES + EXTRA_NAMES

# speech acts a character needs to count towards avg_character_speech
MIN_SPEECHES = 10


class FeatureError(ValueError):
    pass


class ConstantColumnWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Trichotomy:
    high_prop: float
    medium_prop: float
    low_prop: float


def _segment_costs(xs: Sequence[float], ws: Sequence[int]) -> list[list[float]]:
    """cost[i][j]: weighted SSE of xs[i..j] about its mean (West's update)."""
    n = len(xs)
    cost = [[0.0] * n for _ in range(n)]
    for i in range(n):
        total_w = 0
        mean = 0.0
        m2 = 0.0
        for j in range(i, n):
            w, x = ws[j], xs[j]
            total_w += w
            d = x - mean
            mean += d * w / total_w
            m2 += w * d * (x - mean)
            cost[i][j] = m2
    return cost


def kmeans3_1d(values: Sequence[float]) -> list[str]:
    """Label each value High/Medium/Low by an exactly optimal 1-D 3-means split.

    Clusters are contiguous runs of the sorted distinct values (ties never
    split); the split minimizing within-cluster SSE is found by dynamic
    programming. With fewer than three distinct values each distinct value
    gets its own label from High downward.
    """
    if len(values) == 0:
        raise FeatureError("kmeans3_1d needs at least one value")
    distinct = sorted(set(float(v) for v in values))
    counts: dict[float, int] = {}
    for v in values:
        counts[float(v)] = counts.get(float(v), 0) + 1
    n = len(distinct)

    if n < 3:
        label_of = {v: lab for v, lab in zip(reversed(distinct), (HIGH, MEDIUM))}
        return [label_of[float(v)] for v in values]

    ws = [counts[v] for v in distinct]
    cost = _segment_costs(distinct, ws)
    # best 2-cluster cost of prefix [0..j]
    best2 = [math.inf] * n
    cut2 = [0] * n
    for j in range(1, n):
        for s in range(1, j + 1):
            c = cost[0][s - 1] + cost[s][j]
            if c < best2[j]:
                best2[j], cut2[j] = c, s
    best = math.inf
    cut_a = cut_b = 0
    for t in range(2, n):
        c = best2[t - 1] + cost[t][n - 1]
        if c < best:
            best, cut_a, cut_b = c, cut2[t - 1], t

    label_of = {}
    for idx, v in enumerate(distinct):
        label_of[v] = LOW if idx < cut_a else (MEDIUM if idx < cut_b else HIGH)
    return [label_of[float(v)] for v in values]


def _trichotomy(values: Sequence[float]) -> Trichotomy:
    labels = kmeans3_1d(values)
    n = len(labels)
    high = labels.count(HIGH)
    med = labels.count(MEDIUM)
    low = n - high - med
    return Trichotomy(high / n, med / n, low / n)


def words_by_character(play: Play) -> dict[str, int]:
    out: dict[str, int] = {}
    for scene in play.scenes:
        for sp in scene.speeches:
            out[sp.speaker_id] = out.get(sp.speaker_id, 0) + sp.word_count
    return out


def speeches_by_character(play: Play) -> dict[str, int]:
    out: dict[str, int] = {}
    for scene in play.scenes:
        for sp in scene.speeches:
            out[sp.speaker_id] = out.get(sp.speaker_id, 0) + 1
    return out


def _individuals(play: Play) -> list[str]:
    """Non-group characters that are on stage at least once, sorted."""
    groups = play.group_ids
    return sorted(play.on_stage_ids - groups)


def speech_trichotomy(play: Play) -> Trichotomy:
    """Shares of non-group characters in the high/medium/low speech-volume clusters.

    Characters on stage who never speak enter with 0 words.
    """
    words = words_by_character(play)
    ids = _individuals(play)
    if not any(c in words for c in ids):
        raise FeatureError(f"{play.id}: no speaking non-group character")
    return _trichotomy([words.get(c, 0) for c in ids])


def wdeg_trichotomy(play: Play, g: CharacterGraph) -> Trichotomy:
    wdeg = weighted_degrees(g)
    groups = play.group_ids
    ids = [v for v in g.node_ids if v not in groups]
    if not ids:
        raise FeatureError(f"{play.id}: no non-group character in the network")
    return _trichotomy([wdeg[v] for v in ids])


def avg_character_speech_detail(play: Play) -> tuple[float, bool]:
    """(mean words per qualifying character, fallback_used).

    Qualifying characters have more than 10 speech acts. Without any, the mean
    runs over every speaking character and the fallback flag is set.
    """
    words = words_by_character(play)
    n_sp = speeches_by_character(play)
    qualifiers = [c for c, k in n_sp.items() if k > MIN_SPEECHES]
    if qualifiers:
        return sum(words[c] for c in qualifiers) / len(qualifiers), False
    if not words:
        raise FeatureError(f"{play.id}: play has no speeches")
    log.info("%s: no character with more than %d speeches; averaging all speakers", play.id, MIN_SPEECHES)
    return sum(words.values()) / len(words), True


def avg_character_speech(play: Play) -> float:
    return avg_character_speech_detail(play)[0]


def avg_char_per_scene_norm(play: Play) -> float:
    k = len(play.scenes)
    if k == 0:
        raise FeatureError(f"{play.id}: no scenes")
    return sum(len(s.present_ids) for s in play.scenes) / k / k


@dataclass(frozen=True)
class FeatureVector:
    play_id: str
    genre: Genre
    avg_clustering: float
    density: float
    diameter: float
    max_betweenness: float
    max_deg_over_n_minus_1: float
    high_speech: float
    medium_speech: float
    low_speech: float
    high_wdeg: float
    medium_wdeg: float
    low_wdeg: float
    avg_character_speech: float
    avg_char_per_scene_norm: float
    avg_path_length: float
    avg_deg_max_deg_ratio: float
    n_components: float
    n_characters: float
    speech_fallback: bool = False

    def values(self, names: Sequence[str] = FEATURE_NAMES) -> list[float]:
        return [float(getattr(self, n)) for n in names]


def extract_features(
    play: Play, g: CharacterGraph | None = None, metrics: GraphMetrics | None = None
) -> FeatureVector:
    g = g if g is not None else build_graph(play)
    metrics = metrics if metrics is not None else compute_metrics(g)
    sp = speech_trichotomy(play)
    wd = wdeg_trichotomy(play, g)
    acs, fallback = avg_character_speech_detail(play)
    return FeatureVector(
        play_id=play.id,
        genre=play.genre,
        avg_clustering=metrics.avg_clustering,
        density=metrics.density,
        diameter=float(metrics.diameter),
        max_betweenness=metrics.max_betweenness,
        max_deg_over_n_minus_1=metrics.max_deg_over_n_minus_1,
        high_speech=sp.high_prop,
        medium_speech=sp.medium_prop,
        low_speech=sp.low_prop,
        high_wdeg=wd.high_prop,
        medium_wdeg=wd.medium_prop,
        low_wdeg=wd.low_prop,
        avg_character_speech=acs,
        avg_char_per_scene_norm=avg_char_per_scene_norm(play),
        avg_path_length=metrics.avg_path_length,
        avg_deg_max_deg_ratio=metrics.avg_deg_max_deg_ratio,
        n_components=float(metrics.n_components),
        n_characters=float(metrics.n_nodes),
        speech_fallback=fallback,
    )


def zscore(column) -> np.ndarray:
    """Center and scale by the sample (n-1) standard deviation; constant columns become zeros."""
    x = np.asarray(column, dtype=float)
    if x.size < 2:
        raise FeatureError("z-score needs at least 2 values")
    sd = x.std(ddof=1)
    if sd == 0 or not np.isfinite(sd):
        return np.zeros_like(x)
    return (x - x.mean()) / sd


@dataclass
class Dataset:
    play_ids: list[str]
    feature_names: list[str]
    matrix: np.ndarray  # z-scored, rows = plays
    labels: np.ndarray  # +1 comedy, -1 tragedy
    raw: np.ndarray  # unscored values of the same columns
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_plays(self) -> int:
        return len(self.play_ids)

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.feature_names.index(name)]

    def select(self, names: Sequence[str]) -> "Dataset":
        idx = [self.feature_names.index(n) for n in names]
        return Dataset(
            list(self.play_ids), list(names), self.matrix[:, idx], self.labels.copy(),
            self.raw[:, idx], dict(self.extras),
        )

    def with_labels(self, labels) -> "Dataset":
        return Dataset(
            list(self.play_ids), list(self.feature_names), self.matrix, np.asarray(labels),
            self.raw, dict(self.extras),
        )


def genre_label(genre: Genre) -> int:
    if genre == Genre.COMEDY:
        return 1
    if genre == Genre.TRAGEDY:
        return -1
    raise FeatureError(f"no binary label for genre {genre}")


def assemble(vectors: Sequence[FeatureVector], names: Sequence[str] = FEATURE_NAMES) -> Dataset:
    """Stack feature vectors into a z-scored matrix with Comedy=+1 / Tragedy=-1 labels."""
    if len(vectors) < 2:
        raise FeatureError("need at least 2 plays to z-score")
    raw = np.array([v.values(names) for v in vectors], dtype=float)
    if not np.all(np.isfinite(raw)):
        bad = [vectors[i].play_id for i in np.where(~np.isfinite(raw).all(axis=1))[0]]
        raise FeatureError(f"non-finite feature values for plays: {bad}")
    cols = []
    for j, name in enumerate(names):
        if np.all(raw[:, j] == raw[0, j]):
            warnings.warn(f"feature {name!r} is constant; z-scored to zeros", ConstantColumnWarning, stacklevel=2)
        cols.append(zscore(raw[:, j]))
    matrix = np.column_stack(cols)
    extras = {n: np.array([float(getattr(v, n)) for v in vectors]) for n in EXTRA_NAMES}
    return Dataset(
        play_ids=[v.play_id for v in vectors],
        feature_names=list(names),
        matrix=matrix,
        labels=np.array([genre_label(v.genre) for v in vectors], dtype=int),
        raw=raw,
        extras=extras,
    )
