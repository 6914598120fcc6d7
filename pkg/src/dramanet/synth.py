"""Synthetic plays with planted genre structure, and a TEI writer for them.

Comedies put most of the cast on stage together and spread the talking
evenly. Tragedies split the cast into small subgroups that only one or two
key figures move between, and the key figures do most of the talking.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Sequence

import numpy as np

from .corpus import CharacterRecord, Genre, Play, Scene, SpeechAct

TEI_NS = "http://www.tei-c.org/ns/1.0"
XML_ID = "{http://www.w3.org/XML/1998/namespace}id"


def _speeches(rng: np.random.Generator, cast: Sequence[str], weights: dict[str, float], n: int) -> tuple[SpeechAct, ...]:
    cast = sorted(cast)
    p = np.array([weights[c] for c in cast], dtype=float)
    p /= p.sum()
    out = []
    for _ in range(n):
        who = cast[int(rng.choice(len(cast), p=p))]
        out.append(SpeechAct(who, int(rng.integers(3, 40) * weights[who] ** 0.5) + 1))
    return tuple(out)


def _play(pid: str, genre: Genre, cast: list[str], acts: list[list[tuple[set[str], tuple]]]) -> Play:
    scenes = []
    for ai, act in enumerate(acts, start=1):
        for si, (present, speeches) in enumerate(act, start=1):
            scenes.append(Scene(ai, si, frozenset(present), speeches))
    return Play(
        id=pid,
        title=pid.replace("_", " ").title(),
        author="Anonymous",
        raw_genre=genre.value.lower(),
        genre=genre,
        characters=tuple(CharacterRecord(c, c.title(), False) for c in cast),
        scenes=tuple(scenes),
        act_count=len(acts),
    )


def comedy(rng: np.random.Generator, pid: str, n_acts: int = 5) -> Play:
    n = int(rng.integers(8, 15))
    cast = [f"c{i:02d}" for i in range(n)]
    weights = {c: float(rng.uniform(0.7, 1.3)) for c in cast}
    acts = []
    for _ in range(n_acts):
        scenes = []
        for _ in range(int(rng.integers(3, 6))):
            size = max(3, int(round(n * rng.uniform(0.55, 0.95))))
            present = set(rng.choice(cast, size=size, replace=False).tolist())
            scenes.append((present, _speeches(rng, present, weights, int(rng.integers(15, 30)))))
        acts.append(scenes)
    return _play(pid, Genre.COMEDY, cast, acts)


def tragedy(rng: np.random.Generator, pid: str, n_acts: int = 5) -> Play:
    n = int(rng.integers(8, 15))
    cast = [f"c{i:02d}" for i in range(n)]
    n_keys = int(rng.integers(1, 3))
    keys = cast[:n_keys]
    rest = cast[n_keys:]
    n_groups = int(rng.integers(3, 5))
    groups = [rest[i::n_groups] for i in range(n_groups)]
    weights = {c: (6.0 if c in keys else float(rng.uniform(0.3, 1.0))) for c in cast}
    acts = []
    for _ in range(n_acts):
        scenes = []
        for _ in range(int(rng.integers(3, 6))):
            grp = groups[int(rng.integers(len(groups)))]
            k = min(len(grp), int(rng.integers(1, 4)))
            present = set(rng.choice(grp, size=k, replace=False).tolist())
            present.add(keys[int(rng.integers(n_keys))])
            scenes.append((present, _speeches(rng, present, weights, int(rng.integers(15, 30)))))
        acts.append(scenes)
    return _play(pid, Genre.TRAGEDY, cast, acts)


def genre_corpus(n_comedies: int = 30, n_tragedies: int = 30, seed: int = 0) -> list[Play]:
    """Interleaved comedies and tragedies with planted structural differences."""
    rng = np.random.default_rng(seed)
    plays = [comedy(rng, f"comedy_{i:03d}") for i in range(n_comedies)]
    plays += [tragedy(rng, f"tragedy_{i:03d}") for i in range(n_tragedies)]
    order = rng.permutation(len(plays))
    return [plays[i] for i in order]


def wedding_comedy(rng: np.random.Generator, pid: str, n_acts: int = 5) -> Play:
    """Small pairings for most of the play, then the whole cast in one closing scene."""
    n = int(rng.integers(8, 13))
    cast = [f"c{i:02d}" for i in range(n)]
    weights = {c: 1.0 for c in cast}
    acts = []
    for _ in range(n_acts - 1):
        scenes = []
        for _ in range(int(rng.integers(3, 5))):
            present = set(rng.choice(cast, size=int(rng.integers(2, 4)), replace=False).tolist())
            scenes.append((present, _speeches(rng, present, weights, 10)))
        acts.append(scenes)
    acts.append([(set(cast), _speeches(rng, cast, weights, 20))])
    return _play(pid, Genre.COMEDY, cast, acts)


def graveyard_tragedy(rng: np.random.Generator, pid: str, n_acts: int = 5) -> Play:
    """A well-connected court, then a last act of strangers meeting the hero one at a time."""
    n = int(rng.integers(7, 11))
    cast = [f"c{i:02d}" for i in range(n)]
    strangers = [f"s{i:02d}" for i in range(int(rng.integers(3, 6)))]
    weights = {c: 1.0 for c in cast + strangers}
    hero = cast[0]
    acts = []
    for _ in range(n_acts - 1):
        scenes = []
        for _ in range(int(rng.integers(3, 5))):
            present = set(rng.choice(cast, size=int(rng.integers(4, n + 1)), replace=False).tolist())
            scenes.append((present, _speeches(rng, present, weights, 10)))
        acts.append(scenes)
    acts.append([({hero, s}, _speeches(rng, [hero, s], weights, 6)) for s in strangers])
    return _play(pid, Genre.TRAGEDY, cast + strangers, acts)


# -- TEI ------------------------------------------------------------------

def _t(name: str) -> str:
    return f"{{{TEI_NS}}}{name}"


def to_tei(play: Play) -> bytes:
    """Render a Play as minimal DraCor-style TEI. Speech texts are filler words."""
    ET.register_namespace("", TEI_NS)
    root = ET.Element(_t("TEI"))
    header = ET.SubElement(root, _t("teiHeader"))
    fdesc = ET.SubElement(header, _t("fileDesc"))
    tstmt = ET.SubElement(fdesc, _t("titleStmt"))
    ET.SubElement(tstmt, _t("title"), {"type": "main"}).text = play.title
    ET.SubElement(tstmt, _t("author")).text = play.author
    pub = ET.SubElement(fdesc, _t("publicationStmt"))
    ET.SubElement(pub, _t("idno"), {"type": "dracor"}).text = play.id
    profile = ET.SubElement(header, _t("profileDesc"))
    partic = ET.SubElement(profile, _t("particDesc"))
    plist = ET.SubElement(partic, _t("listPerson"))
    for c in play.characters:
        el = ET.SubElement(plist, _t("personGrp" if c.is_group else "person"), {XML_ID: c.id})
        ET.SubElement(el, _t("persName")).text = c.name
    tclass = ET.SubElement(profile, _t("textClass"))
    kw = ET.SubElement(tclass, _t("keywords"))
    ET.SubElement(kw, _t("term"), {"type": "genreTitle"}).text = play.raw_genre

    text = ET.SubElement(root, _t("text"))
    body = ET.SubElement(text, _t("body"))
    acts: dict[int, ET.Element] = {}
    for scene in play.scenes:
        if scene.act_index not in acts:
            acts[scene.act_index] = ET.SubElement(body, _t("div"), {"type": "act", "n": str(scene.act_index)})
        div = ET.SubElement(
            acts[scene.act_index],
            _t("div"),
            {"type": "scene", "n": str(scene.scene_index), "who": " ".join(f"#{c}" for c in sorted(scene.present_ids))},
        )
        ET.SubElement(div, _t("stage")).text = "Enter the cast."
        for sp in scene.speeches:
            el = ET.SubElement(div, _t("sp"), {"who": f"#{sp.speaker_id}"})
            ET.SubElement(el, _t("speaker")).text = sp.speaker_id.upper()
            ET.SubElement(el, _t("p")).text = " ".join(["word"] * sp.word_count)
    ET.indent(root)
    return b'<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="utf-8", xml_declaration=False)
