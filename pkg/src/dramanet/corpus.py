"""TEI drama ingestion: Play records, genre normalization and corpus filters.

Only the structural subset of TEI used by DraCor-style files is read:
``div[@type='act']`` / ``div[@type='scene']`` divisions, ``sp[@who]`` speeches,
and the ``listPerson`` character declaration (``personGrp`` or
``@isGroup='true'`` marks a group character).

A scene's cast is the union of the declared cast (``@who`` on the scene
division and on any ``stage`` element inside it) and every observed speaker.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import re
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

XML_ID = "{http://www.w3.org/XML/1998/namespace}id"

# DraCor classifies genres with Wikidata items
WIKIDATA_GENRES = {
    "Q40831": "comedy",
    "Q80930": "tragedy",
    "Q192881": "tragicomedy",
    "Q131084": "libretto",
}

COMEDY_LABELS = {"comedy", "comedies", "lustspiel", "komödie", "komoedie", "posse"}
TRAGEDY_LABELS = {"tragedy", "tragedies", "tragödie", "tragoedie", "trauerspiel"}
HISTORY_LABELS = {"history", "histories", "historie"}

SKIP_TEXT = {"speaker", "stage", "note", "head", "castList"}


class TeiParseError(ValueError):
    """Malformed XML; ``offset`` is the byte offset of the error (or None)."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class TeiStructureError(ValueError):
    pass


class UndeclaredSpeakerWarning(UserWarning):
    pass


class Genre(str, enum.Enum):
    COMEDY = "Comedy"
    TRAGEDY = "Tragedy"
    OTHER = "Other"


@dataclass(frozen=True)
class CharacterRecord:
    id: str
    name: str
    is_group: bool = False


@dataclass(frozen=True)
class SpeechAct:
    speaker_id: str
    word_count: int


@dataclass(frozen=True)
class Scene:
    act_index: int
    scene_index: int
    present_ids: frozenset[str]
    speeches: tuple[SpeechAct, ...] = ()


@dataclass(frozen=True)
class Play:
    id: str
    title: str
    author: str
    raw_genre: str
    genre: Genre
    characters: tuple[CharacterRecord, ...]
    scenes: tuple[Scene, ...]
    act_count: int = field(default=0)

    def character(self, cid: str) -> CharacterRecord:
        for c in self.characters:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def group_ids(self) -> frozenset[str]:
        return frozenset(c.id for c in self.characters if c.is_group)

    @property
    def on_stage_ids(self) -> frozenset[str]:
        out: set[str] = set()
        for s in self.scenes:
            out |= s.present_ids
        return frozenset(out)


def normalize_genre(raw_genre: str, history_as_tragedy: bool = False) -> Genre:
    """Map a free-text genre label onto Comedy/Tragedy/Other.

    Matching is case-insensitive and word-based, so subtitles such as
    "Ein Lustspiel in fünf Aufzügen" resolve, while "Tragikomödie" does not.
    A label naming both genres is ambiguous and maps to Other.
    """
    words = set(re.findall(r"\w+", (raw_genre or "").casefold()))
    comedy = bool(words & COMEDY_LABELS)
    tragedy = bool(words & TRAGEDY_LABELS)
    if history_as_tragedy and words & HISTORY_LABELS:
        tragedy = True
    if comedy and not tragedy:
        return Genre.COMEDY
    if tragedy and not comedy:
        return Genre.TRAGEDY
    return Genre.OTHER


def _local(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def _refs(value: str | None) -> list[str]:
    if not value:
        return []
    return [tok.lstrip("#") for tok in value.split() if tok.lstrip("#")]


def _spoken_text(node: ET.Element) -> list[str]:
    parts: list[str] = []
    if _local(node.tag) in SKIP_TEXT:
        return parts
    if node.text:
        parts.append(node.text)
    for child in node:
        parts.extend(_spoken_text(child))
        if child.tail:
            parts.append(child.tail)
    return parts


def count_words(sp: ET.Element) -> int:
    """Whitespace tokens of a speech's spoken text (speaker label and stage directions excluded)."""
    return len(" ".join(_spoken_text(sp)).split())


def _byte_offset(data: bytes, line: int, column: int) -> int:
    lines = data.split(b"\n")
    return sum(len(ln) + 1 for ln in lines[: max(line - 1, 0)]) + column


def _first_text(root: ET.Element, local_name: str, **attrs: str) -> str:
    for el in root.iter():
        if _local(el.tag) != local_name:
            continue
        if all(el.get(k) == v for k, v in attrs.items()):
            text = " ".join("".join(el.itertext()).split())
            if text:
                return text
    return ""


def _raw_genre(root: ET.Element) -> str:
    for el in root.iter():
        if _local(el.tag) == "term" and el.get("type") == "genreTitle":
            text = " ".join("".join(el.itertext()).split())
            if text:
                return text
    for el in root.iter():
        if _local(el.tag) == "classCode":
            code = (el.text or "").strip()
            if code in WIKIDATA_GENRES:
                return WIKIDATA_GENRES[code]
    return _first_text(root, "title", type="sub")


def _declared_characters(root: ET.Element) -> list[CharacterRecord]:
    out: list[CharacterRecord] = []
    for el in root.iter():
        name = _local(el.tag)
        if name not in ("person", "personGrp"):
            continue
        cid = el.get(XML_ID) or el.get("id")
        if not cid:
            continue
        label = ""
        for sub in el:
            if _local(sub.tag) in ("persName", "name"):
                label = " ".join("".join(sub.itertext()).split())
                break
        is_group = name == "personGrp" or (el.get("isGroup", "").lower() == "true")
        out.append(CharacterRecord(cid, label or cid, is_group))
    return out


def _is_div(el: ET.Element, kind: str) -> bool:
    return _local(el.tag) == "div" and (el.get("type") or "").lower() == kind


def _scene_divisions(body: ET.Element) -> list[tuple[int, ET.Element]]:
    """(act_index, element) for every scene-level unit, in document order.

    Acts without scene subdivisions count as a single scene; scene divisions
    outside any act attach to the preceding act (act 1 if none precedes).
    """
    acts = [el for el in body.iter() if _is_div(el, "act")]
    if not acts:
        scenes = [el for el in body.iter() if _is_div(el, "scene")]
        return [(1, s) for s in scenes]

    act_of: dict[int, int] = {}
    for ai, act in enumerate(acts, start=1):
        for el in act.iter():
            act_of.setdefault(id(el), ai)

    units: list[tuple[int, ET.Element]] = []
    current_act = 1
    for el in body.iter():
        if _is_div(el, "act"):
            current_act = act_of[id(el)]
            if not any(_is_div(d, "scene") for d in el.iter()):
                units.append((current_act, el))
        elif _is_div(el, "scene"):
            units.append((act_of.get(id(el), current_act), el))
    return units


def _speeches_in(unit: ET.Element) -> Iterable[ET.Element]:
    # speeches nested in a sub-scene belong to that sub-scene, not to this unit
    stack = list(unit)[::-1]
    while stack:
        el = stack.pop()
        if _local(el.tag) == "sp":
            yield el
            continue
        if _is_div(el, "scene"):
            continue
        stack.extend(list(el)[::-1])


def parse_tei(xml_bytes: bytes, play_id: str | None = None) -> Play:
    """Parse one TEI-encoded play into a :class:`Play`.

    Raises :class:`TeiParseError` for malformed XML and
    :class:`TeiStructureError` when the body has no act or scene divisions.
    Speakers missing from the character list trigger an
    :class:`UndeclaredSpeakerWarning` and are synthesized as non-group characters.
    """
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        line, col = exc.position
        raise TeiParseError(f"malformed XML: {exc}", _byte_offset(xml_bytes, line, col)) from exc

    pid = play_id or _first_text(root, "idno", type="dracor") or root.get(XML_ID) or ""
    title = _first_text(root, "title", type="main") or _first_text(root, "title")
    author = _first_text(root, "author")
    raw_genre = _raw_genre(root)

    characters = _declared_characters(root)
    known = {c.id for c in characters}

    body = next((el for el in root.iter() if _local(el.tag) == "body"), None)
    if body is None:
        raise TeiStructureError(f"{pid or 'play'}: no <body> element")
    units = _scene_divisions(body)
    if not units:
        raise TeiStructureError(f"{pid or 'play'}: no act or scene divisions found")

    scenes: list[Scene] = []
    per_act: dict[int, int] = {}
    for act_index, unit in units:
        declared = set(_refs(unit.get("who")))
        for el in unit.iter():
            if _local(el.tag) == "stage":
                declared.update(_refs(el.get("who")))
        speeches: list[SpeechAct] = []
        for sp in _speeches_in(unit):
            speakers = _refs(sp.get("who"))
            if not speakers:
                log.debug("%s: speech without @who skipped", pid)
                continue
            words = count_words(sp)
            for sid in speakers:
                if sid not in known:
                    warnings.warn(
                        f"{pid}: speaker '{sid}' not declared; synthesized",
                        UndeclaredSpeakerWarning,
                        stacklevel=2,
                    )
                    characters.append(CharacterRecord(sid, sid, False))
                    known.add(sid)
                speeches.append(SpeechAct(sid, words))
        for sid in declared - known:
            warnings.warn(
                f"{pid}: cast member '{sid}' not declared; synthesized",
                UndeclaredSpeakerWarning,
                stacklevel=2,
            )
            characters.append(CharacterRecord(sid, sid, False))
            known.add(sid)
        present = declared | {s.speaker_id for s in speeches}
        if not present:
            log.debug("%s: empty scene in act %d skipped", pid, act_index)
            continue
        per_act[act_index] = per_act.get(act_index, 0) + 1
        scenes.append(Scene(act_index, per_act[act_index], frozenset(present), tuple(speeches)))

    if not scenes:
        raise TeiStructureError(f"{pid or 'play'}: no populated scenes")
    scenes.sort(key=lambda s: (s.act_index, s.scene_index))
    # renumber acts densely in case an act held only empty scenes
    act_map = {a: i for i, a in enumerate(sorted({s.act_index for s in scenes}), start=1)}
    scenes = [replace(s, act_index=act_map[s.act_index]) for s in scenes]

    return Play(
        id=pid,
        title=title,
        author=author,
        raw_genre=raw_genre,
        genre=normalize_genre(raw_genre),
        characters=tuple(characters),
        scenes=tuple(scenes),
        act_count=max(s.act_index for s in scenes),
    )


def read_play(path: str | Path, history_as_tragedy: bool = False) -> Play:
    path = Path(path)
    play = parse_tei(path.read_bytes(), play_id=None)
    if not play.id:
        play = replace(play, id=path.stem)
    if history_as_tragedy:
        play = replace(play, genre=normalize_genre(play.raw_genre, True))
    return play


def read_manifest(path: str | Path) -> dict[str, str]:
    """``play_id,genre`` CSV to a dict of raw genre overrides."""
    with open(path, newline="", encoding="utf-8") as fh:
        return {row["play_id"]: row["genre"] for row in csv.DictReader(fh)}


def apply_manifest(
    plays: Sequence[Play], overrides: dict[str, str], history_as_tragedy: bool = False
) -> list[Play]:
    out = []
    for p in plays:
        if p.id in overrides:
            raw = overrides[p.id]
            p = replace(p, raw_genre=raw, genre=normalize_genre(raw, history_as_tragedy))
        out.append(p)
    return out


def drop_reason(play: Play, min_characters: int = 5, min_scenes: int = 2) -> str | None:
    if play.genre not in (Genre.COMEDY, Genre.TRAGEDY):
        return "genre"
    if len(play.characters) <= min_characters:
        return "characters"
    if len(play.scenes) <= min_scenes:
        return "scenes"
    return None


def filter_corpus(plays: Sequence[Play], min_characters: int = 5, min_scenes: int = 2) -> list[Play]:
    """Keep comedies and tragedies with more than ``min_characters`` characters
    and more than ``min_scenes`` scenes, in input order."""
    if min_characters < 0 or min_scenes < 0:
        raise ValueError("filter thresholds must be non-negative")
    return [p for p in plays if drop_reason(p, min_characters, min_scenes) is None]


# -- canonical JSON interchange ---------------------------------------------

def play_to_dict(play: Play) -> dict:
    return {
        "id": play.id,
        "title": play.title,
        "author": play.author,
        "raw_genre": play.raw_genre,
        "genre": play.genre.value,
        "act_count": play.act_count,
        "characters": [
            {"id": c.id, "name": c.name, "is_group": c.is_group} for c in play.characters
        ],
        "scenes": [
            {
                "act": s.act_index,
                "scene": s.scene_index,
                "present": sorted(s.present_ids),
                "speeches": [[sp.speaker_id, sp.word_count] for sp in s.speeches],
            }
            for s in play.scenes
        ],
    }


def play_from_dict(d: dict) -> Play:
    return Play(
        id=d["id"],
        title=d.get("title", ""),
        author=d.get("author", ""),
        raw_genre=d.get("raw_genre", ""),
        genre=Genre(d["genre"]),
        characters=tuple(
            CharacterRecord(c["id"], c.get("name", c["id"]), bool(c.get("is_group", False)))
            for c in d["characters"]
        ),
        scenes=tuple(
            Scene(
                s["act"],
                s["scene"],
                frozenset(s["present"]),
                tuple(SpeechAct(sid, int(wc)) for sid, wc in s["speeches"]),
            )
            for s in d["scenes"]
        ),
        act_count=d["act_count"],
    )


def dumps_corpus(plays: Sequence[Play]) -> str:
    return json.dumps(
        {"format": "dramanet-corpus/1", "plays": [play_to_dict(p) for p in plays]},
        ensure_ascii=False,
        indent=1,
    )


def loads_corpus(text: str) -> list[Play]:
    return [play_from_dict(d) for d in json.loads(text)["plays"]]
