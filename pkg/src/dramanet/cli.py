"""Command-line front end: ``dramanet <subcommand> [options]``.

Every subcommand reads its inputs from ``--output-dir`` (or ingests
``--corpus-dir`` on the fly) and writes its tables there. Exit codes:

    0  success
    1  unexpected failure
    2  unreadable corpus directory or invalid option
    3  no play survived the corpus filters
    4  missing upstream artifact (the message names the command to run)
    5  unknown play id (export-graph)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import ablate, corpus, features, graph, learn, stats

log = logging.getLogger("dramanet")

OUTPUT_ENV = "DRAMANET_OUTPUT_DIR"
CORPUS_FILE = "corpus.json"
SCREEN_FILE = "correlation_screen.json"

# density first: it is the measure the screening must keep
SCREEN_PRIORITY = features.FEATURE_NAMES + features.EXCLUDED_NAMES


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    corpus_dir: Path | None
    manifest: Path | None
    min_characters: int = 5
    min_scenes: int = 2
    history_as_tragedy: bool = False
    correlation_threshold: float = 0.9
    svm_C: float = 1.0
    output_dir: Path = Path("dramanet-out")
    format: str = "csv"
    parallelism: int = 1

    def validate(self) -> None:
        if self.min_characters < 0 or self.min_scenes < 0:
            raise CliError("filter thresholds must be non-negative", 2)
        if not 0 < self.correlation_threshold <= 1:
            raise CliError("--correlation-threshold must lie in (0, 1]", 2)
        if self.svm_C <= 0:
            raise CliError("--svm-c must be positive", 2)
        if self.corpus_dir is not None and not (self.corpus_dir.is_dir() and os.access(self.corpus_dir, os.R_OK)):
            raise CliError(f"cannot read corpus directory {self.corpus_dir}", 2)
        if self.manifest is not None and not self.manifest.is_file():
            raise CliError(f"cannot read manifest {self.manifest}", 2)


# -- output helpers -------------------------------------------------------------

def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "NA" if math.isnan(v) else repr(v)
    return str(value)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_table(header: Sequence[str], rows: Sequence[Sequence], kind: str) -> str:
    if kind == "json":
        records = [{h: (None if isinstance(v, float) and math.isnan(v) else v) for h, v in zip(header, r)} for r in rows]
        return json.dumps(records, indent=1, ensure_ascii=False, default=float) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def dump_json(obj) -> str:
    def clean(o):
        if isinstance(o, float) and math.isnan(o):
            return None
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, (np.floating,)):
            return clean(float(o))
        if isinstance(o, (np.integer,)):
            return int(o)
        return o

    return json.dumps(clean(obj), indent=1, ensure_ascii=False, sort_keys=False) + "\n"


class Outputs:
    """Collects artifacts and writes them only once the command has succeeded."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.files: dict[Path, str] = {}

    def table(self, stem: str, header, rows) -> None:
        ext = "json" if self.cfg.format == "json" else "csv"
        self.files[self.cfg.output_dir / f"{stem}.{ext}"] = render_table(header, rows, self.cfg.format)

    def json(self, name: str, obj) -> None:
        self.files[self.cfg.output_dir / name] = dump_json(obj)

    def text(self, name: str, text: str) -> None:
        self.files[self.cfg.output_dir / name] = text

    def commit(self) -> list[Path]:
        for path, text in self.files.items():
            write_atomic(path, text)
        return list(self.files)


def _pmap(fn: Callable, items: Sequence, parallelism: int) -> list:
    if parallelism > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- pipeline stages ---------------------------------------------------------------

def _parse_file(path: Path):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            play = corpus.read_play(path)
        except (corpus.TeiParseError, corpus.TeiStructureError) as exc:
            return path.name, None, str(exc), [str(w.message) for w in caught]
    return path.name, play, None, [str(w.message) for w in caught]


def ingest(cfg: RunConfig) -> tuple[list[corpus.Play], dict]:
    if cfg.corpus_dir is None:
        raise CliError("--corpus-dir is required", 2)
    try:
        files = sorted(p for p in cfg.corpus_dir.iterdir() if p.suffix.lower() == ".xml")
    except OSError as exc:
        raise CliError(f"cannot read corpus directory {cfg.corpus_dir}: {exc}", 2) from exc

    parsed = _pmap(_parse_file, files, cfg.parallelism)
    plays = []
    dropped: list[dict] = []
    for name, play, err, warns in parsed:
        for w in warns:
            log.warning("%s: %s", name, w)
        if play is None:
            dropped.append({"file": name, "play_id": None, "reason": "parse_error", "detail": err})
            continue
        plays.append(play)

    if cfg.history_as_tragedy:
        plays = [replace(p, genre=corpus.normalize_genre(p.raw_genre, True)) for p in plays]
    if cfg.manifest is not None:
        plays = corpus.apply_manifest(plays, corpus.read_manifest(cfg.manifest), cfg.history_as_tragedy)

    kept = []
    for p in plays:
        reason = corpus.drop_reason(p, cfg.min_characters, cfg.min_scenes)
        if reason is None:
            kept.append(p)
        else:
            dropped.append({"file": None, "play_id": p.id, "reason": reason, "detail": None})

    reasons: dict[str, int] = {}
    for d in dropped:
        reasons[d["reason"]] = reasons.get(d["reason"], 0) + 1
    summary = {
        "files": len(files),
        "kept": len(kept),
        "dropped": len(dropped),
        "drop_reasons": dict(sorted(reasons.items())),
        "genres": {
            g.value: sum(1 for p in kept if p.genre == g) for g in (corpus.Genre.COMEDY, corpus.Genre.TRAGEDY)
        },
        "filters": {
            "min_characters": cfg.min_characters,
            "min_scenes": cfg.min_scenes,
            "history_as_tragedy": cfg.history_as_tragedy,
        },
        "dropped_plays": dropped,
    }
    return kept, summary


def load_corpus(cfg: RunConfig) -> list[corpus.Play]:
    path = cfg.output_dir / CORPUS_FILE
    if path.is_file():
        return corpus.loads_corpus(path.read_text(encoding="utf-8"))
    if cfg.corpus_dir is not None:
        plays, summary = ingest(cfg)
        if not plays:
            raise CliError(f"no play retained; drop reasons {summary['drop_reasons']}", 3)
        return plays
    raise CliError(f"missing {path}; run `dramanet ingest --corpus-dir DIR` first", 4)


def all_features(cfg: RunConfig, plays: list[corpus.Play]) -> list[features.FeatureVector]:
    return _pmap(features.extract_features, plays, cfg.parallelism)


def retained_features(cfg: RunConfig) -> list[str]:
    path = cfg.output_dir / SCREEN_FILE
    if path.is_file():
        return json.loads(path.read_text(encoding="utf-8"))["retained"]
    return list(features.FEATURE_NAMES)


def build_dataset(cfg: RunConfig) -> tuple[list[features.FeatureVector], features.Dataset]:
    plays = load_corpus(cfg)
    vectors = all_features(cfg, plays)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", features.ConstantColumnWarning)
        ds = features.assemble(vectors, retained_features(cfg))
    for w in caught:
        log.warning("%s", w.message)
    return vectors, ds


# -- subcommands -------------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> str:
    plays, summary = ingest(cfg)
    if not plays:
        raise CliError(f"no play retained; drop reasons {summary['drop_reasons']}", 3)
    out = Outputs(cfg)
    out.text(CORPUS_FILE, corpus.dumps_corpus(plays))
    out.json("ingest_summary.json", summary)
    out.commit()
    reasons = ", ".join(f"{k}={v}" for k, v in summary["drop_reasons"].items()) or "none"
    return (
        f"Parsed {summary['files']} files: kept {summary['kept']} plays "
        f"({summary['genres']['Comedy']} comedies, {summary['genres']['Tragedy']} tragedies), "
        f"dropped {summary['dropped']} (reasons: {reasons})."
    )


def cmd_features(cfg: RunConfig) -> str:
    vectors, ds = build_dataset(cfg)
    out = Outputs(cfg)
    header = ["play_id", "genre"] + ds.feature_names
    out.table("features", header, [[v.play_id, v.genre.value] + list(r) for v, r in zip(vectors, ds.raw)])
    out.table("features_z", header, [[v.play_id, v.genre.value] + list(r) for v, r in zip(vectors, ds.matrix)])
    out.json(
        "features_meta.json",
        {
            "columns": ds.feature_names,
            "zscore": "sample standard deviation (n-1); constant columns map to 0",
            "speech_fallback": [v.play_id for v in vectors if v.speech_fallback],
            "side_table": {
                v.play_id: {n: getattr(v, n) for n in features.EXTRA_NAMES} for v in vectors
            },
        },
    )
    out.commit()
    n_fb = sum(v.speech_fallback for v in vectors)
    return (
        f"Computed {len(ds.feature_names)} features for {ds.n_plays} plays "
        f"({int((ds.labels > 0).sum())} comedies, {int((ds.labels < 0).sum())} tragedies); "
        f"{n_fb} plays used the all-speakers fallback for average character speech."
    )


def cmd_correlate(cfg: RunConfig) -> str:
    plays = load_corpus(cfg)
    vectors = all_features(cfg, plays)
    names = features.ALL_MEASURES
    columns = {n: [getattr(v, n) for v in vectors] for n in names}
    finite = {n: c for n, c in columns.items() if np.all(np.isfinite(c))}
    for n in set(columns) - set(finite):
        log.warning("measure %s has undefined values and is left out of the correlation matrix", n)
    cm = stats.pearson_matrix(finite)
    excluded = stats.correlation_screen(
        cm, cfg.correlation_threshold, [n for n in SCREEN_PRIORITY if n in finite]
    )
    excluded |= set(names) - set(finite) - {"n_characters"}
    retained = [n for n in SCREEN_PRIORITY if n not in excluded]
    out = Outputs(cfg)
    out.table("correlation", [""] + list(cm.feature_names), [[a] + list(row) for a, row in zip(cm.feature_names, cm.values)])
    out.json(SCREEN_FILE, {"threshold": cfg.correlation_threshold, "excluded": sorted(excluded), "retained": retained})
    out.commit()
    return (
        f"Pearson correlations over {len(cm.feature_names)} measures and {len(vectors)} plays; "
        f"at |r| > {cfg.correlation_threshold} excluded {sorted(excluded) or 'nothing'}, "
        f"{len(retained)} features retained."
    )


def cmd_test(cfg: RunConfig) -> str:
    _, ds = build_dataset(cfg)
    com = ds.labels > 0
    rows = []
    for j, name in enumerate(ds.feature_names):
        res = stats.wilcoxon_ranksum(ds.raw[com, j], ds.raw[~com, j])
        rows.append([name, res.statistic_U, res.p_value, res.p_value < 0.05])
    out = Outputs(cfg)
    out.table("wilcoxon", ["feature", "U", "p_value", "significant@0.05"], rows)
    out.commit()
    sig = [r[0] for r in rows if r[3]]
    nonsig = [r[0] for r in rows if not r[3]]
    return (
        f"Wilcoxon rank-sum, comedies vs tragedies: {len(sig)} of {len(rows)} features differ at p < 0.05; "
        f"not significant: {', '.join(nonsig) or 'none'}."
    )


def cmd_pca(cfg: RunConfig) -> str:
    vectors, ds = build_dataset(cfg)
    res = stats.pca(ds.matrix)
    pcs = [f"PC{k + 1}" for k in range(res.loadings.shape[1])]
    out = Outputs(cfg)
    out.table(
        "pca_scores",
        ["play_id", "genre"] + pcs,
        [[v.play_id, v.genre.value] + list(s) for v, s in zip(vectors, res.scores)],
    )
    out.table("pca_loadings", ["feature"] + pcs, [[n] + list(r) for n, r in zip(ds.feature_names, res.loadings)])
    out.table(
        "pca_variance",
        ["component", "explained_variance", "explained_ratio"],
        [[pc, v, r] for pc, v, r in zip(pcs, res.explained_variance, res.explained_ratio)],
    )
    out.commit()
    r = res.explained_ratio
    return f"PCA on {ds.n_plays} plays x {len(ds.feature_names)} features: PC1 explains {r[0]:.1%}, PC2 {r[1]:.1%}."


def cmd_classify(cfg: RunConfig, with_size: bool = False) -> str:
    _, ds = build_dataset(cfg)
    if with_size:
        ds = learn.augment_with_size(ds)
    rep = learn.loo_evaluate(ds, cfg.svm_C, cfg.parallelism)
    n = ds.n_plays
    n_com = int((ds.labels > 0).sum())
    out = Outputs(cfg)
    out.json(
        "classification_size.json" if with_size else "classification.json",
        {"C": cfg.svm_C, "features": ds.feature_names, **rep.to_dict()},
    )
    out.commit()
    return (
        f"Linear SVM (C={cfg.svm_C}), leave-one-out over {n} plays, {len(ds.feature_names)} features. "
        f"Chance rates: comedy {n_com}/{n} = {n_com / n:.2f}, tragedy {n - n_com}/{n} = {(n - n_com) / n:.2f}.\n"
        + rep.summary()
    )


def cmd_rfe(cfg: RunConfig, with_size: bool = False) -> str:
    _, ds = build_dataset(cfg)
    if with_size:
        ds = learn.augment_with_size(ds)
    trace = learn.rfe(ds, cfg.svm_C, cfg.parallelism)
    out = Outputs(cfg)
    out.table("rfe", ["step", "eliminated", "accuracy"], [[i, s.eliminated or "", s.accuracy] for i, s in enumerate(trace)])
    out.json(
        "rfe.json",
        [
            {"step": i, "eliminated": s.eliminated, "remaining": list(s.remaining), "accuracy": s.accuracy, "mean_recall": s.mean_recall}
            for i, s in enumerate(trace)
        ],
    )
    out.commit()
    order = [s.eliminated for s in trace[1:]]
    best = max(trace, key=lambda s: s.accuracy)
    return (
        f"RFE over {len(ds.feature_names)} features, elimination order: {', '.join(order)}. "
        f"Full-set LOO accuracy {trace[0].accuracy:.3f}; best {best.accuracy:.3f} with {len(best.remaining)} features."
    )


def cmd_ablate(cfg: RunConfig, acts: int | None = None) -> str:
    plays = load_corpus(cfg)
    out = Outputs(cfg)
    header = ["play_id", "genre", "act_removed", "density_full", "density_ablated", "delta"]
    if acts is None:
        records, summary = ablate.last_act_effect(plays)
        out.table("ablation", header, [[r.play_id, r.genre.value, r.act_removed, r.density_full, r.density_ablated, r.delta] for r in records])
        out.json("ablation_summary.json", summary)
        out.commit()
        g = summary["genres"]
        parts = [f"{k}: n={v['n']}, mean delta={v.get('mean', float('nan')):+.4f}" for k, v in g.items()]
        tests = []
        for key, label in (("wilcoxon_full", "full plays"), ("wilcoxon_without_last_act", "without last acts")):
            if summary[key]:
                tests.append(f"{label} p={summary[key]['p_value']:.4g}")
        return "Last-act ablation (delta = full - ablated density). " + "; ".join(parts) + ". Density by genre: " + ", ".join(tests) + "."
    try:
        records, rows = ablate.per_act_effect(plays, acts)
    except ablate.AblationError as exc:
        raise CliError(str(exc), 1) from exc
    out.table(f"ablation_acts{acts}", header, [[r.play_id, r.genre.value, r.act_removed, r.density_full, r.density_ablated, r.delta] for r in records])
    cols = ["genre", "act", "n", "mean", "median", "min", "q1", "q3", "max"]
    out.table(f"per_act{acts}", cols, [[row[c] for c in cols] for row in rows])
    out.commit()
    lines = [f"Per-act ablation over {len({r.play_id for r in records})} {acts}-act plays (mean delta by act):"]
    for g in ("Comedy", "Tragedy"):
        cells = [f"{row['act']}:{row['mean']:+.4f}" for row in rows if row["genre"] == g]
        if cells:
            lines.append(f"  {g:8s} " + "  ".join(cells))
    return "\n".join(lines)


def cmd_export_graph(cfg: RunConfig, play_id: str) -> str:
    plays = load_corpus(cfg)
    match = [p for p in plays if p.id == play_id]
    if not match:
        raise CliError(f"unknown play id {play_id!r}", 5)
    play = match[0]
    g = graph.build_graph(play)
    labels = {c.id: c.name for c in play.characters}
    safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in play_id)
    out = Outputs(cfg)
    out.text(f"graphs/{safe}.gexf", graph.to_gexf(g, labels))
    out.text(f"graphs/{safe}.csv", graph.to_edge_csv(g))
    out.commit()
    return f"Exported {play_id}: {g.n_nodes} nodes, {g.n_edges} edges to {cfg.output_dir / 'graphs'}."


# -- argument parsing -----------------------------------------------------------------

def _parallelism(value: str) -> int:
    if value == "auto":
        return os.cpu_count() or 1
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("parallelism must be >= 1 or 'auto'")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus-dir", type=Path, help="directory of TEI .xml plays")
    common.add_argument("--manifest", type=Path, help="CSV with play_id,genre overrides")
    common.add_argument("--min-characters", type=int, default=5, help="keep plays with MORE than this many characters")
    common.add_argument("--min-scenes", type=int, default=2, help="keep plays with MORE than this many scenes")
    common.add_argument("--history-as-tragedy", action="store_true", help="count history plays as tragedies")
    common.add_argument("--correlation-threshold", type=float, default=0.9)
    common.add_argument("--svm-c", type=float, default=1.0)
    common.add_argument(
        "--output-dir", type=Path, default=None, help=f"artifact directory (default ${OUTPUT_ENV} or ./dramanet-out)"
    )
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--parallelism", type=_parallelism, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dramanet", description="Structural genre analysis of TEI drama corpora.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="parse and filter a TEI corpus")
    sub.add_parser("features", parents=[common], help="per-play feature table")
    sub.add_parser("correlate", parents=[common], help="correlation matrix and feature screening")
    sub.add_parser("test", parents=[common], help="Wilcoxon rank-sum tests by genre")
    sub.add_parser("pca", parents=[common], help="principal component analysis")
    p = sub.add_parser("classify", parents=[common], help="leave-one-out linear SVM")
    p.add_argument("--with-size", action="store_true", help="add character count as a feature")
    p = sub.add_parser("rfe", parents=[common], help="recursive feature elimination")
    p.add_argument("--with-size", action="store_true", help="add character count as a feature")
    p = sub.add_parser("ablate", parents=[common], help="act ablation density effects")
    p.add_argument("--acts", type=int, default=None, help="ablate every act of plays with exactly this many acts")
    p = sub.add_parser("export-graph", parents=[common], help="GEXF and edge-list export of one play")
    p.add_argument("--play-id", required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    out = args.output_dir or Path(os.environ.get(OUTPUT_ENV, "dramanet-out"))
    return RunConfig(
        corpus_dir=args.corpus_dir,
        manifest=args.manifest,
        min_characters=args.min_characters,
        min_scenes=args.min_scenes,
        history_as_tragedy=args.history_as_tragedy,
        correlation_threshold=args.correlation_threshold,
        svm_C=args.svm_c,
        output_dir=out,
        format=args.format,
        parallelism=args.parallelism,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    cfg = config_from_args(args)
    try:
        cfg.validate()
        if args.command == "ingest":
            msg = cmd_ingest(cfg)
        elif args.command == "features":
            msg = cmd_features(cfg)
        elif args.command == "correlate":
            msg = cmd_correlate(cfg)
        elif args.command == "test":
            msg = cmd_test(cfg)
        elif args.command == "pca":
            msg = cmd_pca(cfg)
        elif args.command == "classify":
            msg = cmd_classify(cfg, args.with_size)
        elif args.command == "rfe":
            msg = cmd_rfe(cfg, args.with_size)
        elif args.command == "ablate":
            msg = cmd_ablate(cfg, args.acts)
        else:
            msg = cmd_export_graph(cfg, args.play_id)
    except CliError as exc:
        print(f"dramanet {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (features.FeatureError, learn.SvmError, ValueError) as exc:
        print(f"dramanet {args.command}: {exc}", file=sys.stderr)
        return 1
    print(msg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
