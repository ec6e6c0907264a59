"""Config-driven experiment runner producing reproducible report bundles.

A config is a flat ``key = value`` text file (``#`` comments allowed).  Every
pipeline writes its CSVs plus a ``manifest.json`` recording the config hash,
the seeds, and the package version; re-running the same config reproduces the
bundle byte for byte apart from the manifest timestamp.  On failure, files
already written to the bundle are removed so no partial bundle survives.

Pipelines
  svr            complexity features -> scaled gaze metrics, k-fold SVR;
                 per-fold and out-of-fold scores, feature-group comparison,
                 feature/metric correlation matrix
  baseline       the same SVR pipeline on seed-permuted targets
  head           embeddings -> the four gaze metrics via the multi-task head
  probe          two embedding sets -> per-feature R-squared deltas
  scramble-eval  scrambled corpus export plus surface-feature preservation
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from . import __version__
from .complexity import (
    FeatureGroup,
    feature_matrix,
    profile_document,
    profiles_from_csv,
    profiles_to_csv,
    surface_features,
)
from .corpus import Document, parse_conllu
from .embed import read_embeddings
from .errors import AlignmentError, ConfigError, DegenerateInputError
from .evalx import correlation_matrix, random_baseline, score_pair, scores_to_csv
from .gaze import (
    METRIC_NAMES,
    aggregate_fixations,
    average_all,
    import_sentence_metrics,
    metrics_to_csv,
    read_fixations,
    scale_metrics,
)
from .lexicon import load_lexicon
from .probe import probe_report_to_csv, run_probe
from .regress import (
    HeadParams,
    kfold_split,
    predict_multitask,
    svr_oof_predictions,
    train_multitask_head,
)
from .scramble import scramble_corpus

PIPELINES = ("svr", "baseline", "head", "probe", "scramble-eval")

_KNOWN_KEYS = {
    "pipeline", "conllu", "lexicon", "profiles", "metrics", "fixations",
    "embeddings", "embeddings_pre", "embeddings_ft", "group", "metric",
    "folds", "seed", "seeds", "epochs", "lr", "batch", "language",
    "out_dir", "scale", "scramble_seed",
}


def parse_config(text: str) -> dict[str, str]:
    """Parse the flat key-value grammar; unknown keys are an error."""
    config: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in config:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        config[key] = value
    return config


@dataclass(frozen=True)
class Bundle:
    """What a run produced: the output directory and its files."""

    out_dir: str
    files: tuple[str, ...]
    manifest: dict


class _BundleWriter:
    """Writes bundle files, and removes all of them if the run fails."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def write(self, name: str, text: str):
        path = os.path.join(self.out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        self.files.append(name)

    def rollback(self):
        for name in self.files:
            try:
                os.unlink(os.path.join(self.out_dir, name))
            except OSError:
                pass


def run_experiment(config_text: str, base_dir: str = ".") -> Bundle:
    """Execute the configured pipeline and write its report bundle."""
    config = parse_config(config_text)
    pipeline = _require(config, "pipeline")
    if pipeline not in PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    out_dir = os.path.join(base_dir, _require(config, "out_dir"))

    runner: Callable[[dict[str, str], str, _BundleWriter], dict] = {
        "svr": _run_svr,
        "baseline": _run_baseline,
        "head": _run_head,
        "probe": _run_probe,
        "scramble-eval": _run_scramble_eval,
    }[pipeline]

    writer = _BundleWriter(out_dir)
    try:
        extra = runner(config, base_dir, writer)
        manifest = {
            "pipeline": pipeline,
            "config_sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
            "package_version": __version__,
            "outputs": sorted(writer.files),
            "created_at": datetime.now(timezone.utc).isoformat(),
            **extra,
        }
        writer.write("manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except BaseException:
        writer.rollback()
        raise
    return Bundle(out_dir=out_dir, files=tuple(sorted(writer.files)), manifest=manifest)


def _require(config: dict[str, str], key: str) -> str:
    if key not in config or not config[key]:
        raise ConfigError(f"config is missing required field {key!r}")
    return config[key]


def _read(base_dir: str, rel_path: str) -> str:
    path = os.path.join(base_dir, rel_path)
    if not os.path.exists(path):
        raise ConfigError(f"input file not found: {rel_path!r}")
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_profiles(config: dict[str, str], base_dir: str):
    """Profiles either directly from a CSV or computed from corpus + lexicon."""
    if "profiles" in config:
        return profiles_from_csv(_read(base_dir, config["profiles"]))
    conllu = _require(config, "conllu")
    lexicon_path = _require(config, "lexicon")
    doc = parse_conllu(_read(base_dir, conllu), lang=config.get("language", "und"))
    lexicon = load_lexicon(_read(base_dir, lexicon_path))
    return profile_document(doc, lexicon)


def _load_metrics(config: dict[str, str], base_dir: str):
    """Raw sentence metrics from a metrics CSV or a fixation log."""
    if "metrics" in config:
        return import_sentence_metrics(_read(base_dir, config["metrics"]))
    if "fixations" in config:
        fixations = read_fixations(_read(base_dir, config["fixations"]))
        sentence_ids = {f.sentence_id for f in fixations}
        return average_all(aggregate_fixations(fixations, sentence_ids))
    raise ConfigError("config is missing required field 'metrics' (or 'fixations')")


def _scaled_targets(config: dict[str, str], base_dir: str):
    """Per-metric {sentence_id: value} maps, scaled to 0-100 unless scale=false."""
    raw = _load_metrics(config, base_dir)
    if config.get("scale", "true").lower() != "false":
        raw = scale_metrics(raw).metrics
    return {
        name: {m.sentence_id: float(getattr(m, name)) for m in raw}
        for name in METRIC_NAMES
    }


def _aligned_rows(profiles, targets_by_metric):
    """Profiles restricted to ids with targets, in profile order."""
    with_targets = [
        p for p in profiles
        if all(p.sentence_id in targets_by_metric[m] for m in METRIC_NAMES)
    ]
    if not with_targets:
        raise AlignmentError("no sentence ids shared between profiles and metrics")
    return with_targets


def _fold_rows(language, metric, plan, y, yhat):
    """Per-fold and out-of-fold score rows for one metric."""
    rows = []
    for fold in range(plan.k):
        test = plan.test_indices(fold)
        try:
            pair = score_pair(y[test], yhat[test])
            rows.append([language, metric, str(fold), "%.6f" % pair.explained_variance,
                         "%.6f" % pair.r_squared, str(pair.n)])
        except DegenerateInputError:
            rows.append([language, metric, str(fold), "NA", "NA", str(len(test))])
    pair = score_pair(y, yhat)
    rows.append([language, metric, "oof", "%.6f" % pair.explained_variance,
                 "%.6f" % pair.r_squared, str(pair.n)])
    return rows


def _scores_csv(rows) -> str:
    header = "language,metric,fold,explained_variance,r_squared,n\n"
    return header + "".join(",".join(row) + "\n" for row in rows)


def _run_svr(config, base_dir, writer) -> dict:
    language = config.get("language", "und")
    seed = int(config.get("seed", "0"))
    k = int(config.get("folds", "5"))
    group = FeatureGroup.from_name(config.get("group", "ALL"))

    profiles = _load_profiles(config, base_dir)
    targets = _scaled_targets(config, base_dir)
    aligned = _aligned_rows(profiles, targets)
    plan = kfold_split(len(aligned), k, seed)

    score_rows = []
    subset_rows = []
    for metric in METRIC_NAMES:
        y = np.array([targets[metric][p.sentence_id] for p in aligned])
        X = feature_matrix(aligned, group)
        yhat = svr_oof_predictions(X, y, plan, seed=seed)
        score_rows.extend(_fold_rows(language, metric, plan, y, yhat))
        for subset in (FeatureGroup.LENGTH, FeatureGroup.FREQUENCY,
                       FeatureGroup.STRUCTURAL, FeatureGroup.ALL):
            Xs = feature_matrix(aligned, subset)
            pair = score_pair(y, svr_oof_predictions(Xs, y, plan, seed=seed))
            subset_rows.append([language, metric, subset.name,
                                "%.6f" % pair.explained_variance,
                                "%.6f" % pair.r_squared, str(pair.n)])

    writer.write("profiles.csv", profiles_to_csv(profiles))
    writer.write("scores.csv", _scores_csv(score_rows))
    writer.write("subsets.csv",
                 "language,metric,group,explained_variance,r_squared,n\n"
                 + "".join(",".join(row) + "\n" for row in subset_rows))
    raw_metrics = _load_metrics(config, base_dir)
    if config.get("scale", "true").lower() != "false":
        raw_metrics = scale_metrics(raw_metrics).metrics
    matrix = correlation_matrix(aligned, list(raw_metrics))
    writer.write("correlation.csv", matrix.to_csv())
    return {"seed": seed, "folds": k, "group": group.name, "language": language}


def _run_baseline(config, base_dir, writer) -> dict:
    language = config.get("language", "und")
    seed = int(config.get("seed", "0"))
    k = int(config.get("folds", "5"))
    seeds = [int(s) for s in config.get("seeds", "0,1,2,3,4").split(",") if s.strip()]
    group = FeatureGroup.from_name(config.get("group", "ALL"))

    profiles = _load_profiles(config, base_dir)
    targets = _scaled_targets(config, base_dir)
    aligned = _aligned_rows(profiles, targets)
    plan = kfold_split(len(aligned), k, seed)
    X = feature_matrix(aligned, group)

    rows = []
    for metric in METRIC_NAMES:
        y = np.array([targets[metric][p.sentence_id] for p in aligned])
        pairs = random_baseline(
            X, y, lambda Xp, yp: svr_oof_predictions(Xp, yp, plan, seed=seed), seeds
        )
        for run_seed, pair in zip(seeds, pairs):
            rows.append([language, metric, str(run_seed),
                         "%.6f" % pair.explained_variance,
                         "%.6f" % pair.r_squared, str(pair.n)])
    writer.write("baseline.csv",
                 "language,metric,seed,explained_variance,r_squared,n\n"
                 + "".join(",".join(row) + "\n" for row in rows))
    return {"seed": seed, "seeds": seeds, "folds": k, "group": group.name,
            "language": language}


def _run_head(config, base_dir, writer) -> dict:
    language = config.get("language", "und")
    seed = int(config.get("seed", "0"))
    k = int(config.get("folds", "5"))
    params = HeadParams(
        lr=float(config.get("lr", "1e-3")),
        batch=int(config.get("batch", "32")),
        epochs=int(config.get("epochs", "15")),
        seed=seed,
    )
    embeddings = read_embeddings(_read(base_dir, _require(config, "embeddings")))
    targets = _scaled_targets(config, base_dir)
    ids = sorted(
        set(embeddings.ids()).intersection(
            *(set(targets[m]) for m in METRIC_NAMES))
    )
    if not ids:
        raise AlignmentError("no sentence ids shared between embeddings and metrics")
    X = np.array([embeddings.vectors[sid] for sid in ids])
    Y = np.array([[targets[m][sid] for m in METRIC_NAMES] for sid in ids])

    plan = kfold_split(len(ids), k, seed)
    yhat = np.empty_like(Y)
    first_fold_log: tuple[tuple[int, float], ...] = ()
    for fold in range(plan.k):
        train, test = plan.train_indices(fold), plan.test_indices(fold)
        model = train_multitask_head(X[train], Y[train], params)
        yhat[test] = predict_multitask(model, X[test])
        if fold == 0:
            first_fold_log = model.loss_log

    score_rows = []
    for t, metric in enumerate(METRIC_NAMES):
        score_rows.extend(_fold_rows(language, metric, plan, Y[:, t], yhat[:, t]))
    writer.write("scores.csv", _scores_csv(score_rows))
    writer.write("head_loss.csv", "step,loss\n"
                 + "".join(f"{step},{loss!r}\n" for step, loss in first_fold_log))

    final = train_multitask_head(X, Y, params)
    writer.write("head_model.json", json.dumps({
        "input_dim": final.input_dim,
        "tasks": list(METRIC_NAMES),
        "weights": [list(map(float, row)) for row in final.weights],
        "biases": [float(b) for b in final.biases],
        "provenance": f"multitask head on {embeddings.provenance or 'embeddings'}, all rows",
    }, indent=2) + "\n")
    return {"seed": seed, "folds": k, "language": language,
            "n_sentences": len(ids), "dim": embeddings.dim}


def _run_probe(config, base_dir, writer) -> dict:
    language = config.get("language", "und")
    seed = int(config.get("seed", "0"))
    k = int(config.get("folds", "5"))
    epochs = int(config.get("epochs", "5"))
    emb_pre = read_embeddings(_read(base_dir, _require(config, "embeddings_pre")))
    emb_ft = read_embeddings(_read(base_dir, _require(config, "embeddings_ft")))
    profiles = _load_profiles(config, base_dir)
    kwargs = {}
    if "lr" in config:
        kwargs["lr"] = float(config["lr"])
    report = run_probe(emb_pre, emb_ft, profiles, k=k, epochs=epochs, seed=seed,
                       language=language, **kwargs)
    writer.write("probe.csv", probe_report_to_csv(report))
    return {"seed": seed, "folds": k, "epochs": epochs, "language": language,
            "excluded_features": list(report.excluded_features)}


def _run_scramble_eval(config, base_dir, writer) -> dict:
    language = config.get("language", "und")
    seed = int(config.get("scramble_seed", config.get("seed", "0")))
    doc = parse_conllu(_read(base_dir, _require(config, "conllu")), lang=language)
    lexicon = load_lexicon(_read(base_dir, _require(config, "lexicon")))
    scrambled = scramble_corpus(doc, seed)

    writer.write("scrambled.txt", "".join(
        f"{sent.id}\t{sent.surface_text()}\n" for sent in scrambled
    ))
    rows = []
    for original, shuffled in zip(doc, scrambled):
        before = surface_features(original, lexicon)
        after = surface_features(shuffled, lexicon)
        max_diff = max(abs(before[k2] - after[k2]) for k2 in before)
        rows.append([original.id, shuffled.id, repr(max_diff)])
    writer.write("preservation.csv",
                 "sentence_id,scrambled_id,max_surface_feature_diff\n"
                 + "".join(",".join(row) + "\n" for row in rows))
    return {"seed": seed, "language": language, "n_sentences": len(doc)}
