"""Probing: how linearly recoverable is each complexity feature from frozen
sentence embeddings, and how much does that change after fine-tuning?

For each fold of a k-fold plan over the corpus, a multi-head linear probe is
trained on one embedding set's training rows against all nine features at
once (z-scored per fold on the training rows), then scored per feature by
R-squared on the held-out rows.  The same is done for the second embedding
set with the same fold plan, the same target scaler, and the same training
seed, so two identical embedding sets yield a delta of exactly zero.  Fold
scores are averaged per feature; delta = r2_finetuned - r2_pretrained.

Features that are constant over the corpus have no variance to explain;
they are flagged, excluded from delta averaging, and reported explicitly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexity import FEATURE_NAMES, ComplexityProfile, feature_matrix
from .embed import EmbeddingSet
from .errors import AlignmentError, DegenerateInputError
from .regress import HeadParams, fit_scaler, kfold_split, predict_multitask, train_multitask_head

#: Default probe-head learning rate; large enough that 5 epochs of plain GD
#: reach the linear optimum on standardized targets.
PROBE_LR = 0.05


@dataclass(frozen=True)
class ProbeTargets:
    """The 9-column target matrix plus the constant-column report."""

    matrix: np.ndarray  # (n, 9) in canonical feature order
    feature_names: tuple[str, ...]
    constant_features: tuple[str, ...]


def probe_targets(profiles: Sequence[ComplexityProfile],
                  standardize: bool = True) -> ProbeTargets:
    """Stack profiles into the 9-column target matrix, canonical order.

    With ``standardize`` the columns are z-scored (population) over the given
    rows; constant columns are flagged either way and left at zero when
    standardized.
    """
    if not profiles:
        raise DegenerateInputError("no profiles to probe")
    matrix = feature_matrix(tuple(profiles))
    constant = tuple(
        name for i, name in enumerate(FEATURE_NAMES)
        if np.all(matrix[:, i] == matrix[0, i])
    )
    if standardize:
        matrix = fit_scaler(matrix).transform(matrix)
    return ProbeTargets(matrix=matrix, feature_names=FEATURE_NAMES,
                        constant_features=constant)


@dataclass(frozen=True)
class ProbeFeatureResult:
    feature: str
    r2_pretrained: float
    r2_finetuned: float
    delta: float  # always r2_finetuned - r2_pretrained


@dataclass(frozen=True)
class ProbeReport:
    """Per-feature probe outcome for one language."""

    results: tuple[ProbeFeatureResult, ...]
    excluded_features: tuple[str, ...]
    language: str
    k: int
    seed: int

    @property
    def mean_delta(self) -> float:
        return float(np.mean([r.delta for r in self.results]))

    def delta_of(self, feature: str) -> float:
        for r in self.results:
            if r.feature == feature:
                return r.delta
        raise KeyError(feature)


def run_probe(
    emb_pre: EmbeddingSet,
    emb_ft: EmbeddingSet,
    profiles: Sequence[ComplexityProfile],
    k: int = 5,
    epochs: int = 5,
    seed: int = 0,
    lr: float = PROBE_LR,
    batch: int = 32,
    language: str = "und",
    train_size: int | None = None,
    test_size: int | None = None,
) -> ProbeReport:
    """Probe both embedding sets and report per-feature R-squared deltas.

    When ``train_size``/``test_size`` are given, every fold must split the
    corpus into exactly those counts.  Embeddings are never mutated.
    """
    ids = [p.sentence_id for p in profiles]
    for label, emb in (("first", emb_pre), ("second", emb_ft)):
        missing = [sid for sid in ids if sid not in emb]
        if missing:
            raise AlignmentError(
                f"{label} embedding set lacks {len(missing)} profiled sentence(s), "
                f"e.g. {missing[:3]}"
            )
    n = len(ids)
    plan = kfold_split(n, k, seed)
    if train_size is not None or test_size is not None:
        for fold in range(k):
            n_test = len(plan.test_indices(fold))
            if test_size is not None and n_test != test_size:
                raise DegenerateInputError(
                    f"fold {fold} holds out {n_test} rows, expected {test_size}"
                )
            if train_size is not None and n - n_test != train_size:
                raise DegenerateInputError(
                    f"fold {fold} trains on {n - n_test} rows, expected {train_size}"
                )

    targets = probe_targets(profiles, standardize=False)
    Y_raw = targets.matrix
    X_pre = np.array([emb_pre.vectors[sid] for sid in ids], dtype=float)
    X_ft = np.array([emb_ft.vectors[sid] for sid in ids], dtype=float)

    per_feature_r2 = {name: {"pre": [], "ft": []} for name in FEATURE_NAMES}
    for fold in range(k):
        train, test = plan.train_indices(fold), plan.test_indices(fold)
        scaler = fit_scaler(Y_raw[train])  # shared across both conditions
        Yz_train = scaler.transform(Y_raw[train])
        Yz_test = scaler.transform(Y_raw[test])
        fold_seed = seed * 100003 + fold  # same stream for both conditions
        head_params = HeadParams(lr=lr, batch=batch, epochs=epochs, eval_every=40,
                                 patience=None, validation_fraction=0.0, seed=fold_seed)
        for cond, X in (("pre", X_pre), ("ft", X_ft)):
            model = train_multitask_head(X[train], Yz_train, head_params)
            pred = predict_multitask(model, X[test])
            for j, name in enumerate(FEATURE_NAMES):
                if name in targets.constant_features:
                    continue
                col = Yz_test[:, j]
                ss_tot = float(np.sum((col - col.mean()) ** 2))
                if ss_tot == 0.0:
                    continue  # held-out slice happens to be constant
                ss_res = float(np.sum((col - pred[:, j]) ** 2))
                per_feature_r2[name][cond].append(1.0 - ss_res / ss_tot)

    results = []
    for name in FEATURE_NAMES:
        scores = per_feature_r2[name]
        if name in targets.constant_features or not scores["pre"]:
            continue
        r2_pre = float(np.mean(scores["pre"]))
        r2_ft = float(np.mean(scores["ft"]))
        results.append(ProbeFeatureResult(
            feature=name, r2_pretrained=r2_pre, r2_finetuned=r2_ft,
            delta=r2_ft - r2_pre,
        ))
    return ProbeReport(
        results=tuple(results),
        excluded_features=targets.constant_features,
        language=language,
        k=k,
        seed=seed,
    )


def probe_report_to_csv(report: ProbeReport) -> str:
    """Rows: feature, r2_pre, r2_ft, delta, language; excluded features get NA."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["feature", "r2_pre", "r2_ft", "delta", "language"])
    for r in report.results:
        writer.writerow([r.feature, "%.6f" % r.r2_pretrained, "%.6f" % r.r2_finetuned,
                         "%.6f" % r.delta, report.language])
    for name in report.excluded_features:
        writer.writerow([name, "NA", "NA", "NA", report.language])
    return buf.getvalue()
