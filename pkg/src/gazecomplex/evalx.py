"""Scoring and correlation analysis.

Two scores are reported side by side: explained variance, computed from
biased (population) variances and therefore blind to a constant prediction
offset, and R-squared, computed from raw sums of squares and therefore
penalized by the same offset.  The two obey

    r_squared = explained_variance - mean(residual)^2 / Var_b(y)

so R-squared never exceeds explained variance, with equality exactly when
the residuals have zero mean.

Spearman correlation is Pearson on tie-averaged ranks.  The random-pairing
baseline permutes targets under a seed and re-runs a cross-validating
pipeline, scoring out-of-fold predictions against the permuted targets.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .complexity import FEATURE_NAMES, ComplexityProfile
from .errors import AlignmentError, DegenerateInputError
from .gaze import METRIC_NAMES, GazeMetrics

#: Display threshold for the significance flags (two-sided).
SIGNIFICANCE_ALPHA = 0.05


@dataclass(frozen=True)
class ScorePair:
    """Both scores for one prediction vector."""

    explained_variance: float
    r_squared: float
    n: int


def explained_variance(y: Sequence[float] | np.ndarray,
                       yhat: Sequence[float] | np.ndarray) -> float:
    """1 - Var_b(y - yhat) / Var_b(y), with population variances."""
    y, yhat = _check_pair(y, yhat)
    var_y = float(np.var(y))
    if var_y == 0.0:
        raise DegenerateInputError("target vector is constant")
    return 1.0 - float(np.var(y - yhat)) / var_y


def r_squared(y: Sequence[float] | np.ndarray,
              yhat: Sequence[float] | np.ndarray) -> float:
    """1 - SS_res / SS_tot, from raw sums of squares."""
    y, yhat = _check_pair(y, yhat)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateInputError("target vector is constant")
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def score_pair(y: Sequence[float] | np.ndarray,
               yhat: Sequence[float] | np.ndarray) -> ScorePair:
    return ScorePair(
        explained_variance=explained_variance(y, yhat),
        r_squared=r_squared(y, yhat),
        n=len(np.asarray(y)),
    )


def _check_pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1:
        raise DegenerateInputError(f"shape mismatch: y {y.shape}, yhat {yhat.shape}")
    if len(y) < 2:
        raise DegenerateInputError("scoring needs at least 2 points")
    return y, yhat


def average_ranks(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean of their rank range."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        raise DegenerateInputError("constant input to correlation")
    return float(dx @ dy) / denom


def spearman(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Pearson correlation of tie-averaged ranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateInputError(f"shape mismatch: x {x.shape}, y {y.shape}")
    if len(x) < 3:
        raise DegenerateInputError("correlation needs at least 3 points")
    return _pearson(average_ranks(x), average_ranks(y))


def _significance_p(rho: float, n: int) -> float:
    """Two-sided p-value from the large-sample t approximation."""
    if n <= 2 or abs(rho) >= 1.0:
        return 0.0 if abs(rho) >= 1.0 else 1.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return math.erfc(abs(t) / math.sqrt(2.0))


def random_baseline(
    X: np.ndarray,
    y: np.ndarray,
    pipeline: Callable[[np.ndarray, np.ndarray], np.ndarray],
    seeds: Sequence[int],
    shuffle: bool = True,
) -> tuple[ScorePair, ...]:
    """Permute targets per seed, re-run the cross-validating pipeline, and
    score its out-of-fold predictions against the permuted targets.

    ``shuffle=False`` is the identity-permutation control: scores then equal
    the pipeline's ordinary (unpermuted) run.
    """
    if not seeds:
        raise DegenerateInputError("need at least one seed")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    results = []
    for seed in seeds:
        if shuffle:
            perm = np.random.default_rng(seed).permutation(len(y))
            y_run = y[perm]
        else:
            y_run = y
        yhat = pipeline(X, y_run)
        results.append(score_pair(y_run, yhat))
    return tuple(results)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Spearman rho per (complexity feature, eye-tracking metric) pair.

    Cells where either side is constant are None (reported missing rather
    than imputed as zero); ``significant`` marks cells whose large-sample
    p-value crosses the display threshold.
    """

    feature_names: tuple[str, ...]
    metric_names: tuple[str, ...]
    cells: tuple[tuple[float | None, ...], ...]  # rows = features
    significant: tuple[tuple[bool, ...], ...]
    n: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["feature"] + list(self.metric_names))
        for name, row in zip(self.feature_names, self.cells):
            writer.writerow([name] + ["NA" if c is None else "%.6f" % c for c in row])
        return buf.getvalue()


def correlation_matrix(
    profiles: Sequence[ComplexityProfile],
    metrics: Sequence[GazeMetrics],
) -> CorrelationMatrix:
    """9x4 Spearman matrix over sentences aligned by id."""
    by_id = {m.sentence_id: m for m in metrics}
    shared = [p for p in profiles if p.sentence_id in by_id]
    if not shared:
        raise AlignmentError("no sentence ids shared between profiles and metrics")
    if len(shared) < 3:
        raise DegenerateInputError("correlation matrix needs at least 3 aligned sentences")

    feature_cols = {
        f: np.array([float(getattr(p, f)) for p in shared]) for f in FEATURE_NAMES
    }
    metric_cols = {
        m: np.array([float(getattr(by_id[p.sentence_id], m)) for p in shared])
        for m in METRIC_NAMES
    }
    n = len(shared)
    cells = []
    flags = []
    for f in FEATURE_NAMES:
        row: list[float | None] = []
        flag_row: list[bool] = []
        for m in METRIC_NAMES:
            fc, mc = feature_cols[f], metric_cols[m]
            if np.all(fc == fc[0]) or np.all(mc == mc[0]):
                row.append(None)
                flag_row.append(False)
            else:
                rho = spearman(fc, mc)
                row.append(rho)
                flag_row.append(_significance_p(rho, n) < SIGNIFICANCE_ALPHA)
        cells.append(tuple(row))
        flags.append(tuple(flag_row))
    return CorrelationMatrix(
        feature_names=FEATURE_NAMES,
        metric_names=METRIC_NAMES,
        cells=tuple(cells),
        significant=tuple(flags),
        n=n,
    )


def scores_to_csv(rows: Mapping[str, ScorePair] | Sequence[tuple[str, ScorePair]]) -> str:
    """Render labeled ScorePairs as CSV (label, explained_variance, r_squared, n)."""
    items = rows.items() if isinstance(rows, Mapping) else rows
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "explained_variance", "r_squared", "n"])
    for label, pair in items:
        writer.writerow([label, "%.6f" % pair.explained_variance,
                         "%.6f" % pair.r_squared, pair.n])
    return buf.getvalue()
