"""Sentence-level eye-tracking metrics from raw fixation logs.

Four metrics per sentence: fixation count, total fixation duration, first-pass
duration (the maximal initial run of fixations on the sentence before the gaze
first lands elsewhere), and regression duration (fixations on token positions
already passed within the sentence).  Metrics are averaged over participants,
then min-max scaled to 0-100 over the dataset, each metric independently.

Scaling each metric on its own axis means the scaled values of one sentence
need not preserve the raw inequalities (e.g. scaled FPD may exceed scaled
TFD), so GazeMetrics does not enforce cross-metric ordering; the aggregation
path guarantees it for raw values and the tests assert it there.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import (
    DegenerateInputError,
    DegenerateScaleError,
    MappingError,
    MissingDataError,
    OrderingError,
    RangeError,
    SchemaError,
)

METRIC_NAMES: tuple[str, ...] = (
    "fixation_count",
    "total_fixation_duration",
    "first_pass_duration",
    "regression_duration",
)

FIXATION_COLUMNS = ("participant_id", "sentence_id", "seq", "token_index", "duration_ms")
METRIC_COLUMNS = ("sentence_id",) + METRIC_NAMES


@dataclass(frozen=True)
class Fixation:
    """One fixation event; ``seq`` orders events within a participant's trial."""

    participant_id: str
    sentence_id: str
    seq: int
    token_index: int
    duration_ms: float

    def __post_init__(self):
        if self.duration_ms <= 0:
            raise ValueError(f"duration_ms must be > 0, got {self.duration_ms}")
        if self.token_index < 1:
            raise ValueError(f"token_index must be >= 1, got {self.token_index}")


@dataclass(frozen=True)
class GazeMetrics:
    """The four sentence-level metrics, raw (ms / counts) or scaled units."""

    sentence_id: str
    fixation_count: float
    total_fixation_duration: float
    first_pass_duration: float
    regression_duration: float

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in METRIC_NAMES}

    def as_vector(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in METRIC_NAMES)


@dataclass(frozen=True)
class ScaledDataset:
    """Participant-averaged metrics scaled to [0, 100], plus the scaler."""

    metrics: tuple[GazeMetrics, ...]
    scaler: dict[str, tuple[float, float]]  # metric -> (min, max) of raw values


def aggregate_fixations(
    fixations: Sequence[Fixation],
    sentence_ids: Iterable[str],
) -> dict[str, dict[str, GazeMetrics]]:
    """Per-participant, per-sentence metrics from a chronological fixation log.

    ``sentence_ids`` is the set of known sentences; a fixation on an unknown
    sentence raises MappingError.  Within each participant the ``seq`` values
    must be strictly increasing (OrderingError otherwise).
    """
    known = set(sentence_ids)
    streams: dict[str, list[Fixation]] = {}
    for fix in fixations:
        if fix.sentence_id not in known:
            raise MappingError(f"fixation references unknown sentence {fix.sentence_id!r}")
        streams.setdefault(fix.participant_id, []).append(fix)

    result: dict[str, dict[str, GazeMetrics]] = {}
    for participant, stream in streams.items():
        for prev, cur in zip(stream, stream[1:]):
            if cur.seq <= prev.seq:
                raise OrderingError(
                    f"participant {participant!r}: seq {cur.seq} follows {prev.seq}"
                )
        metrics = _metrics_for_stream(stream)
        for sid in known:  # a mapped sentence the gaze never reached is all zeros
            metrics.setdefault(sid, GazeMetrics(sid, 0.0, 0.0, 0.0, 0.0))
        result[participant] = metrics
    return result


def _metrics_for_stream(stream: Sequence[Fixation]) -> dict[str, GazeMetrics]:
    """Metrics for one participant's chronological fixation stream."""
    count: dict[str, float] = {}
    total: dict[str, float] = {}
    first_pass: dict[str, float] = {}
    regression: dict[str, float] = {}
    in_first_pass: dict[str, bool] = {}  # sentence still in its initial run?
    max_token: dict[str, int] = {}

    for fix in stream:
        sid = fix.sentence_id
        # any fixation elsewhere ends the first pass of every other sentence
        for other in list(in_first_pass):
            if other != sid:
                in_first_pass[other] = False
        if sid not in count:
            count[sid] = total[sid] = first_pass[sid] = regression[sid] = 0.0
            in_first_pass[sid] = True
        count[sid] += 1
        total[sid] += fix.duration_ms
        if in_first_pass[sid]:
            first_pass[sid] += fix.duration_ms
        if sid in max_token and fix.token_index < max_token[sid]:
            regression[sid] += fix.duration_ms
        max_token[sid] = max(max_token.get(sid, 0), fix.token_index)

    return {
        sid: GazeMetrics(
            sentence_id=sid,
            fixation_count=count[sid],
            total_fixation_duration=total[sid],
            first_pass_duration=first_pass[sid],
            regression_duration=regression[sid],
        )
        for sid in count
    }


def average_participants(
    per_participant: Mapping[str, Mapping[str, GazeMetrics]],
    sentence_id: str,
) -> GazeMetrics:
    """Arithmetic mean per metric over participants who saw the sentence.

    Participants without fixations on the sentence are excluded rather than
    contributing zeros (a skipped trial should not deflate the mean).
    """
    rows = [
        metrics[sentence_id]
        for metrics in per_participant.values()
        if sentence_id in metrics and metrics[sentence_id].fixation_count > 0
    ]
    if not rows:
        raise MissingDataError(f"no participant has fixations on sentence {sentence_id!r}")
    n = len(rows)
    return GazeMetrics(
        sentence_id=sentence_id,
        fixation_count=sum(r.fixation_count for r in rows) / n,
        total_fixation_duration=sum(r.total_fixation_duration for r in rows) / n,
        first_pass_duration=sum(r.first_pass_duration for r in rows) / n,
        regression_duration=sum(r.regression_duration for r in rows) / n,
    )


def average_all(
    per_participant: Mapping[str, Mapping[str, GazeMetrics]],
) -> tuple[GazeMetrics, ...]:
    """Participant-averaged metrics for every viewed sentence, sorted by id."""
    ids = sorted({
        sid
        for metrics in per_participant.values()
        for sid, row in metrics.items()
        if row.fixation_count > 0
    })
    return tuple(average_participants(per_participant, sid) for sid in ids)


def scale_metrics(metrics: Sequence[GazeMetrics]) -> ScaledDataset:
    """Min-max scale each metric to [0, 100] over the dataset.

    The scaler is computed per dataset so every corpus independently spans
    the full range.  A constant metric has no order to preserve and raises
    DegenerateScaleError naming the metric.
    """
    if len(metrics) < 2:
        raise DegenerateInputError("scaling needs at least 2 sentences")
    scaler: dict[str, tuple[float, float]] = {}
    for name in METRIC_NAMES:
        values = [float(getattr(m, name)) for m in metrics]
        lo, hi = min(values), max(values)
        if hi == lo:
            raise DegenerateScaleError(name)
        scaler[name] = (lo, hi)

    def scale(name: str, value: float) -> float:
        lo, hi = scaler[name]
        return 100.0 * (value - lo) / (hi - lo)

    scaled = tuple(
        GazeMetrics(
            sentence_id=m.sentence_id,
            **{name: scale(name, float(getattr(m, name))) for name in METRIC_NAMES},
        )
        for m in metrics
    )
    return ScaledDataset(metrics=scaled, scaler=scaler)


def read_fixations(stream: str | TextIO) -> tuple[Fixation, ...]:
    """Parse a fixation CSV (participant_id, sentence_id, seq, token_index,
    duration_ms), preserving row order."""
    reader = csv.DictReader(_as_text(stream))
    _require_columns(reader.fieldnames, FIXATION_COLUMNS)
    fixations = []
    for row in reader:
        try:
            fix = Fixation(
                participant_id=row["participant_id"],
                sentence_id=row["sentence_id"],
                seq=int(row["seq"]),
                token_index=int(row["token_index"]),
                duration_ms=float(row["duration_ms"]),
            )
        except ValueError as exc:
            raise RangeError(f"bad fixation row {row!r}: {exc}") from None
        fixations.append(fix)
    return tuple(fixations)


def import_sentence_metrics(stream: str | TextIO) -> tuple[GazeMetrics, ...]:
    """Parse precomputed per-sentence metrics from CSV, order preserved.

    Corpora that ship sentence-level measures can enter the pipeline here
    instead of through raw fixation logs.
    """
    reader = csv.DictReader(_as_text(stream))
    _require_columns(reader.fieldnames, METRIC_COLUMNS)
    out = []
    for row in reader:
        values = {}
        for name in METRIC_NAMES:
            try:
                value = float(row[name])
            except (TypeError, ValueError):
                raise SchemaError(f"non-numeric {name} in row {row!r}") from None
            if value < 0:
                raise RangeError(f"{name} must be >= 0, got {value}")
            values[name] = value
        out.append(GazeMetrics(sentence_id=row["sentence_id"], **values))
    return tuple(out)


def metrics_to_csv(metrics: Sequence[GazeMetrics]) -> str:
    """Render metrics in the import_sentence_metrics CSV format."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRIC_COLUMNS)
    for m in metrics:
        writer.writerow([m.sentence_id] + [repr(float(getattr(m, n))) for n in METRIC_NAMES])
    return buf.getvalue()


def _as_text(stream: str | TextIO) -> io.StringIO | TextIO:
    return io.StringIO(stream) if isinstance(stream, str) else stream


def _require_columns(fieldnames: Sequence[str] | None, required: Sequence[str]):
    present = set(fieldnames or ())
    missing = [c for c in required if c not in present]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")
