"""Fixation aggregation, participant averaging, scaling, CSV ingestion."""

import numpy as np
import pytest

from gazecomplex.errors import (
    DegenerateInputError,
    DegenerateScaleError,
    MappingError,
    MissingDataError,
    OrderingError,
    RangeError,
    SchemaError,
)
from gazecomplex.gaze import (
    METRIC_NAMES,
    Fixation,
    GazeMetrics,
    aggregate_fixations,
    average_all,
    average_participants,
    import_sentence_metrics,
    metrics_to_csv,
    read_fixations,
    scale_metrics,
)


def fix(sentence, seq, token, dur, participant="p1"):
    return Fixation(participant_id=participant, sentence_id=sentence, seq=seq,
                    token_index=token, duration_ms=dur)


def test_single_sentence_run_with_regression():
    fixations = [fix("s", 1, 1, 100), fix("s", 2, 2, 150),
                 fix("s", 3, 1, 80), fix("s", 4, 3, 120)]
    metrics = aggregate_fixations(fixations, {"s"})["p1"]["s"]
    assert metrics.fixation_count == 4
    assert metrics.total_fixation_duration == 450
    assert metrics.first_pass_duration == 450  # gaze never left the sentence
    assert metrics.regression_duration == 80  # back to token 1 after token 2


def test_first_pass_ends_at_first_exit():
    fixations = [fix("s", 1, 1, 100), fix("t", 2, 1, 50), fix("s", 3, 2, 200)]
    metrics = aggregate_fixations(fixations, {"s", "t"})["p1"]["s"]
    assert metrics.fixation_count == 2
    assert metrics.total_fixation_duration == 300
    assert metrics.first_pass_duration == 100
    assert metrics.regression_duration == 0


def test_unviewed_sentence_reports_zeros_but_has_no_viewers():
    fixations = [fix("s", 1, 1, 100)]
    per_participant = aggregate_fixations(fixations, {"s", "unseen"})
    zeros = per_participant["p1"]["unseen"]
    assert zeros.as_vector() == (0.0, 0.0, 0.0, 0.0)
    # zero-fixation participants are excluded from averages, not counted as 0
    with pytest.raises(MissingDataError):
        average_participants(per_participant, "unseen")


def test_refixation_on_same_token_is_not_regression():
    fixations = [fix("s", 1, 2, 100), fix("s", 2, 2, 50)]
    metrics = aggregate_fixations(fixations, {"s"})["p1"]["s"]
    assert metrics.regression_duration == 0


def test_unknown_sentence_raises_mapping_error():
    with pytest.raises(MappingError):
        aggregate_fixations([fix("ghost", 1, 1, 100)], {"s"})


def test_non_monotone_seq_raises_ordering_error():
    with pytest.raises(OrderingError):
        aggregate_fixations([fix("s", 2, 1, 100), fix("s", 2, 2, 50)], {"s"})


def test_average_participants():
    per_participant = {
        "a": {"s": GazeMetrics("s", 2, 10, 10, 0)},
        "b": {"s": GazeMetrics("s", 4, 20, 15, 5)},
        "c": {},  # never saw s; must not deflate the mean
    }
    avg = average_participants(per_participant, "s")
    assert avg.fixation_count == 3
    assert avg.total_fixation_duration == 15
    assert avg.first_pass_duration == 12.5
    assert avg.regression_duration == 2.5


def test_average_single_participant_is_identity():
    only = GazeMetrics("s", 3, 330, 210, 60)
    assert average_participants({"a": {"s": only}}, "s") == only


def test_average_commutes_with_positive_rescaling():
    rng = np.random.default_rng(5)
    per_participant = {
        f"p{i}": {"s": GazeMetrics("s", *rng.uniform(1, 100, size=4))}
        for i in range(6)
    }
    scaled_by_3 = {
        p: {"s": GazeMetrics("s", *(3 * np.array(m["s"].as_vector())))}
        for p, m in per_participant.items()
    }
    base = np.array(average_participants(per_participant, "s").as_vector())
    scaled = np.array(average_participants(scaled_by_3, "s").as_vector())
    np.testing.assert_allclose(scaled, 3 * base)


def test_scale_metrics_endpoints():
    metrics = [GazeMetrics(f"s{i}", v / 10, v, v / 2, v / 4)
               for i, v in enumerate((200, 500, 800))]
    scaled = scale_metrics(metrics)
    assert [m.total_fixation_duration for m in scaled.metrics] == [0.0, 50.0, 100.0]
    assert scaled.scaler["total_fixation_duration"] == (200, 800)
    for name in METRIC_NAMES:
        values = [getattr(m, name) for m in scaled.metrics]
        assert min(values) == 0.0 and max(values) == 100.0


def test_scale_is_idempotent_on_extremes():
    metrics = [GazeMetrics("a", 0, 0, 0, 0), GazeMetrics("b", 100, 100, 100, 100)]
    scaled = scale_metrics(metrics)
    assert [m.as_vector() for m in scaled.metrics] == [m.as_vector() for m in metrics]


def test_scale_interior_point():
    metrics = [GazeMetrics(s, v, v, v, v) for s, v in zip("abc", (1, 2, 4))]
    scaled = scale_metrics(metrics)
    values = [m.fixation_count for m in scaled.metrics]
    assert values[0] == 0.0 and values[2] == 100.0
    assert abs(values[1] - 100 / 3) < 1e-9


def test_scale_preserves_ranking():
    rng = np.random.default_rng(11)
    metrics = [GazeMetrics(f"s{i}", *rng.uniform(0, 1000, size=4)) for i in range(50)]
    scaled = scale_metrics(metrics).metrics
    for name in METRIC_NAMES:
        raw = np.array([getattr(m, name) for m in metrics])
        new = np.array([getattr(m, name) for m in scaled])
        assert (np.argsort(raw, kind="mergesort")
                == np.argsort(new, kind="mergesort")).all()


def test_constant_metric_names_the_culprit():
    metrics = [GazeMetrics("a", 1, 7, 1, 0), GazeMetrics("b", 2, 7, 2, 1)]
    with pytest.raises(DegenerateScaleError) as err:
        scale_metrics(metrics)
    assert "total_fixation_duration" in str(err.value)


def test_scale_needs_two_sentences():
    with pytest.raises(DegenerateInputError):
        scale_metrics([GazeMetrics("a", 1, 2, 3, 0)])


def test_import_metrics_round_trip():
    metrics = (GazeMetrics("a", 4, 450, 450, 80), GazeMetrics("b", 2, 300, 100, 0))
    assert import_sentence_metrics(metrics_to_csv(metrics)) == metrics


def test_import_rejects_negative_and_missing():
    header = "sentence_id," + ",".join(METRIC_NAMES)
    with pytest.raises(RangeError):
        import_sentence_metrics(header + "\nx,1,2,3,-3\n")
    with pytest.raises(SchemaError):
        import_sentence_metrics("sentence_id,fixation_count\nx,1\n")
    assert import_sentence_metrics(header + "\n") == ()


def test_read_fixations_round_trip_and_errors():
    csv_text = (
        "participant_id,sentence_id,seq,token_index,duration_ms\n"
        "p1,s,1,1,100\np1,s,2,2,150\n"
    )
    fixations = read_fixations(csv_text)
    assert len(fixations) == 2
    assert fixations[0].duration_ms == 100
    with pytest.raises(SchemaError):
        read_fixations("participant_id,sentence_id\np1,s\n")
    with pytest.raises(RangeError):
        read_fixations("participant_id,sentence_id,seq,token_index,duration_ms\n"
                       "p1,s,1,1,0\n")


def test_average_all_sorted_by_sentence_id():
    fixations = [fix("b", 1, 1, 10), fix("a", 2, 1, 20)]
    averaged = average_all(aggregate_fixations(fixations, {"a", "b"}))
    assert [m.sentence_id for m in averaged] == ["a", "b"]
