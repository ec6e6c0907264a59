"""Transport-free implementations of the API endpoints.

Each handler maps a request model to a response model and raises
WorkbenchError subclasses on invalid input; the HTTP layer and the CLI both
delegate here, so behavior is identical in-process and over the wire.
"""

from __future__ import annotations

import numpy as np

from .. import __version__
from ..complexity import (
    FEATURE_NAMES,
    FeatureGroup,
    feature_matrix,
    profile_document,
    profiles_from_csv,
    profiles_to_csv,
)
from ..corpus import parse_conllu, parse_plaintext, to_conllu
from ..embed import read_embeddings
from ..errors import AlignmentError, DegenerateScaleError, SchemaError
from ..evalx import correlation_matrix, random_baseline, score_pair, scores_to_csv
from ..experiment import run_experiment
from ..gaze import (
    METRIC_NAMES,
    GazeMetrics,
    aggregate_fixations,
    average_all,
    import_sentence_metrics,
    metrics_to_csv,
    read_fixations,
    scale_metrics,
)
from ..lexicon import load_lexicon
from ..probe import probe_report_to_csv, run_probe
from ..regress import (
    HeadParams,
    kfold_split,
    predict,
    predict_multitask,
    svr_oof_predictions,
    train_multitask_head,
    train_svr,
)
from ..scramble import scramble_corpus
from . import schemas


def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


def profile(req: schemas.ProfileRequest) -> schemas.ProfileResponse:
    doc = parse_conllu(req.conllu, lang=req.lang)
    lexicon = load_lexicon(req.lexicon, lang=req.lang)
    profiles = profile_document(doc, lexicon)
    rows = [schemas.ProfileRow(sentence_id=p.sentence_id, **{
        name: getattr(p, name) for name in FEATURE_NAMES
    }) for p in profiles]
    return schemas.ProfileResponse(rows=rows, csv=profiles_to_csv(profiles))


def gaze_aggregate(req: schemas.GazeAggregateRequest) -> schemas.GazeAggregateResponse:
    if (req.fixations_csv is None) == (req.metrics_csv is None):
        raise SchemaError("provide exactly one of fixations_csv or metrics_csv")
    if req.fixations_csv is not None:
        fixations = read_fixations(req.fixations_csv)
        sentence_ids = {f.sentence_id for f in fixations}
        metrics = average_all(aggregate_fixations(fixations, sentence_ids))
    else:
        metrics = import_sentence_metrics(req.metrics_csv)
    scaler = None
    if req.scale:
        scaled = scale_metrics(metrics)
        metrics, scaler = scaled.metrics, scaled.scaler
    rows = [schemas.GazeMetricsRow(sentence_id=m.sentence_id, **m.as_dict())
            for m in metrics]
    return schemas.GazeAggregateResponse(rows=rows, scaler=scaler,
                                         csv=metrics_to_csv(metrics))


def scramble(req: schemas.ScrambleRequest) -> schemas.ScrambleResponse:
    if (req.conllu is None) == (req.text is None):
        raise SchemaError("provide exactly one of conllu or text")
    if req.conllu is not None:
        doc = parse_conllu(req.conllu, lang=req.lang)
    else:
        doc = parse_plaintext(req.text, lang=req.lang)
    scrambled = scramble_corpus(doc, req.seed, pin_final_punct=req.pin_final_punct)
    if req.output_format == "conllu":
        output = to_conllu(scrambled)
    else:
        output = "".join(f"{s.id}\t{s.surface_text()}\n" for s in scrambled)
    return schemas.ScrambleResponse(output=output, n_sentences=len(scrambled))


def _scale_single(values: np.ndarray, name: str) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        raise DegenerateScaleError(name)
    return 100.0 * (values - lo) / (hi - lo)


def _single_metric_data(profiles_csv: str, metrics_csv: str, metric: str,
                        group_name: str, scale: bool):
    """Aligned (profiles, X, y) for one metric and one feature group."""
    if metric not in METRIC_NAMES:
        raise SchemaError(f"unknown metric {metric!r}; expected one of {METRIC_NAMES}")
    try:
        group = FeatureGroup.from_name(group_name)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    profiles = profiles_from_csv(profiles_csv)
    metrics = import_sentence_metrics(metrics_csv)
    targets = {m.sentence_id: float(getattr(m, metric)) for m in metrics}
    aligned = [p for p in profiles if p.sentence_id in targets]
    if not aligned:
        raise AlignmentError("no sentence ids shared between profiles and metrics")
    X = feature_matrix(aligned, group)
    y = np.array([targets[p.sentence_id] for p in aligned])
    if scale:
        y = _scale_single(y, metric)
    return aligned, X, y


def _svr_model_dict(model, metric: str, group: str) -> dict:
    return {
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "scaler": None if model.scaler is None else {
            "mean": [float(v) for v in model.scaler.mean],
            "std": [float(v) for v in model.scaler.std],
        },
        "provenance": f"linear epsilon-insensitive SVR, {group} features -> {metric}",
    }


def train_svr_handler(req: schemas.SvrTrainRequest) -> schemas.SvrTrainResponse:
    _, X, y = _single_metric_data(req.profiles_csv, req.metrics_csv, req.metric,
                                  req.group, req.scale)
    model = train_svr(X, y, C=req.C, epsilon=req.epsilon, tol=req.tol,
                      max_iter=req.max_iter, standardize=req.standardize,
                      seed=req.seed)
    train_pair = score_pair(y, predict(model, X))
    oof = None
    if req.folds is not None:
        plan = kfold_split(len(y), req.folds, req.seed)
        pair = score_pair(y, svr_oof_predictions(
            X, y, plan, C=req.C, epsilon=req.epsilon, tol=req.tol,
            max_iter=req.max_iter, standardize=req.standardize, seed=req.seed))
        oof = schemas.ScorePairModel(explained_variance=pair.explained_variance,
                                     r_squared=pair.r_squared, n=pair.n)
    return schemas.SvrTrainResponse(
        model={**_svr_model_dict(model, req.metric, req.group),
               "params": {"C": req.C, "epsilon": req.epsilon, "tol": req.tol,
                          "max_iter": req.max_iter}},
        converged=model.converged,
        n_epochs=model.n_epochs,
        train_scores=schemas.ScorePairModel(
            explained_variance=train_pair.explained_variance,
            r_squared=train_pair.r_squared, n=train_pair.n),
        oof_scores=oof,
    )


def train_head_handler(req: schemas.HeadTrainRequest) -> schemas.HeadTrainResponse:
    embeddings = read_embeddings(req.embeddings)
    metrics = import_sentence_metrics(req.metrics_csv)
    if req.scale:
        metrics = scale_metrics(metrics).metrics
    by_id = {m.sentence_id: m for m in metrics}
    ids = sorted(embeddings.ids() & set(by_id))
    if not ids:
        raise AlignmentError("no sentence ids shared between embeddings and metrics")
    X = np.array([embeddings.vectors[sid] for sid in ids])
    Y = np.array([[getattr(by_id[sid], m) for m in METRIC_NAMES] for sid in ids])
    params = HeadParams(lr=req.lr, batch=req.batch, epochs=req.epochs,
                        eval_every=req.eval_every, patience=req.patience,
                        validation_fraction=req.validation_fraction, seed=req.seed)
    model = train_multitask_head(X, Y, params)
    pred = predict_multitask(model, X)
    train_scores = {}
    for t, name in enumerate(METRIC_NAMES):
        pair = score_pair(Y[:, t], pred[:, t])
        train_scores[name] = schemas.ScorePairModel(
            explained_variance=pair.explained_variance,
            r_squared=pair.r_squared, n=pair.n)
    return schemas.HeadTrainResponse(
        model={
            "input_dim": model.input_dim,
            "tasks": list(METRIC_NAMES),
            "weights": [[float(v) for v in row] for row in model.weights],
            "biases": [float(b) for b in model.biases],
            "provenance": f"multitask head on {embeddings.provenance or 'embeddings'}",
        },
        loss_log=list(model.loss_log),
        train_scores=train_scores,
    )


def probe_handler(req: schemas.ProbeRequest) -> schemas.ProbeResponse:
    emb_pre = read_embeddings(req.embeddings_pre)
    emb_ft = read_embeddings(req.embeddings_ft)
    profiles = profiles_from_csv(req.profiles_csv)
    kwargs = {} if req.lr is None else {"lr": req.lr}
    report = run_probe(emb_pre, emb_ft, profiles, k=req.folds, epochs=req.epochs,
                       seed=req.seed, language=req.language, **kwargs)
    rows = [schemas.ProbeRow(feature=r.feature, r2_pretrained=r.r2_pretrained,
                             r2_finetuned=r.r2_finetuned, delta=r.delta)
            for r in report.results]
    return schemas.ProbeResponse(rows=rows,
                                 excluded_features=list(report.excluded_features),
                                 language=report.language,
                                 csv=probe_report_to_csv(report))


def evaluate(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
    scores = None
    correlation_csv = None
    if (req.y is None) != (req.yhat is None):
        raise SchemaError("provide y and yhat together")
    if req.y is not None and req.yhat is not None:
        pair = score_pair(req.y, req.yhat)
        scores = schemas.ScorePairModel(explained_variance=pair.explained_variance,
                                        r_squared=pair.r_squared, n=pair.n)
    if (req.profiles_csv is None) != (req.metrics_csv is None):
        raise SchemaError("provide profiles_csv and metrics_csv together")
    if req.profiles_csv is not None and req.metrics_csv is not None:
        profiles = profiles_from_csv(req.profiles_csv)
        metrics = import_sentence_metrics(req.metrics_csv)
        if req.scale:
            metrics = scale_metrics(metrics).metrics
        correlation_csv = correlation_matrix(profiles, metrics).to_csv()
    if scores is None and correlation_csv is None:
        raise SchemaError("nothing to evaluate: provide y/yhat and/or "
                          "profiles_csv/metrics_csv")
    return schemas.EvaluateResponse(scores=scores, correlation_csv=correlation_csv)


def baseline(req: schemas.BaselineRequest) -> schemas.BaselineResponse:
    _, X, y = _single_metric_data(req.profiles_csv, req.metrics_csv, req.metric,
                                  req.group, req.scale)
    plan = kfold_split(len(y), req.folds, req.seed)
    pairs = random_baseline(
        X, y, lambda Xp, yp: svr_oof_predictions(Xp, yp, plan, seed=req.seed),
        req.seeds, shuffle=req.shuffle)
    rows = [schemas.BaselineRow(seed=s, explained_variance=p.explained_variance,
                                r_squared=p.r_squared)
            for s, p in zip(req.seeds, pairs)]
    csv_text = scores_to_csv([(f"seed={s}", p) for s, p in zip(req.seeds, pairs)])
    return schemas.BaselineResponse(
        rows=rows,
        mean_explained_variance=float(np.mean([p.explained_variance for p in pairs])),
        mean_r_squared=float(np.mean([p.r_squared for p in pairs])),
        csv=csv_text,
    )


def run(req: schemas.RunRequest) -> schemas.RunResponse:
    bundle = run_experiment(req.config, base_dir=req.base_dir)
    return schemas.RunResponse(out_dir=bundle.out_dir, files=list(bundle.files),
                               manifest=bundle.manifest)


def validate_embeddings(req: schemas.ValidateEmbeddingsRequest
                        ) -> schemas.ValidateEmbeddingsResponse:
    embeddings = read_embeddings(req.embeddings)
    return schemas.ValidateEmbeddingsResponse(dim=embeddings.dim,
                                              n_vectors=len(embeddings),
                                              provenance=embeddings.provenance)
