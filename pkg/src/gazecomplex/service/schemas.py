"""Request/response models for the HTTP API.

File-shaped payloads (CoNLL-U, lexicons, CSVs, embedding files) travel as
text fields so the service never touches client filesystems; the ``run``
endpoint is the one exception, reading the input files its config names
relative to ``base_dir`` on the service host.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class ProfileRequest(BaseModel):
    conllu: str
    lexicon: str
    lang: str = "und"


class ProfileRow(BaseModel):
    sentence_id: str
    sentence_length: int
    avg_word_length: float
    avg_word_frequency: float
    n_low_frequency_words: int
    lexical_density: float
    parse_tree_depth: int
    avg_dep_link_length: float
    max_dep_link_length: int
    n_verbal_heads: int


class ProfileResponse(BaseModel):
    rows: list[ProfileRow]
    csv: str


class GazeAggregateRequest(BaseModel):
    fixations_csv: str | None = None
    metrics_csv: str | None = None
    scale: bool = True


class GazeMetricsRow(BaseModel):
    sentence_id: str
    fixation_count: float
    total_fixation_duration: float
    first_pass_duration: float
    regression_duration: float


class GazeAggregateResponse(BaseModel):
    rows: list[GazeMetricsRow]
    scaler: dict[str, tuple[float, float]] | None
    csv: str


class ScrambleRequest(BaseModel):
    conllu: str | None = None
    text: str | None = None
    seed: int
    lang: str = "und"
    pin_final_punct: bool = False
    output_format: str = Field("plain", pattern="^(plain|conllu)$")


class ScrambleResponse(BaseModel):
    output: str
    n_sentences: int


class SvrTrainRequest(BaseModel):
    profiles_csv: str
    metrics_csv: str
    metric: str = "total_fixation_duration"
    group: str = "ALL"
    C: float = 1.0
    epsilon: float = 0.1
    tol: float = 1e-4
    max_iter: int = 10000
    standardize: bool = True
    scale: bool = True
    seed: int = 0
    folds: int | None = None


class ScorePairModel(BaseModel):
    explained_variance: float
    r_squared: float
    n: int


class SvrTrainResponse(BaseModel):
    model: dict
    converged: bool
    n_epochs: int
    train_scores: ScorePairModel
    oof_scores: ScorePairModel | None = None


class HeadTrainRequest(BaseModel):
    embeddings: str
    metrics_csv: str
    lr: float = 1e-3
    batch: int = 32
    epochs: int = 15
    eval_every: int = 40
    patience: int | None = 5
    validation_fraction: float = 0.1
    scale: bool = True
    seed: int = 0


class HeadTrainResponse(BaseModel):
    model: dict
    loss_log: list[tuple[int, float]]
    train_scores: dict[str, ScorePairModel]


class ProbeRequest(BaseModel):
    embeddings_pre: str
    embeddings_ft: str
    profiles_csv: str
    folds: int = 5
    epochs: int = 5
    seed: int = 0
    lr: float | None = None
    language: str = "und"


class ProbeRow(BaseModel):
    feature: str
    r2_pretrained: float
    r2_finetuned: float
    delta: float


class ProbeResponse(BaseModel):
    rows: list[ProbeRow]
    excluded_features: list[str]
    language: str
    csv: str


class EvaluateRequest(BaseModel):
    y: list[float] | None = None
    yhat: list[float] | None = None
    profiles_csv: str | None = None
    metrics_csv: str | None = None
    scale: bool = True


class EvaluateResponse(BaseModel):
    scores: ScorePairModel | None = None
    correlation_csv: str | None = None


class BaselineRequest(BaseModel):
    profiles_csv: str
    metrics_csv: str
    metric: str = "total_fixation_duration"
    group: str = "ALL"
    seeds: list[int] = [0, 1, 2, 3, 4]
    folds: int = 5
    seed: int = 0
    scale: bool = True
    shuffle: bool = True


class BaselineRow(BaseModel):
    seed: int
    explained_variance: float
    r_squared: float


class BaselineResponse(BaseModel):
    rows: list[BaselineRow]
    mean_explained_variance: float
    mean_r_squared: float
    csv: str


class RunRequest(BaseModel):
    config: str
    base_dir: str = "."


class RunResponse(BaseModel):
    out_dir: str
    files: list[str]
    manifest: dict


class ValidateEmbeddingsRequest(BaseModel):
    embeddings: str


class ValidateEmbeddingsResponse(BaseModel):
    dim: int
    n_vectors: int
    provenance: str


class HealthResponse(BaseModel):
    status: str
    version: str
