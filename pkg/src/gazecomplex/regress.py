"""Linear regressors: epsilon-insensitive SVR and a multi-task linear head.

The SVR solves  min_w  (1/2)||w||^2 + C * sum_i max(0, |y_i - w.x_i - b| - eps)
in the dual by coordinate descent over beta in [-C, C]^n, with the bias folded
in as a constant-1 feature.  Each coordinate step minimizes the piecewise
quadratic exactly (Newton step off the correct side of the kink at beta=0,
clipped to the box), so the dual objective never increases; iteration stops
when the largest per-coordinate violation of the optimality conditions drops
below ``tol``.

The multi-task head shares nothing but the input: per task, an independent
linear map trained jointly by mini-batch gradient descent on the sum of the
per-task MSE losses, with a validation holdout, periodic evaluation, and
patience-based early stopping that keeps the best evaluated parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateInputError, RangeError

DEFAULT_SVR_C = 1.0
DEFAULT_SVR_EPSILON = 0.1
DEFAULT_SVR_TOL = 1e-4
DEFAULT_SVR_MAX_ITER = 10000


@dataclass(frozen=True)
class Scaler:
    """Per-feature standardization parameters (population std)."""

    mean: np.ndarray
    std: np.ndarray  # constant columns clamped to 1.0

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std


def fit_scaler(X: np.ndarray) -> Scaler:
    """Fit mean/std on training rows only; constant columns get std 1."""
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        raise DegenerateInputError("cannot fit a scaler on an empty matrix")
    mean = X.mean(axis=0)
    std = X.std(axis=0)  # population (ddof=0)
    std = np.where(std == 0.0, 1.0, std)
    return Scaler(mean=mean, std=std)


def apply_scaler(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    return scaler.transform(X)


@dataclass(frozen=True)
class FoldPlan:
    """A seeded partition of 0..n-1 into k folds of near-equal size."""

    k: int
    assignments: tuple[int, ...]  # index -> fold id
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.array([i for i, f in enumerate(self.assignments) if f == fold], dtype=int)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.array([i for i, f in enumerate(self.assignments) if f != fold], dtype=int)


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    """Deterministic shuffled partition; fold sizes differ by at most 1."""
    if not 2 <= k <= n:
        raise DegenerateInputError(f"need 2 <= k <= n, got k={k}, n={n}")
    order = np.random.default_rng(seed).permutation(n)
    assignments = [0] * n
    base, extra = divmod(n, k)
    start = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        for idx in order[start:start + size]:
            assignments[int(idx)] = fold
        start += size
    return FoldPlan(k=k, assignments=tuple(assignments), seed=seed)


@dataclass(frozen=True)
class LinearModel:
    """w.x + b with an optional input scaler applied first."""

    weights: np.ndarray
    bias: float
    scaler: Scaler | None = None
    converged: bool = True
    n_epochs: int = 0
    objective_log: tuple[float, ...] = ()  # dual objective after each epoch


def _check_finite(*arrays: np.ndarray):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise RangeError("non-finite values in training data")


def train_svr(
    X: np.ndarray,
    y: np.ndarray,
    C: float = DEFAULT_SVR_C,
    epsilon: float = DEFAULT_SVR_EPSILON,
    tol: float = DEFAULT_SVR_TOL,
    max_iter: int = DEFAULT_SVR_MAX_ITER,
    standardize: bool = True,
    seed: int = 0,
) -> LinearModel:
    """Train the linear epsilon-insensitive SVR by dual coordinate descent."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DegenerateInputError(f"X {X.shape} and y {y.shape} disagree on rows")
    if X.shape[0] < 2:
        raise DegenerateInputError("SVR needs at least 2 rows")
    _check_finite(X, y)

    scaler = fit_scaler(X) if standardize else None
    Xs = scaler.transform(X) if scaler else X
    # solve on centered columns and centered targets: the box constraint
    # would otherwise cap the intercept at n*C and penalize it; both offsets
    # are folded back into the bias afterwards (a pure reparametrization)
    col_center = Xs.mean(axis=0)
    y_center = float(y.mean())
    y = y - y_center
    # the residual intercept trains as a constant feature
    A = np.hstack([Xs - col_center, np.ones((Xs.shape[0], 1))])
    n, d = A.shape
    q_diag = np.einsum("ij,ij->i", A, A)  # always >= 1 thanks to the bias column

    # plain-float state: rows are short, so native arithmetic beats array-call
    # overhead by a wide margin in the per-coordinate loop
    rows = [tuple(map(float, row)) for row in A]
    targets = [float(v) for v in y]
    diag = [float(v) for v in q_diag]
    beta = [0.0] * n
    w = [0.0] * d
    rng = np.random.default_rng(seed)
    objective_log: list[float] = []
    converged = False
    epochs = 0

    # active-set shrinking: coordinates firmly optimal at a bound or at zero
    # are skipped until the reduced problem converges, then the full set is
    # re-verified, so the final convergence decision covers every coordinate
    active = list(range(n))
    gmax_old = math.inf
    for epoch in range(max_iter):
        epochs = epoch + 1
        max_violation = 0.0
        shrunk: set[int] = set()
        for pos in rng.permutation(len(active)).tolist():
            i = active[pos]
            row = rows[i]
            g = -targets[i]
            for a_j, w_j in zip(row, w):
                g += a_j * w_j
            gp = g + epsilon
            gn = g - epsilon
            b_i = beta[i]

            if b_i == 0.0:
                if gp < 0:
                    violation = -gp
                elif gn > 0:
                    violation = gn
                elif gp > gmax_old and gn < -gmax_old:
                    shrunk.add(i)
                    continue
                else:
                    violation = 0.0
            elif b_i >= C:
                if gp < -gmax_old:
                    shrunk.add(i)
                    continue
                violation = max(gp, 0.0)
            elif b_i <= -C:
                if gn > gmax_old:
                    shrunk.add(i)
                    continue
                violation = max(-gn, 0.0)
            elif b_i > 0.0:
                violation = abs(gp)
            else:
                violation = abs(gn)
            if violation > max_violation:
                max_violation = violation

            h = diag[i]
            if gp < h * b_i:
                d_step = -gp / h
            elif gn > h * b_i:
                d_step = -gn / h
            else:
                d_step = -b_i
            new_b = min(max(b_i + d_step, -C), C)
            delta = new_b - b_i
            if delta != 0.0:
                beta[i] = new_b
                for j, a_j in enumerate(row):
                    w[j] += delta * a_j

        objective_log.append(
            _svr_dual_objective(np.array(w), np.array(beta), y, epsilon))
        if max_violation < tol:
            if len(active) == n:
                converged = True
                break
            active = list(range(n))
            gmax_old = math.inf
            continue
        if shrunk:
            active = [i for i in active if i not in shrunk]
        gmax_old = max_violation

    w_arr = np.array(w)
    return LinearModel(
        weights=w_arr[:-1].copy(),
        bias=float(w_arr[-1]) + y_center - float(w_arr[:-1] @ col_center),
        scaler=scaler,
        converged=converged,
        n_epochs=epochs,
        objective_log=tuple(objective_log),
    )


def _svr_dual_objective(w: np.ndarray, beta: np.ndarray, y: np.ndarray,
                        epsilon: float) -> float:
    return float(0.5 * w @ w + epsilon * np.abs(beta).sum() - beta @ y)


def predict(model: LinearModel, X: np.ndarray) -> np.ndarray:
    """w.x + b per row, applying the stored scaler first when present."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.weights.shape[0]:
        raise DegenerateInputError(
            f"X has {X.shape[1] if X.ndim == 2 else '?'} features, "
            f"model expects {model.weights.shape[0]}"
        )
    Xs = model.scaler.transform(X) if model.scaler else X
    return Xs @ model.weights + model.bias


@dataclass(frozen=True)
class HeadParams:
    """Mini-batch GD hyperparameters for the multi-task head.

    The default lr suits head-only training; patience=None disables early
    stopping and validation_fraction=0 trains on all rows (probing mode).
    """

    lr: float = 1e-3
    batch: int = 32
    epochs: int = 15
    eval_every: int = 40
    patience: int | None = 5
    validation_fraction: float = 0.1
    seed: int = 0


@dataclass(frozen=True)
class MultiHeadModel:
    """Independent linear heads over a shared input."""

    weights: np.ndarray  # (T, dim)
    biases: np.ndarray  # (T,)
    input_dim: int
    loss_log: tuple[tuple[int, float], ...]  # (step, evaluation loss)


def _summed_mse(W: np.ndarray, b: np.ndarray, X: np.ndarray, Y: np.ndarray) -> float:
    E = X @ W.T + b - Y
    return float((E ** 2).mean(axis=0).sum())


def train_multitask_head(X: np.ndarray, Y: np.ndarray,
                         params: HeadParams = HeadParams()) -> MultiHeadModel:
    """Jointly train T linear heads on the sum of per-task MSE losses.

    Holds out ``validation_fraction`` of the rows, evaluates every
    ``eval_every`` optimization steps (plus once before training), stops
    after ``patience`` evaluations without improvement, and returns the
    parameters of the first evaluation that achieved the best loss.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[0] != Y.shape[0]:
        raise DegenerateInputError(f"X {X.shape} and Y {Y.shape} disagree on rows")
    _check_finite(X, Y)
    n, dim = X.shape
    n_tasks = Y.shape[1]

    rng = np.random.default_rng(params.seed)
    if params.validation_fraction > 0:
        n_val = int(round(n * params.validation_fraction))
        if n_val < 1 or n - n_val < 1:
            raise DegenerateInputError(
                f"{n} rows cannot support a {params.validation_fraction:.0%} validation split"
            )
        order = rng.permutation(n)
        val_idx, train_idx = order[:n_val], order[n_val:]
    else:
        train_idx = rng.permutation(n)
        val_idx = train_idx  # evaluate on the training rows themselves

    X_train, Y_train = X[train_idx], Y[train_idx]
    X_val, Y_val = X[val_idx], Y[val_idx]

    W = np.zeros((n_tasks, dim))
    b = np.zeros(n_tasks)
    best_W, best_b = W.copy(), b.copy()
    best_loss = _summed_mse(W, b, X_val, Y_val)
    loss_log: list[tuple[int, float]] = [(0, best_loss)]
    evals_since_best = 0
    step = 0
    stopped = False

    for _ in range(params.epochs):
        if stopped:
            break
        for batch_idx in _batches(len(X_train), params.batch, rng):
            Xb, Yb = X_train[batch_idx], Y_train[batch_idx]
            E = Xb @ W.T + b - Yb
            W -= params.lr * (2.0 / len(batch_idx)) * (E.T @ Xb)
            b -= params.lr * (2.0 / len(batch_idx)) * E.sum(axis=0)
            step += 1
            if step % params.eval_every == 0:
                loss = _summed_mse(W, b, X_val, Y_val)
                loss_log.append((step, loss))
                if loss < best_loss:
                    best_loss = loss
                    best_W, best_b = W.copy(), b.copy()
                    evals_since_best = 0
                else:
                    evals_since_best += 1
                    if params.patience is not None and evals_since_best >= params.patience:
                        stopped = True
                        break

    # a final evaluation so short runs still have their last state considered
    if step % params.eval_every != 0:
        loss = _summed_mse(W, b, X_val, Y_val)
        loss_log.append((step, loss))
        if loss < best_loss:
            best_W, best_b = W.copy(), b.copy()

    return MultiHeadModel(weights=best_W, biases=best_b, input_dim=dim,
                          loss_log=tuple(loss_log))


def _batches(n: int, batch: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch):
        yield order[start:start + batch]


def predict_multitask(model: MultiHeadModel, X: np.ndarray) -> np.ndarray:
    """Per-head predictions, shape (n, T)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise DegenerateInputError(
            f"X has {X.shape[1] if X.ndim == 2 else '?'} features, "
            f"model expects {model.input_dim}"
        )
    return X @ model.weights.T + model.biases


def svr_oof_predictions(
    X: np.ndarray,
    y: np.ndarray,
    plan: FoldPlan,
    C: float = DEFAULT_SVR_C,
    epsilon: float = DEFAULT_SVR_EPSILON,
    tol: float = DEFAULT_SVR_TOL,
    max_iter: int = DEFAULT_SVR_MAX_ITER,
    standardize: bool = True,
    seed: int = 0,
) -> np.ndarray:
    """Out-of-fold predictions: each sample scored by the model trained on
    the folds that exclude it.  Scalers are fit per fold on training rows."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    yhat = np.empty_like(y)
    for fold in range(plan.k):
        train, test = plan.train_indices(fold), plan.test_indices(fold)
        model = train_svr(X[train], y[train], C=C, epsilon=epsilon, tol=tol,
                          max_iter=max_iter, standardize=standardize, seed=seed)
        yhat[test] = predict(model, X[test])
    return yhat
