"""Detection models built from first principles on numpy.

Three families: binary logistic regression trained by full-batch gradient
descent, a fixed d-6-1 multilayer perceptron trained by mini-batch
backpropagation, and Lloyd's K-Means with elbow-based k selection.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import expit as sigmoid

from .errors import ConfigError, ContractViolation, TrainingError
from .scaling import Scaler, as_matrix

HIDDEN_WIDTH = 6
BATCH_SIZE = 32


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    max_epochs: int = 200
    tolerance: float = 1e-6
    l2: float = 1e-4
    seed: int = 42

    def __post_init__(self):
        if self.learning_rate <= 0 or self.max_epochs <= 0 or self.tolerance <= 0:
            raise ConfigError("learning_rate, max_epochs and tolerance must be positive")
        if self.l2 < 0:
            raise ConfigError("l2 must be >= 0")


@dataclass(frozen=True)
class LgrModel:
    weights: np.ndarray
    bias: float
    scaler: Scaler


@dataclass(frozen=True)
class MlpModel:
    W1: np.ndarray  # (6, d)
    b1: np.ndarray  # (6,)
    W2: np.ndarray  # (1, 6)
    b2: float
    scaler: Scaler


@dataclass(frozen=True)
class KMeansModel:
    centroids: np.ndarray  # (k, d)
    k: int
    wcss: float
    label_map: Optional[dict[int, int]] = None


def _check_binary_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ContractViolation("y must be 1-D")
    if not np.isin(y, (0, 1)).all():
        raise ContractViolation("labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise TrainingError("degenerate labels: both classes must be present")
    return y.astype(np.float64)


# --------------------------------------------------------------------------
# logistic regression


def _lgr_loss(Xs, y, w, b, l2):
    z = Xs @ w + b
    # log(1 + e^z) - y*z, evaluated stably
    bce = float(np.mean(np.logaddexp(0.0, z) - y * z))
    return bce + 0.5 * l2 * float(w @ w)


def lgr_fit(X, y, cfg: TrainConfig = TrainConfig(),
            loss_history: Optional[list] = None) -> LgrModel:
    """Fit L2-regularized logistic regression by monotone gradient descent.

    Steps that would raise the loss are halved until they do not, so the
    recorded loss sequence never increases. Stops when the gradient
    max-norm falls below cfg.tolerance or after cfg.max_epochs.
    """
    X = as_matrix(X)
    y = _check_binary_labels(y)
    if len(y) != X.shape[0]:
        raise ContractViolation("X and y row counts differ")
    scaler = Scaler.fit(X)
    Xs = scaler.transform(X)
    n, d = Xs.shape
    w = np.zeros(d)
    b = 0.0
    step = cfg.learning_rate
    loss = _lgr_loss(Xs, y, w, b, cfg.l2)
    if loss_history is not None:
        loss_history.append(loss)
    for _ in range(cfg.max_epochs):
        p = sigmoid(Xs @ w + b)
        gw = Xs.T @ (p - y) / n + cfg.l2 * w
        gb = float(np.mean(p - y))
        if max(np.abs(gw).max(), abs(gb)) <= cfg.tolerance:
            break
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            loss_new = _lgr_loss(Xs, y, w_new, b_new, cfg.l2)
            if loss_new <= loss or step < 1e-18:
                break
            step *= 0.5
        if step < 1e-18:
            break
        w, b, loss = w_new, b_new, loss_new
        step = min(step * 2.0, cfg.learning_rate)
        if loss_history is not None:
            loss_history.append(loss)
    return LgrModel(weights=w, bias=b, scaler=scaler)


def lgr_predict(model: LgrModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Return (probabilities, labels); ties at p == 0.5 go to attack."""
    X = as_matrix(X)
    if X.shape[1] != len(model.weights):
        raise ContractViolation(
            f"model has {len(model.weights)} features, input has {X.shape[1]}")
    p = sigmoid(model.scaler.transform(X) @ model.weights + model.bias)
    return p, (p >= 0.5).astype(np.int64)


# --------------------------------------------------------------------------
# multilayer perceptron (d-6-1, ReLU hidden, sigmoid output)


def _mlp_forward(W1, b1, W2, b2, Xs):
    Z1 = Xs @ W1.T + b1
    H = np.maximum(Z1, 0.0)
    z2 = H @ W2.T + b2
    return Z1, H, z2[:, 0]


def mlp_loss_grads(W1, b1, W2, b2, X, y, l2=0.0):
    """Batch binary cross-entropy and its analytic parameter gradients.

    Operates on X as given (no scaling), so finite-difference checks can
    drive it directly.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    Z1, H, z2 = _mlp_forward(W1, b1, W2, b2, X)
    loss = float(np.mean(np.logaddexp(0.0, z2) - y * z2))
    loss += 0.5 * l2 * (float(np.sum(W1 * W1)) + float(np.sum(W2 * W2)))
    dz2 = (sigmoid(z2) - y) / n
    dW2 = dz2[None, :] @ H + l2 * W2
    db2 = float(dz2.sum())
    dH = dz2[:, None] @ W2
    dZ1 = dH * (Z1 > 0.0)
    dW1 = dZ1.T @ X + l2 * W1
    db1 = dZ1.sum(axis=0)
    return loss, (dW1, db1, dW2, db2)


def mlp_fit(X, y, cfg: TrainConfig = TrainConfig(),
            with_sigma: Optional[bool] = None) -> MlpModel:
    """Train the d-6-1 network with seeded mini-batch gradient descent.

    with_sigma pins the expected arity: True demands the 13-feature frame
    layout, False the plain 12-feature one. None accepts any width, which
    is what the unframed per-interval run uses.
    """
    X = as_matrix(X)
    y = _check_binary_labels(y)
    if len(y) != X.shape[0]:
        raise ContractViolation("X and y row counts differ")
    d = X.shape[1]
    if with_sigma is True and d != 13:
        raise ConfigError(f"sigma frames have 13 features, got {d}")
    if with_sigma is False and d != 12:
        raise ConfigError(f"frames have 12 features, got {d}")
    scaler = Scaler.fit(X)
    Xs = scaler.transform(X)
    n = Xs.shape[0]
    rng = np.random.default_rng(cfg.seed)
    W1 = rng.uniform(-0.5, 0.5, size=(HIDDEN_WIDTH, d)) / np.sqrt(d)
    b1 = np.zeros(HIDDEN_WIDTH)
    W2 = rng.uniform(-0.5, 0.5, size=(1, HIDDEN_WIDTH)) / np.sqrt(HIDDEN_WIDTH)
    b2 = 0.0
    for _ in range(cfg.max_epochs):
        order = rng.permutation(n)
        for start in range(0, n, BATCH_SIZE):
            batch = order[start:start + BATCH_SIZE]
            _, (dW1, db1, dW2, db2) = mlp_loss_grads(
                W1, b1, W2, b2, Xs[batch], y[batch], cfg.l2)
            W1 -= cfg.learning_rate * dW1
            b1 -= cfg.learning_rate * db1
            W2 -= cfg.learning_rate * dW2
            b2 -= cfg.learning_rate * db2
    return MlpModel(W1=W1, b1=b1, W2=W2, b2=b2, scaler=scaler)


def mlp_predict(model: MlpModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Return (probabilities, labels); same 0.5 tie-break as lgr_predict."""
    X = as_matrix(X)
    if X.shape[1] != model.W1.shape[1]:
        raise ContractViolation(
            f"model has {model.W1.shape[1]} features, input has {X.shape[1]}")
    Xs = model.scaler.transform(X)
    _, _, z2 = _mlp_forward(model.W1, model.b1, model.W2, model.b2, Xs)
    p = sigmoid(z2)
    return p, (p >= 0.5).astype(np.int64)


# --------------------------------------------------------------------------
# K-Means


def _distinct_row_init(X, k, rng):
    order = rng.permutation(X.shape[0])
    chosen: list[int] = []
    seen: set[bytes] = set()
    for i in order:
        key = X[i].tobytes()
        if key not in seen:
            seen.add(key)
            chosen.append(i)
            if len(chosen) == k:
                break
    for i in order:
        if len(chosen) == k:
            break
        if i not in chosen:
            chosen.append(i)
    return X[np.array(chosen[:k])].copy()


def kmeans_fit(X, k: int, cfg: TrainConfig = TrainConfig(),
               wcss_history: Optional[list] = None) -> KMeansModel:
    """Lloyd's iterations from k seeded-random distinct data points.

    Ties assign to the lowest cluster id; a cluster that empties is
    reseeded to the point farthest from its assigned centroid. Stops when
    assignments repeat or after cfg.max_epochs sweeps.
    """
    X = as_matrix(X)
    n = X.shape[0]
    if k < 1:
        raise ConfigError("k must be >= 1")
    if n < k:
        raise TrainingError(f"need at least k={k} points, got {n}")
    rng = np.random.default_rng(cfg.seed)
    centroids = _distinct_row_init(X, k, rng)
    prev_assign = None
    assign = None
    for _ in range(cfg.max_epochs):
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        own = d2[np.arange(n), assign]
        empty = [c for c in range(k) if not (assign == c).any()]
        if empty:
            own = own.copy()
            for c in empty:
                far = int(own.argmax())
                centroids[c] = X[far]
                own[far] = -1.0
            continue  # re-derive assignments from the repaired centroids
        if wcss_history is not None:
            wcss_history.append(float(own.sum()))
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign
        for c in range(k):
            centroids[c] = X[assign == c].mean(axis=0)
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    wcss = float(d2[np.arange(n), assign].sum())
    return KMeansModel(centroids=centroids, k=k, wcss=wcss)


def kmeans_best(X, k: int, cfg: TrainConfig = TrainConfig(), restarts: int = 1) -> KMeansModel:
    """Best (lowest wcss) of `restarts` seeded kmeans_fit runs."""
    best = None
    for r in range(restarts):
        model = kmeans_fit(X, k, replace(cfg, seed=cfg.seed + r))
        if best is None or model.wcss < best.wcss:
            best = model
    return best


def kmeans_assign(model: KMeansModel, X) -> np.ndarray:
    """Nearest-centroid id per row, ties to the lowest id."""
    X = as_matrix(X)
    if X.shape[1] != model.centroids.shape[1]:
        raise ContractViolation(
            f"model has {model.centroids.shape[1]} features, input has {X.shape[1]}")
    d2 = ((X[:, None, :] - model.centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def elbow_curve(X, k_max: int, cfg: TrainConfig = TrainConfig()
                ) -> tuple[list[tuple[int, float]], int]:
    """WCSS over k = 1..k_max (best of 5 restarts each) plus the chosen k.

    The chosen k maximizes the discrete second difference of the wcss
    curve over interior k; with fewer than 3 candidate k it is k_max.
    """
    X = as_matrix(X)
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    if X.shape[0] < k_max:
        raise TrainingError(f"need at least k_max={k_max} points, got {X.shape[0]}")
    curve = [(k, kmeans_best(X, k, cfg, restarts=5).wcss) for k in range(1, k_max + 1)]
    if k_max < 3:
        return curve, k_max
    wcss = [w for _, w in curve]
    best_k, best_bend = None, -np.inf
    for k in range(2, k_max):
        bend = wcss[k - 2] - 2.0 * wcss[k - 1] + wcss[k]
        if bend > best_bend:
            best_k, best_bend = k, bend
    return curve, best_k


def map_clusters_to_labels(model: KMeansModel) -> KMeansModel:
    """For k = 2, map the higher-mean-coordinate cluster to the attack label.

    Equal centroid means map cluster 1 to attack.
    """
    if model.k != 2:
        raise ConfigError(f"label mapping is defined for k = 2, got k = {model.k}")
    means = model.centroids.mean(axis=1)
    attack = 1 if means[1] >= means[0] else 0
    return replace(model, label_map={attack: 1, 1 - attack: 0})
