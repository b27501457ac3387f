"""Binary logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, DivergenceError


@dataclass(frozen=True)
class LogisticConfig:
    learning_rate: float = 0.1
    epochs: int = 1000
    tol: float = 1e-8
    threshold: float = 0.5

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ContractError("threshold must lie in (0, 1)")
        if self.learning_rate <= 0 or self.epochs < 1:
            raise ContractError("learning_rate must be > 0 and epochs >= 1")


@dataclass
class LogisticModel:
    """``P(y = positive | x) = sigmoid(x @ weights + bias)``."""

    weights: np.ndarray
    bias: float
    config: LogisticConfig = LogisticConfig()
    positive: str = "good"
    negative: str = "bad"
    loss_history: list = field(default_factory=list)

    @property
    def n_features(self):
        return self.weights.size


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_grad(w, b, X, y):
    """Mean binary cross-entropy and its gradient w.r.t. ``(w, b)``.

    ``y`` is 0/1. The loss is written with ``logaddexp`` so it stays finite
    for large margins.
    """
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    r = sigmoid(z) - y
    return loss, X.T @ r / y.size, float(r.mean())


def fit_logistic(X, labels, config: LogisticConfig = LogisticConfig(), positive="good") -> LogisticModel:
    """Gradient descent from zero weights.

    Stops after ``config.epochs`` steps or once an epoch improves the loss by
    less than ``config.tol``.
    """
    X = np.asarray(X, dtype=float)
    labels = [getattr(v, "value", v) for v in labels]
    if X.ndim != 2 or X.shape[0] != len(labels):
        raise ContractError("X rows must match labels length")
    classes = set(labels)
    if len(classes) != 2 or positive not in classes:
        raise ContractError(f"need two classes including {positive!r}, got {sorted(map(str, classes))}")
    negative = next(c for c in classes if c != positive)
    y = np.array([1.0 if v == positive else 0.0 for v in labels])

    w = np.zeros(X.shape[1])
    b = 0.0
    loss, gw, gb = loss_and_grad(w, b, X, y)
    history = [loss]
    for _ in range(config.epochs):
        # overflow is caught below as a non-finite loss
        with np.errstate(over="ignore", invalid="ignore"):
            w = w - config.learning_rate * gw
            b = b - config.learning_rate * gb
            new_loss, gw, gb = loss_and_grad(w, b, X, y)
        if not np.isfinite(new_loss) or not np.isfinite(w).all():
            raise DivergenceError("loss became non-finite; try a smaller learning_rate")
        history.append(new_loss)
        if loss - new_loss < config.tol:
            break
        loss = new_loss
    return LogisticModel(w, float(b), config, positive, negative, history)


def predict_proba_logistic(model: LogisticModel, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ContractError(f"model expects {model.n_features} features, got {X.shape[1]}")
    return sigmoid(X @ model.weights + model.bias)


def classify_logistic(model: LogisticModel, X):
    """Labels and positive-class probabilities; ``P >= threshold`` is positive."""
    p = predict_proba_logistic(model, X)
    labels = np.where(p >= model.config.threshold, model.positive, model.negative).astype(object)
    return labels, p
