"""Linear support vector machine trained with Pegasos-style subgradient steps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    epochs: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0 or self.epochs < 1:
            raise ContractError("C must be > 0 and epochs >= 1")


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    config: SvmConfig = SvmConfig()
    positive: str = "good"
    negative: str = "bad"

    @property
    def n_features(self):
        return self.weights.size


def fit_svm(X, labels, config: SvmConfig = SvmConfig(), positive="good") -> SvmModel:
    """Minimise ``lam/2 * ||(w, b)||^2 + mean hinge loss`` with ``lam = 1/(C n)``.

    Each epoch visits the rows in a seeded random order; step ``t`` uses the
    rate ``1 / (lam * t)``. The bias is carried as the weight of a constant
    input of 1. ``positive`` maps to +1, the other class to -1.
    """
    X = np.asarray(X, dtype=float)
    labels = [getattr(v, "value", v) for v in labels]
    if X.ndim != 2 or X.shape[0] != len(labels):
        raise ContractError("X rows must match labels length")
    classes = set(labels)
    if len(classes) != 2 or positive not in classes:
        raise ContractError(f"need two classes including {positive!r}, got {sorted(map(str, classes))}")
    negative = next(c for c in classes if c != positive)
    y = np.array([1.0 if v == positive else -1.0 for v in labels])
    n = X.shape[0]
    lam = 1.0 / (config.C * n)
    A = np.column_stack([X, np.ones(n)])
    rows = list(A)
    yx = [y[i] * rows[i] for i in range(n)]

    # w_t = S / (lam * t) where S sums y_i x_i over the margin violations so far
    S = np.zeros(A.shape[1])
    rng = np.random.default_rng(config.seed)
    t = 0
    for _ in range(config.epochs):
        for i in rng.permutation(n):
            t += 1
            if t == 1 or y[i] * float(S @ rows[i]) < lam * (t - 1):
                # margin test uses w_{t-1}; at t=1 w is zero so the test passes
                S = S + yx[i]
    w = S / (lam * t)
    return SvmModel(w[:-1].copy(), float(w[-1]), config, positive, negative)


def decision_function(model: SvmModel, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ContractError(f"model expects {model.n_features} features, got {X.shape[1]}")
    return X @ model.weights + model.bias


def predict_svm(model: SvmModel, X):
    """Positive label where ``w.x + b >= 0`` (the boundary counts as +1)."""
    score = decision_function(model, X)
    return np.where(score >= 0, model.positive, model.negative).astype(object)
