"""k-nearest-neighbour classification with Euclidean distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .tree import class_order, encode


@dataclass
class KnnModel:
    X: np.ndarray
    y: np.ndarray  # class indices into ``classes``
    classes: tuple
    k: int = 5

    @property
    def n_features(self):
        return self.X.shape[1]


def fit_knn(X, labels, k=5) -> KnnModel:
    X = np.array(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(labels):
        raise ContractError("X rows must match labels length")
    if not 1 <= k <= X.shape[0]:
        raise ContractError(f"k={k} must lie in [1, {X.shape[0]}]")
    classes = class_order(labels)
    return KnnModel(X, encode(labels, classes), classes, k)


def neighbour_votes(model: KnnModel, X):
    """Votes per class among the k nearest training rows, shape (n, C).

    Equal distances are resolved in favour of the lower training index.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ContractError(f"model expects {model.n_features} features, got {X.shape[1]}")
    d2 = ((X[:, None, :] - model.X[None, :, :]) ** 2).sum(axis=2)
    nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
    labels = model.y[nearest]
    return np.stack([(labels == c).sum(axis=1) for c in range(len(model.classes))], axis=1)


def predict_knn(model: KnnModel, X):
    """Majority label of the k nearest rows; vote ties go to ``bad``."""
    votes = neighbour_votes(model, X)
    return np.array(model.classes, dtype=object)[np.argmax(votes, axis=1)]
