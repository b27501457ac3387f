"""Multiple linear regression by least squares."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from ..errors import ContractError, SingularDesignError


@dataclass(frozen=True)
class LinearModel:
    """``y = intercept + X @ coef``."""

    intercept: float
    coef: np.ndarray
    feature_names: Optional[tuple] = None

    @property
    def n_features(self):
        return self.coef.size


def fit_mlr(X, y, feature_names: Optional[Sequence[str]] = None) -> LinearModel:
    """Ordinary least squares with an intercept.

    Solved through a column-pivoted QR factorisation of the design matrix.
    A design without full column rank raises :class:`SingularDesignError`
    listing the columns that the pivoting found dependent (``"intercept"``
    or a feature name / index); no regularisation is applied.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ContractError("X rows must match y length")
    n, p = X.shape
    if n <= p:
        raise ContractError(f"need more rows than columns, got {n} x {p}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ContractError("X and y must not contain missing or infinite values")

    names = ["intercept"] + (list(feature_names) if feature_names is not None else list(range(p)))
    A = np.column_stack([np.ones(n), X])
    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag[0] * max(A.shape) * np.finfo(float).eps
    rank = int((diag > tol).sum())
    if rank < A.shape[1]:
        raise SingularDesignError(sorted((names[i] for i in piv[rank:]), key=str))
    beta_piv = scipy.linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty_like(beta_piv)
    beta[piv] = beta_piv
    return LinearModel(
        float(beta[0]),
        beta[1:].copy(),
        tuple(feature_names) if feature_names is not None else None,
    )


def predict_mlr(model: LinearModel, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ContractError(
            f"model expects {model.n_features} features, got {X.shape[1]}"
        )
    return model.intercept + X @ model.coef
