"""Feature ranking by Pearson correlation, z-score scaling and SMOTE."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import ContractError, UndefinedCorrelationError
from .schema import PREDICTORS


def pearson_r(a, b) -> float:
    """Sample linear correlation coefficient of two equal-length vectors.

    Computed as ``(sum(ab) - n*mean(a)*mean(b)) / ((n-1) * sd_a * sd_b)`` with
    sample standard deviations; the cross-product sum is taken over centred
    values, which is the same quantity without the cancellation error.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ContractError("pearson_r needs two 1-D vectors of equal length")
    n = a.size
    if n < 2:
        raise ContractError("pearson_r needs at least two values")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise UndefinedCorrelationError("correlation of a constant vector")
    da = a - a.mean()
    db = b - b.mean()
    sd_a = math.sqrt(float(da @ da) / (n - 1))
    sd_b = math.sqrt(float(db @ db) / (n - 1))
    r = float(da @ db) / ((n - 1) * sd_a * sd_b)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class CorrelationReport:
    """Predictors with their correlation to the target, best first.

    ``r`` is ``None`` where the correlation is undefined; those rows sit at
    the end of ``scores``.
    """

    scores: Tuple[Tuple[str, Optional[float]], ...]
    absolute: bool = False

    @property
    def names(self):
        return [name for name, _ in self.scores]

    def to_csv(self, path=None):
        lines = ["feature,r"]
        for name, r in self.scores:
            lines.append(f"{name},{'' if r is None else f'{r:.6f}'}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def rank_features(X, y=None, names=PREDICTORS, absolute=False) -> CorrelationReport:
    """Score every column of ``X`` by Pearson r against ``y`` and sort.

    ``X`` may be a :class:`~edumine.dataset.FeatureTable`, in which case its
    predictors are scored against its ``etest`` column. Sorting is by signed
    r, descending (by ``|r|`` when ``absolute``), ties kept in column order.
    Constant columns get ``None`` and go last.
    """
    if y is None:
        X, y = X.predictors(names), X.etest
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ContractError("X rows must match y length")
    if X.shape[0] < 2:
        raise ContractError("need at least two rows to rank features")
    if len(names) != X.shape[1]:
        raise ContractError("one name per column required")
    scored = []
    for j, name in enumerate(names):
        try:
            r = pearson_r(X[:, j], y)
        except UndefinedCorrelationError:
            r = None
        scored.append((j, name, r))

    def key(item):
        j, _, r = item
        if r is None:
            return (1, 0.0, j)
        return (0, -(abs(r) if absolute else r), j)

    scored.sort(key=key)
    return CorrelationReport(tuple((name, r) for _, name, r in scored), absolute)


def select_top_k(report: CorrelationReport, k=11) -> List[str]:
    if k <= 0:
        raise ContractError("k must be positive")
    if k > len(report.scores):
        raise ContractError(f"k={k} exceeds the {len(report.scores)} ranked features")
    return report.names[:k]


@dataclass(frozen=True)
class NormalizerParams:
    mean: np.ndarray
    sd: np.ndarray

    def to_dict(self):
        return {"mean": self.mean.tolist(), "sd": self.sd.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["sd"], dtype=float))


def fit_normalizer(X) -> NormalizerParams:
    """Column means and sample (n-1) standard deviations of the training rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ContractError("fit_normalizer needs a 2-D array with >= 2 rows")
    return NormalizerParams(X.mean(axis=0), X.std(axis=0, ddof=1))


def apply_normalizer(params: NormalizerParams, X):
    """``(X - mean) / sd`` per column; columns with zero sd map to 0."""
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != params.mean.size:
        raise ContractError("column count does not match the fitted normalizer")
    safe = np.where(params.sd > 0, params.sd, 1.0)
    Z = (X - params.mean) / safe
    return np.where(params.sd > 0, Z, 0.0)


def invert_normalizer(params: NormalizerParams, Z):
    return np.asarray(Z, dtype=float) * params.sd + params.mean


@dataclass(frozen=True)
class SmoteConfig:
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ContractError("SMOTE k must be >= 1")


@dataclass(frozen=True)
class SmoteResult:
    """Original rows followed by synthetic minority rows.

    ``pairs[i]`` holds the original row indices (base, neighbour) whose
    segment synthetic row ``n_original + i`` was drawn from.
    """

    X: np.ndarray
    y: np.ndarray
    n_original: int
    pairs: np.ndarray
    minority: object


def _nearest_minority(Xm, k):
    # brute-force Euclidean; ties resolved by lower row index (stable sort)
    d = ((Xm[:, None, :] - Xm[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d, np.inf)
    return np.argsort(d, axis=1, kind="stable")[:, :k]


def smote_oversample(X, y, cfg: SmoteConfig = SmoteConfig()) -> SmoteResult:
    """Balance a two-class sample by interpolating minority rows.

    Each synthetic row is ``x_i + lam * (x_j - x_i)`` where ``x_i`` is drawn
    uniformly from the minority rows, ``x_j`` uniformly from the ``k`` nearest
    minority neighbours of ``x_i`` and ``lam`` from U[0, 1). The generator
    draws all base indices, then all neighbour slots, then all ``lam``.
    Rows are appended until both classes have the majority count.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ContractError("X rows must match y length")
    classes, counts = np.unique(y, return_counts=True)
    if classes.size != 2:
        raise ContractError(f"SMOTE needs exactly two classes, got {classes.size}")
    lo = int(np.argmin(counts)) if counts[0] != counts[1] else 1
    minority = classes[lo]
    n_new = int(counts.max() - counts.min())
    min_idx = np.flatnonzero(y == minority)
    if min_idx.size <= cfg.k:
        raise ContractError(
            f"minority class has {min_idx.size} rows; SMOTE k={cfg.k} needs more"
        )
    rng = np.random.default_rng(cfg.seed)
    Xm = X[min_idx]
    base = rng.integers(min_idx.size, size=n_new)
    slot = rng.integers(cfg.k, size=n_new)
    lam = rng.random(n_new)
    nbrs = _nearest_minority(Xm, cfg.k)
    other = nbrs[base, slot]
    xi, xj = Xm[base], Xm[other]
    synth = xi + lam[:, None] * (xj - xi)
    # rounding must not push a value past the segment end
    synth = np.clip(synth, np.minimum(xi, xj), np.maximum(xi, xj))
    pairs = np.column_stack([min_idx[base], min_idx[other]])
    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.repeat(minority, n_new)]).astype(y.dtype, copy=False)
    return SmoteResult(X_out, y_out, X.shape[0], pairs, minority)
