"""End-to-end training, evaluation and prediction on a feature table.

Regression: clean, split, rank predictors on the training rows and keep the
top ``select_k``, fit, score on the test rows.

Classification: clean, label, split, fit the z-score normaliser on the
training rows, oversample the training rows with SMOTE, fit, score.
Test rows never reach the normaliser fit or SMOTE; the ``on_rows`` hook
receives the row indices each of those stages touches.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import __version__
from .dataset import FeatureTable, clean_missing, derive_labels, train_test_split
from .errors import ContractError, SnapshotFormatError
from .metrics import (
    ClassificationReport,
    RegressionReport,
    accuracy_table,
    classification_table,
    regression_table,
    report_record,
)
from .models import (
    ForestConfig,
    LogisticConfig,
    SvmConfig,
    TreeConfig,
    classify_logistic,
    fit_forest,
    fit_knn,
    fit_logistic,
    fit_mlr,
    fit_svm,
    fit_tree,
    model_from_dict,
    model_to_dict,
    predict_forest,
    predict_knn,
    predict_mlr,
    predict_svm,
    predict_tree,
    vote_fractions,
)
from .models.knn import neighbour_votes
from .models.tree import leaf_values
from .preprocess import (
    NormalizerParams,
    SmoteConfig,
    apply_normalizer,
    fit_normalizer,
    rank_features,
    select_top_k,
    smote_oversample,
)
from .schema import COLUMNS, PREDICTORS

SNAPSHOT_FORMAT = "edumine-model"
SNAPSHOT_VERSION = 1

REGRESSORS = ("mlr", "rfr")
CLASSIFIERS = ("rf", "dt", "knn", "lr", "svm")
MODEL_LABELS = {
    "mlr": "MLR",
    "rfr": "RFR",
    "rf": "RF",
    "dt": "DT",
    "knn": "KNN",
    "lr": "LR",
    "svm": "SVM",
}


def derive_seed(seed, purpose) -> int:
    """64-bit seed for one purpose, so streams never share draws."""
    digest = hashlib.sha256(f"{int(seed)}/{purpose}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def task_of(model):
    if model in REGRESSORS:
        return "regress"
    if model in CLASSIFIERS:
        return "classify"
    raise ContractError(f"unknown model {model!r}")


@dataclass(frozen=True)
class TrainConfig:
    task: str
    model: str
    split: float = 0.8
    seed: int = 42
    select_k: Optional[int] = None
    smote: bool = True
    smote_k: int = 5
    stratify: bool = False
    n_trees: int = 100
    knn_k: int = 5
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    lr_step: float = 0.1
    lr_epochs: int = 1000
    svm_c: float = 1.0
    svm_epochs: int = 1000

    def __post_init__(self):
        if task_of(self.model) != self.task:
            raise ContractError(f"model {self.model!r} cannot be used for task {self.task!r}")
        if self.task == "classify" and self.select_k is not None:
            raise ContractError("feature selection applies to the regression task only")


@dataclass
class TrainResult:
    snapshot: dict
    record: dict
    text: str
    train_indices: np.ndarray
    test_indices: np.ndarray
    features: List[str]
    n_dropped: int
    correlation: Optional[object] = None
    extra: dict = field(default_factory=dict)


def _fit(cfg: TrainConfig, X, y):
    seed = derive_seed(cfg.seed, f"model:{cfg.model}")
    if cfg.model == "mlr":
        return fit_mlr(X, y)
    if cfg.model in ("rfr", "rf"):
        fc = ForestConfig(
            n_trees=cfg.n_trees,
            seed=seed,
            max_depth=cfg.max_depth,
            min_samples_leaf=cfg.min_samples_leaf,
        )
        return fit_forest(X, y, fc, task=cfg.task)
    if cfg.model == "dt":
        return fit_tree(X, y, TreeConfig(cfg.max_depth, cfg.min_samples_leaf, "gini"))
    if cfg.model == "knn":
        return fit_knn(X, y, cfg.knn_k)
    if cfg.model == "lr":
        return fit_logistic(X, y, LogisticConfig(cfg.lr_step, cfg.lr_epochs))
    if cfg.model == "svm":
        return fit_svm(X, y, SvmConfig(cfg.svm_c, cfg.svm_epochs, seed))
    raise ContractError(f"unknown model {cfg.model!r}")


def _predict(kind, model, X):
    """Predictions plus P(good) where the model provides one."""
    if kind == "mlr":
        return predict_mlr(model, X), None
    if kind == "forest":
        if model.task == "regress":
            return predict_forest(model, X), None
        frac = vote_fractions(model, X)
        labels = np.array(model.classes, dtype=object)[np.argmax(frac, axis=1)]
        return labels, _p_good(frac, model.classes)
    if kind == "tree":
        return predict_tree(model, X), _p_good(leaf_values(model, X), model.classes)
    if kind == "knn":
        votes = neighbour_votes(model, X)
        labels = predict_knn(model, X)
        return labels, _p_good(votes / model.k, model.classes)
    if kind == "logistic":
        labels, p = classify_logistic(model, X)
        return labels, p if model.positive == "good" else 1.0 - p
    if kind == "svm":
        return predict_svm(model, X), None
    raise SnapshotFormatError(f"unknown estimator kind {kind!r}")


def _p_good(dist, classes):
    if "good" not in classes:
        return np.zeros(dist.shape[0])
    return dist[:, list(classes).index("good")]


def _prepare_classification(table, features):
    X = table.predictors(features)
    labels = np.array([lab.value for lab in derive_labels(table)], dtype=object)
    return X, labels


def train(table: FeatureTable, cfg: TrainConfig, on_rows: Optional[Callable] = None) -> TrainResult:
    """Run the full protocol for one model; see the module docstring."""
    clean, dropped = clean_missing(table)
    n = clean.n
    features = list(PREDICTORS)
    notify = on_rows or (lambda stage, idx: None)

    if cfg.task == "regress":
        split = train_test_split(n, cfg.split, derive_seed(cfg.seed, "split"))
        tr, te = split.train_indices, split.test_indices
        correlation = None
        if cfg.select_k is not None:
            notify("rank", tr)
            correlation = rank_features(clean.take(tr))
            features = select_top_k(correlation, cfg.select_k)
        X = clean.predictors(features)
        y = clean.etest
        model = _fit(cfg, X[tr], y[tr])
        kind = model_to_dict(model)["kind"]
        pred, _ = _predict(kind, model, X[te])
        rep = RegressionReport.compute(y[te], pred)
        label = f"{MODEL_LABELS[cfg.model]} with {len(features)} features"
        text = regression_table([(label, rep)])
        normalizer = None
    else:
        X_raw, labels = _prepare_classification(clean, features)
        split = train_test_split(
            n,
            cfg.split,
            derive_seed(cfg.seed, "split"),
            stratify=labels if cfg.stratify else None,
        )
        tr, te = split.train_indices, split.test_indices
        notify("normalizer", tr)
        normalizer = fit_normalizer(X_raw[tr])
        X_tr = apply_normalizer(normalizer, X_raw[tr])
        y_tr = labels[tr]
        if cfg.smote:
            notify("smote", tr)
            res = smote_oversample(X_tr, y_tr, SmoteConfig(cfg.smote_k, derive_seed(cfg.seed, "smote")))
            X_tr, y_tr = res.X, res.y
        model = _fit(cfg, X_tr, y_tr)
        kind = model_to_dict(model)["kind"]
        pred, _ = _predict(kind, model, apply_normalizer(normalizer, X_raw[te]))
        rep = ClassificationReport.compute(labels[te], pred, positive="bad")
        label = MODEL_LABELS[cfg.model]
        text = accuracy_table([(label, rep)]) + "\n" + classification_table([(label, rep)])
        correlation = None

    record = report_record(
        cfg.model,
        cfg.task,
        cfg.seed,
        rep,
        n_train=int(len(tr)),
        n_test=int(len(te)),
        n_dropped=dropped,
        features=features,
        smote=cfg.smote if cfg.task == "classify" else None,
    )
    snapshot = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "tool_version": __version__,
        "task": cfg.task,
        "model": cfg.model,
        "features": features,
        "normalizer": normalizer.to_dict() if normalizer is not None else None,
        "config": asdict(cfg),
        "estimator": model_to_dict(model),
    }
    return TrainResult(snapshot, record, text, tr, te, features, dropped, correlation,
                       {"report": rep})


def dumps_snapshot(snapshot) -> str:
    return json.dumps(snapshot, sort_keys=True, separators=(",", ":")) + "\n"


def loads_snapshot(text):
    try:
        snap = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotFormatError(f"snapshot is not valid JSON: {exc}") from exc
    if not isinstance(snap, dict) or snap.get("format") != SNAPSHOT_FORMAT:
        raise SnapshotFormatError("not an edumine model snapshot")
    if snap.get("version") != SNAPSHOT_VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {snap.get('version')!r}")
    for key in ("task", "model", "features", "estimator"):
        if key not in snap:
            raise SnapshotFormatError(f"snapshot lacks {key!r}")
    unknown = [f for f in snap["features"] if f not in COLUMNS]
    if unknown:
        raise SnapshotFormatError(f"snapshot names unknown features {unknown}")
    return snap


class LoadedModel:
    """A snapshot rebuilt into a callable model."""

    def __init__(self, snapshot):
        self.snapshot = snapshot
        self.task = snapshot["task"]
        self.name = snapshot["model"]
        self.features = list(snapshot["features"])
        norm = snapshot.get("normalizer")
        self.normalizer = NormalizerParams.from_dict(norm) if norm else None
        self.estimator = model_from_dict(snapshot["estimator"])
        self.kind = snapshot["estimator"]["kind"]

    def _matrix(self, table: FeatureTable):
        X = table.predictors(self.features)
        if np.isnan(X).any():
            gaps = [f for f, bad in zip(self.features, np.isnan(X).any(axis=0)) if bad]
            raise ContractError(f"model needs values for {gaps}; rows with gaps cannot be scored")
        if self.normalizer is not None:
            X = apply_normalizer(self.normalizer, X)
        return X

    def predict(self, table: FeatureTable):
        if table.n == 0:
            return np.array([], dtype=object), None
        return _predict(self.kind, self.estimator, self._matrix(table))

    def evaluate(self, table: FeatureTable):
        clean, _ = clean_missing(table)
        pred, _ = self.predict(clean)
        if self.task == "regress":
            return RegressionReport.compute(clean.etest, pred)
        labels = [lab.value for lab in derive_labels(clean)]
        return ClassificationReport.compute(labels, pred, positive="bad")


def load_model(path) -> LoadedModel:
    with open(path, encoding="utf-8") as fh:
        return LoadedModel(loads_snapshot(fh.read()))


def predictions_csv(ids, pred, proba, task) -> str:
    lines = ["student_id,prediction,p_good" if task == "classify" else "student_id,prediction"]
    for i, sid in enumerate(ids):
        if task == "classify":
            p = "" if proba is None else f"{proba[i]:.6f}"
            lines.append(f"{sid},{pred[i]},{p}")
        else:
            lines.append(f"{sid},{float(pred[i])!r}")
    return "\n".join(lines) + "\n"

