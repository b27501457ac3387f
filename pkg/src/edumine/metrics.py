"""Regression and classification scores.

Regression: coefficient of determination, MAPE and RMSE. Classification:
confusion matrix with ``bad`` (the at-risk student) as the positive class by
default, plus accuracy, precision, recall and F-score computed from it.
Nothing here rounds; rounding is left to the report formatters.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import ContractError, UndefinedMetricError


def _pair(actual, predicted):
    a = np.asarray(actual, dtype=float).ravel()
    p = np.asarray(predicted, dtype=float).ravel()
    if a.shape != p.shape:
        raise ContractError("actual and predicted differ in length")
    return a, p


def r_squared(actual, predicted) -> float:
    """``1 - SS_res / SS_tot``; negative when worse than predicting the mean."""
    a, p = _pair(actual, predicted)
    if a.size < 2:
        raise ContractError("r_squared needs at least two values")
    ss_tot = float(((a - a.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise UndefinedMetricError("r_squared is undefined for constant actual values")
    ss_res = float(((a - p) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent."""
    a, p = _pair(actual, predicted)
    if a.size == 0:
        raise ContractError("mape needs at least one value")
    if np.any(a == 0):
        raise UndefinedMetricError("mape is undefined when an actual value is zero")
    return float(100.0 / a.size * np.abs((a - p) / a).sum())


def rmse(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    if a.size == 0:
        raise ContractError("rmse needs at least one value")
    return math.sqrt(float(((p - a) ** 2).sum()) / a.size)


@dataclass(frozen=True)
class ConfusionMatrix:
    TP: int
    FN: int
    FP: int
    TN: int
    positive: str = "bad"

    @property
    def total(self):
        return self.TP + self.FN + self.FP + self.TN


def _label_value(x):
    return getattr(x, "value", x)


def confusion(actual, predicted, positive="bad") -> ConfusionMatrix:
    """Tally (actual, predicted) label pairs against the ``positive`` class."""
    actual = [_label_value(x) for x in actual]
    predicted = [_label_value(x) for x in predicted]
    if len(actual) != len(predicted):
        raise ContractError("actual and predicted differ in length")
    positive = _label_value(positive)
    tp = fn = fp = tn = 0
    for a, p in zip(actual, predicted):
        if a == positive:
            if p == positive:
                tp += 1
            else:
                fn += 1
        elif p == positive:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fn, fp, tn, positive)


def accuracy(m: ConfusionMatrix) -> float:
    if m.total == 0:
        raise UndefinedMetricError("accuracy of an empty confusion matrix")
    return (m.TP + m.TN) / m.total


def precision(m: ConfusionMatrix) -> float:
    if m.TP + m.FP == 0:
        raise UndefinedMetricError("precision undefined: no positive predictions")
    return m.TP / (m.TP + m.FP)


def recall(m: ConfusionMatrix) -> float:
    if m.TP + m.FN == 0:
        raise UndefinedMetricError("recall undefined: no positive examples")
    return m.TP / (m.TP + m.FN)


def f_score(m_or_precision, recall_value: Optional[float] = None) -> float:
    """Harmonic mean of precision and recall.

    Accepts either a :class:`ConfusionMatrix` or explicit
    ``(precision, recall)`` values.
    """
    if isinstance(m_or_precision, ConfusionMatrix):
        p, r = precision(m_or_precision), recall(m_or_precision)
    else:
        if recall_value is None:
            raise ContractError("f_score(precision, recall) needs both values")
        p, r = float(m_or_precision), float(recall_value)
    if p + r == 0:
        raise UndefinedMetricError("f_score undefined when precision + recall = 0")
    return 2 * p * r / (p + r)


def _maybe(fn, m):
    try:
        return fn(m)
    except UndefinedMetricError:
        return None


@dataclass(frozen=True)
class RegressionReport:
    r2: float
    rmse: float
    mape: float
    n: int

    @classmethod
    def compute(cls, actual, predicted):
        return cls(r_squared(actual, predicted), rmse(actual, predicted),
                   mape(actual, predicted), len(np.ravel(actual)))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ClassificationReport:
    """Scores for one evaluation; undefined metrics are stored as ``None``."""

    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f_score: Optional[float]
    matrix: ConfusionMatrix

    @classmethod
    def compute(cls, actual, predicted, positive="bad"):
        m = confusion(actual, predicted, positive)
        return cls(_maybe(accuracy, m), _maybe(precision, m), _maybe(recall, m),
                   _maybe(f_score, m), m)

    def to_dict(self):
        d = asdict(self)
        d["matrix"] = asdict(self.matrix)
        return d


def _fmt(v, places=6):
    return "n/a" if v is None else f"{v:.{places}f}"


def report_record(model, task, seed, report, **extra):
    """Machine-readable report: metric values rounded to six decimals."""
    d = report.to_dict()
    rounded = {}
    for key, v in d.items():
        rounded[key] = round(v, 6) if isinstance(v, float) else v
    return {"model": model, "task": task, "split_seed": seed, **extra, "metrics": rounded}


def dumps_report(record) -> str:
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def regression_table(rows) -> str:
    """Plain-text table with one ``(label, RegressionReport)`` per line."""
    lines = [f"{'Algorithm':<36}{'R2':>8}{'RMSE':>10}{'MAPE':>8}"]
    for label, rep in rows:
        lines.append(f"{label:<36}{rep.r2:>8.3f}{rep.rmse:>10.3f}{rep.mape:>8.2f}")
    return "\n".join(lines) + "\n"


def accuracy_table(rows) -> str:
    lines = [f"{'Algorithm':<12}{'Accuracy':>10}"]
    for label, rep in rows:
        acc = "n/a" if rep.accuracy is None else f"{100 * rep.accuracy:.1f}%"
        lines.append(f"{label:<12}{acc:>10}")
    return "\n".join(lines) + "\n"


def classification_table(rows) -> str:
    lines = [f"{'Algorithm':<12}{'precision':>10}{'Recall':>10}{'F-score':>10}"]
    for label, rep in rows:
        lines.append(
            f"{label:<12}{_fmt(rep.precision, 4):>10}{_fmt(rep.recall, 4):>10}"
            f"{_fmt(rep.f_score, 4):>10}"
        )
    return "\n".join(lines) + "\n"
