"""JSON (de)serialisation of fitted models.

Floats are written with ``repr`` precision by the json module, so a loaded
model predicts bit-identically to the one that was saved.
"""

from __future__ import annotations

import numpy as np

from ..errors import SnapshotFormatError
from .forest import ForestConfig, ForestModel
from .knn import KnnModel
from .linear import LinearModel
from .logistic import LogisticConfig, LogisticModel
from .svm import SvmConfig, SvmModel
from .tree import DecisionTree, TreeConfig, node_from_dict, node_to_dict


def _tree_to_dict(t: DecisionTree):
    return {
        "task": t.task,
        "n_features": t.n_features,
        "config": {
            "max_depth": t.config.max_depth,
            "min_samples_leaf": t.config.min_samples_leaf,
            "criterion": t.config.criterion,
        },
        "classes": list(t.classes) if t.classes is not None else None,
        "root": node_to_dict(t.root),
    }


def _tree_from_dict(d):
    classify = d["task"] == "classify"
    return DecisionTree(
        node_from_dict(d["root"], classify),
        d["task"],
        int(d["n_features"]),
        TreeConfig(**d["config"]),
        tuple(d["classes"]) if d["classes"] is not None else None,
    )


def model_to_dict(model):
    if isinstance(model, LinearModel):
        return {
            "kind": "mlr",
            "intercept": model.intercept,
            "coef": model.coef.tolist(),
            "feature_names": list(model.feature_names) if model.feature_names else None,
        }
    if isinstance(model, DecisionTree):
        return {"kind": "tree", **_tree_to_dict(model)}
    if isinstance(model, ForestModel):
        c = model.config
        return {
            "kind": "forest",
            "task": model.task,
            "mtry": model.mtry,
            "n_features": model.n_features,
            "classes": list(model.classes) if model.classes is not None else None,
            "config": {
                "n_trees": c.n_trees,
                "mtry": c.mtry,
                "bootstrap": c.bootstrap,
                "seed": c.seed,
                "max_depth": c.max_depth,
                "min_samples_leaf": c.min_samples_leaf,
            },
            "tree_seeds": model.tree_seeds,
            "trees": [_tree_to_dict(t) for t in model.trees],
        }
    if isinstance(model, KnnModel):
        return {
            "kind": "knn",
            "k": model.k,
            "classes": list(model.classes),
            "X": model.X.tolist(),
            "y": model.y.tolist(),
        }
    if isinstance(model, LogisticModel):
        c = model.config
        return {
            "kind": "logistic",
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "positive": model.positive,
            "negative": model.negative,
            "config": {
                "learning_rate": c.learning_rate,
                "epochs": c.epochs,
                "tol": c.tol,
                "threshold": c.threshold,
            },
            "epochs_run": len(model.loss_history) - 1,
        }
    if isinstance(model, SvmModel):
        c = model.config
        return {
            "kind": "svm",
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "positive": model.positive,
            "negative": model.negative,
            "config": {"C": c.C, "epochs": c.epochs, "seed": c.seed},
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def model_from_dict(d):
    try:
        kind = d["kind"]
        if kind == "mlr":
            names = d.get("feature_names")
            return LinearModel(
                float(d["intercept"]),
                np.asarray(d["coef"], dtype=float),
                tuple(names) if names else None,
            )
        if kind == "tree":
            return _tree_from_dict(d)
        if kind == "forest":
            return ForestModel(
                [_tree_from_dict(t) for t in d["trees"]],
                d["task"],
                ForestConfig(**d["config"]),
                int(d["mtry"]),
                int(d["n_features"]),
                tuple(d["classes"]) if d["classes"] is not None else None,
                d["tree_seeds"],
            )
        if kind == "knn":
            return KnnModel(
                np.asarray(d["X"], dtype=float).reshape(len(d["y"]), -1),
                np.asarray(d["y"], dtype=np.intp),
                tuple(d["classes"]),
                int(d["k"]),
            )
        if kind == "logistic":
            return LogisticModel(
                np.asarray(d["weights"], dtype=float),
                float(d["bias"]),
                LogisticConfig(**d["config"]),
                d["positive"],
                d["negative"],
            )
        if kind == "svm":
            return SvmModel(
                np.asarray(d["weights"], dtype=float),
                float(d["bias"]),
                SvmConfig(**d["config"]),
                d["positive"],
                d["negative"],
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"malformed model record: {exc}") from exc
    raise SnapshotFormatError(f"unknown model kind {d.get('kind')!r}")
