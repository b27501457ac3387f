"""Random forests: bootstrap-aggregated CART trees with random feature subsets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import ContractError
from .tree import DecisionTree, TreeConfig, class_order, encode, grow, leaf_values


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    mtry: Optional[int] = None
    bootstrap: bool = True
    seed: int = 0
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise ContractError("n_trees must be >= 1")


def default_mtry(n_features, task):
    if task == "classify":
        return math.ceil(math.sqrt(n_features))
    return max(1, n_features // 3)


@dataclass
class ForestModel:
    trees: List[DecisionTree]
    task: str
    config: ForestConfig
    mtry: int
    n_features: int
    classes: Optional[tuple] = None
    tree_seeds: list = field(default_factory=list)

    @property
    def n_trees(self):
        return len(self.trees)


def tree_rng(seed, index):
    """Generator for tree ``index``; depends only on (forest seed, index)."""
    return np.random.default_rng([int(seed), int(index)])


def fit_forest(X, y, config: ForestConfig = ForestConfig(), task="classify") -> ForestModel:
    """Grow ``config.n_trees`` trees.

    Tree ``t`` uses its own generator seeded from ``(config.seed, t)``: first
    for the bootstrap sample (``n`` draws with replacement) and then for the
    feature subsets at each node.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ContractError("X rows must match y length")
    n, p = X.shape
    if n < 2:
        raise ContractError("fit_forest needs at least two rows")
    if task not in ("classify", "regress"):
        raise ContractError(f"unknown task {task!r}")
    mtry = config.mtry if config.mtry is not None else default_mtry(p, task)
    if not 1 <= mtry <= p:
        raise ContractError(f"mtry={mtry} must lie in [1, {p}]")
    criterion = "gini" if task == "classify" else "variance"
    tcfg = TreeConfig(config.max_depth, config.min_samples_leaf, criterion)
    if task == "classify":
        classes = class_order(y)
        target = encode(y, classes)
        n_classes = len(classes)
    else:
        classes = None
        target = np.asarray(y, dtype=float)
        n_classes = None

    trees, seeds = [], []
    for t in range(config.n_trees):
        rng = tree_rng(config.seed, t)
        idx = rng.integers(n, size=n) if config.bootstrap else np.arange(n)
        root = grow(X[idx], target[idx], tcfg, n_classes, mtry, rng)
        trees.append(DecisionTree(root, task, p, tcfg, classes))
        seeds.append([int(config.seed), t])
    return ForestModel(trees, task, config, mtry, p, classes, seeds)


def tree_predictions(model: ForestModel, X):
    """Per-tree predictions: class indices (T x n) or values (T x n)."""
    per_tree = [leaf_values(t, X) for t in model.trees]
    if model.task == "classify":
        return np.stack([np.argmax(v, axis=1) for v in per_tree])
    return np.stack(per_tree)


def vote_fractions(model: ForestModel, X):
    """Share of trees voting for each class, shape (n, C)."""
    votes = tree_predictions(model, X)
    counts = np.stack(
        [(votes == c).sum(axis=0) for c in range(len(model.classes))], axis=1
    )
    return counts / model.n_trees


def predict_forest(model: ForestModel, X):
    """Majority vote (ties go to the first class, ``bad``) or mean prediction."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ContractError(f"forest expects {model.n_features} features, got {X.shape[1]}")
    if model.task == "classify":
        frac = vote_fractions(model, X)
        return np.array(model.classes, dtype=object)[np.argmax(frac, axis=1)]
    return tree_predictions(model, X).mean(axis=0)
