"""CART decision trees for classification (Gini) and regression (variance)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..errors import ContractError

# candidates whose impurity decrease is within this of the best count as tied;
# the first one in (feature, threshold) order wins
TIE_TOL = 1e-12


@dataclass
class Leaf:
    value: Union[np.ndarray, float]
    n_samples: int


@dataclass
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"
    impurity_decrease: float
    n_samples: int


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeConfig:
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    criterion: str = "gini"

    def __post_init__(self):
        if self.criterion not in ("gini", "variance"):
            raise ContractError(f"unknown criterion {self.criterion!r}")
        if self.min_samples_leaf < 1:
            raise ContractError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ContractError("max_depth must be >= 0")


@dataclass
class DecisionTree:
    root: Node
    task: str
    n_features: int
    config: TreeConfig
    classes: Optional[tuple] = None


def class_order(labels):
    """Sorted distinct labels with ``bad`` moved to the front.

    Every vote in this package resolves ties toward the first class, which
    makes ``bad`` the tie winner whenever it is present.
    """
    uniq = sorted({getattr(v, "value", v) for v in labels})
    if "bad" in uniq:
        uniq.remove("bad")
        uniq.insert(0, "bad")
    return tuple(uniq)


def encode(labels, classes):
    lookup = {c: i for i, c in enumerate(classes)}
    return np.array([lookup[getattr(v, "value", v)] for v in labels], dtype=np.intp)


def gini(counts):
    """Gini impurity ``1 - sum(p_k^2)`` of a vector of class counts."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


def _candidates(X, y, n_classes):
    """Impurity decrease for every split position of every column of ``X``.

    Returns ``(xs, decrease)`` with ``decrease[i, f]`` the decrease obtained
    by sending the first ``i + 1`` sorted rows of column ``f`` left.
    """
    m = X.shape[0]
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    n_left = np.arange(1, m, dtype=float)[:, None]
    n_right = m - n_left
    if n_classes is not None:
        onehot = np.eye(n_classes)[y]
        cum = np.cumsum(onehot[order], axis=0)
        total = cum[-1]
        left = cum[:-1]
        right = total - left
        g_left = 1.0 - ((left / n_left[..., None]) ** 2).sum(axis=2)
        g_right = 1.0 - ((right / n_right[..., None]) ** 2).sum(axis=2)
        parent = 1.0 - ((total / m) ** 2).sum(axis=-1)
        dec = parent - (n_left / m) * g_left - (n_right / m) * g_right
    else:
        yc = y - y.mean()
        ys = yc[order]
        s1 = np.cumsum(ys, axis=0)
        s2 = np.cumsum(ys * ys, axis=0)
        t1, t2 = s1[-1], s2[-1]
        l1, l2 = s1[:-1], s2[:-1]
        r1, r2 = t1 - l1, t2 - l2
        v_left = l2 / n_left - (l1 / n_left) ** 2
        v_right = r2 / n_right - (r1 / n_right) ** 2
        parent = t2 / m - (t1 / m) ** 2
        dec = parent - (n_left / m) * v_left - (n_right / m) * v_right
    return xs, dec


def find_best_split(X, y, features, n_classes=None, min_samples_leaf=1):
    """Best ``(feature, threshold, impurity_decrease)`` over ``features``.

    Thresholds are midpoints between consecutive distinct sorted values and
    rows with ``x <= threshold`` go left. Both children must keep at least
    ``min_samples_leaf`` rows. Returns ``None`` when no valid split exists.
    """
    features = list(features)
    m = X.shape[0]
    if m < 2 * min_samples_leaf or not features:
        return None
    xs, dec = _candidates(X[:, features], y, n_classes)
    pos = np.arange(1, m)[:, None]
    valid = (xs[:-1] < xs[1:]) & (pos >= min_samples_leaf) & (m - pos >= min_samples_leaf)
    if not valid.any():
        return None
    dec = np.where(valid, dec, -np.inf)
    best = dec.max()
    # first tied candidate in (feature, position) order
    hits = np.argwhere((dec.T >= best - TIE_TOL) & valid.T)
    f_local, i = hits[0]
    lo, hi = xs[i, f_local], xs[i + 1, f_local]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return features[f_local], float(thr), float(dec[i, f_local])


def _leaf(y, n_classes):
    m = y.shape[0]
    if n_classes is not None:
        return Leaf(np.bincount(y, minlength=n_classes) / m, m)
    return Leaf(float(y.mean()), m)


def _is_pure(y):
    return y.size == 0 or bool(np.all(y == y[0]))


def grow(X, y, config: TreeConfig, n_classes=None, mtry=None, rng=None, depth=0):
    """Recursively grow a tree on ``(X, y)``.

    ``y`` holds class indices when ``n_classes`` is given, targets otherwise.
    With ``mtry`` set, each node draws a random order of the features that
    are non-constant in the node and scores the first ``mtry`` of them.
    """
    m = X.shape[0]
    if (
        _is_pure(y)
        or (config.max_depth is not None and depth >= config.max_depth)
        or m < 2 * config.min_samples_leaf
    ):
        return _leaf(y, n_classes)
    varying = np.flatnonzero(X.max(axis=0) > X.min(axis=0))
    if mtry is not None and mtry < varying.size:
        varying = np.sort(rng.permutation(varying)[:mtry])
    split = find_best_split(X, y, varying, n_classes, config.min_samples_leaf)
    if split is None:
        return _leaf(y, n_classes)
    f, thr, dec = split
    go_left = X[:, f] <= thr
    left = grow(X[go_left], y[go_left], config, n_classes, mtry, rng, depth + 1)
    right = grow(X[~go_left], y[~go_left], config, n_classes, mtry, rng, depth + 1)
    return Split(f, thr, left, right, dec, m)


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ContractError("X rows must match y length")
    if X.shape[0] < 1:
        raise ContractError("cannot fit a tree on zero rows")
    return X


def fit_tree(X, y, config: TreeConfig = TreeConfig(), task=None) -> DecisionTree:
    """Fit a single CART tree.

    ``task`` defaults to ``"classify"`` for the Gini criterion and
    ``"regress"`` for variance.
    """
    X = _check_xy(X, y)
    task = task or ("classify" if config.criterion == "gini" else "regress")
    if task == "classify":
        classes = class_order(y)
        root = grow(X, encode(y, classes), config, len(classes))
        return DecisionTree(root, task, X.shape[1], config, classes)
    if config.criterion != "variance":
        config = TreeConfig(config.max_depth, config.min_samples_leaf, "variance")
    root = grow(X, np.asarray(y, dtype=float), config)
    return DecisionTree(root, task, X.shape[1], config)


def _route(node, X, idx, out):
    if isinstance(node, Leaf):
        out[idx] = node.value
        return
    go_left = X[idx, node.feature] <= node.threshold
    _route(node.left, X, idx[go_left], out)
    _route(node.right, X, idx[~go_left], out)


def leaf_values(tree: DecisionTree, X):
    """Leaf payload per row: class distributions (n x C) or means (n,)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != tree.n_features:
        raise ContractError(f"tree expects {tree.n_features} features, got {X.shape[1]}")
    if tree.task == "classify":
        out = np.zeros((X.shape[0], len(tree.classes)))
    else:
        out = np.zeros(X.shape[0])
    _route(tree.root, X, np.arange(X.shape[0]), out)
    return out


def predict_tree(tree: DecisionTree, X):
    vals = leaf_values(tree, X)
    if tree.task == "classify":
        return np.array(tree.classes, dtype=object)[np.argmax(vals, axis=1)]
    return vals


def node_to_dict(node):
    if isinstance(node, Leaf):
        v = node.value
        leaf = v.tolist() if isinstance(v, np.ndarray) else float(v)
        return {"leaf": leaf, "n": int(node.n_samples)}
    return {
        "feature": int(node.feature),
        "threshold": float(node.threshold),
        "decrease": float(node.impurity_decrease),
        "n": int(node.n_samples),
        "left": node_to_dict(node.left),
        "right": node_to_dict(node.right),
    }


def node_from_dict(d, classify):
    if "leaf" in d:
        v = np.asarray(d["leaf"], dtype=float) if classify else float(d["leaf"])
        return Leaf(v, int(d["n"]))
    return Split(
        int(d["feature"]),
        float(d["threshold"]),
        node_from_dict(d["left"], classify),
        node_from_dict(d["right"], classify),
        float(d["decrease"]),
        int(d["n"]),
    )


def depth(node):
    if isinstance(node, Leaf):
        return 0
    return 1 + max(depth(node.left), depth(node.right))


def n_leaves(node):
    if isinstance(node, Leaf):
        return 1
    return n_leaves(node.left) + n_leaves(node.right)
