"""
The learners up close
=====================

A tree on two features, the forest that reduces to it, and a linear SVM.
"""

import numpy as np

from edumine.models import (
    ForestConfig,
    SvmConfig,
    decision_function,
    fit_forest,
    fit_svm,
    fit_tree,
    predict_forest,
    predict_tree,
)
from edumine.models.tree import depth, n_leaves

rng = np.random.default_rng(0)
X = rng.normal(size=(120, 2))
y = np.where(X[:, 0] + 0.5 * X[:, 1] > 0.2, "good", "bad")

tree = fit_tree(X, y)
print("tree depth", depth(tree.root), "leaves", n_leaves(tree.root))
print("root split: feature", tree.root.feature, "at", round(tree.root.threshold, 4))

# one tree, every feature, no bootstrap: the forest is the tree
single = fit_forest(X, y, ForestConfig(n_trees=1, mtry=2, bootstrap=False))
grid = rng.normal(size=(500, 2))
print("forest == tree:", bool(np.all(predict_forest(single, grid) == predict_tree(tree, grid))))

svm = fit_svm(X, y, SvmConfig(C=10.0, epochs=200))
print("svm weights", svm.weights.round(3), "bias", round(svm.bias, 3))
print("training accuracy", np.mean((decision_function(svm, X) >= 0) == (y == "good")))
