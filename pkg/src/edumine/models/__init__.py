"""Learners: linear regression, CART trees, random forests, KNN, logistic
regression and a linear SVM, all written against plain numpy arrays."""

from .forest import ForestConfig, ForestModel, fit_forest, predict_forest, vote_fractions
from .knn import KnnModel, fit_knn, predict_knn
from .linear import LinearModel, fit_mlr, predict_mlr
from .logistic import (
    LogisticConfig,
    LogisticModel,
    classify_logistic,
    fit_logistic,
    loss_and_grad,
    sigmoid,
)
from .snapshot import model_from_dict, model_to_dict
from .svm import SvmConfig, SvmModel, decision_function, fit_svm, predict_svm
from .tree import (
    DecisionTree,
    Leaf,
    Split,
    TreeConfig,
    find_best_split,
    fit_tree,
    gini,
    predict_tree,
)

__all__ = [
    "DecisionTree",
    "ForestConfig",
    "ForestModel",
    "KnnModel",
    "Leaf",
    "LinearModel",
    "LogisticConfig",
    "LogisticModel",
    "Split",
    "SvmConfig",
    "SvmModel",
    "TreeConfig",
    "classify_logistic",
    "decision_function",
    "find_best_split",
    "fit_forest",
    "fit_knn",
    "fit_logistic",
    "fit_mlr",
    "fit_svm",
    "fit_tree",
    "gini",
    "loss_and_grad",
    "model_from_dict",
    "model_to_dict",
    "predict_forest",
    "predict_knn",
    "predict_mlr",
    "predict_svm",
    "predict_tree",
    "sigmoid",
    "vote_fractions",
]
