"""Classifiers: Gaussian naive Bayes, random forest and PART, plus the tree inducer."""
from .forest import RandomForest, predict_rf, train_random_forest
from .naive_bayes import GaussianNaiveBayes, predict_nb, train_naive_bayes
from .part import PART, Condition, Rule, predict_part, train_part
from .persistence import load_model, save_model
from .tree import DecisionTree, train_tree

CLASSIFIERS = {"rf": RandomForest, "nb": GaussianNaiveBayes, "part": PART}


def make_classifier(name, **params):
    """Instantiate a classifier by its short name (rf, nb, part)."""
    try:
        cls = CLASSIFIERS[name]
    except KeyError:
        raise ValueError(f"unknown classifier {name!r}; choose from {sorted(CLASSIFIERS)}") from None
    return cls(**params)


__all__ = [
    "CLASSIFIERS", "Condition", "DecisionTree", "GaussianNaiveBayes", "PART", "RandomForest",
    "Rule", "load_model", "make_classifier", "predict_nb", "predict_part", "predict_rf",
    "save_model", "train_naive_bayes", "train_part", "train_random_forest", "train_tree",
]
