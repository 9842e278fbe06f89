"""Random forest of unpruned information-gain trees."""
import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._common import encode_labels, prefer_yes_argmax
from .tree import grow_tree


def default_max_features(n_features):
    return int(math.floor(math.log2(n_features))) + 1


class RandomForest(ClassifierMixin, BaseEstimator):
    """Bagged random trees with majority voting.

    Each tree owns an RNG substream spawned from ``SeedSequence(random_state)``
    and uses it for its bootstrap sample and its per-node attribute orders, so
    the forest is identical however the trees are scheduled.

    Parameters
    ----------
    n_estimators : int, default=100
    max_features : int or None, default=None
        Attributes scored per node; None means ``floor(log2(d)) + 1``.
    bootstrap : bool, default=True
    min_leaf : int, default=2
    random_state : int, default=0
    """

    def __init__(self, n_estimators=100, max_features=None, bootstrap=True, min_leaf=2,
                 random_state=0):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.min_leaf = min_leaf
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        if X.shape[0] < 2:
            raise ValueError("a random forest needs at least 2 training records")
        d = X.shape[1]
        k = default_max_features(d) if self.max_features is None else self.max_features
        if not 1 <= k <= d:
            raise ValueError(f"max_features must be in [1, {d}], got {k}")
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        self.classes_, codes = encode_labels(y)
        n_classes = len(self.classes_)
        self.max_features_ = k
        self.n_features_in_ = d
        self.estimators_ = []
        n = X.shape[0]
        for stream in np.random.SeedSequence(self.random_state).spawn(self.n_estimators):
            rng = np.random.Generator(np.random.PCG64(stream))
            weights = None
            if self.bootstrap:
                weights = np.bincount(rng.integers(n, size=n), minlength=n).astype(np.float64)
            keep = slice(None) if weights is None else weights > 0
            self.estimators_.append(grow_tree(
                X[keep], codes[keep], n_classes, criterion="gain", min_leaf=self.min_leaf,
                weights=None if weights is None else weights[keep], max_features=k, rng=rng,
            ))
        return self

    def tree_votes(self, X):
        """``(n_samples, n_trees)`` class codes, one vote per tree."""
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        votes = np.empty((X.shape[0], len(self.estimators_)), dtype=np.intp)
        for t, tree in enumerate(self.estimators_):
            votes[:, t] = prefer_yes_argmax(tree.value[tree.apply(X)], self.classes_)
        return votes

    def _vote_counts(self, X):
        votes = self.tree_votes(X)
        return np.stack([(votes == c).sum(axis=1) for c in range(len(self.classes_))], axis=1)

    def predict_proba(self, X):
        return self._vote_counts(X) / len(self.estimators_)

    def predict(self, X):
        return self.classes_[prefer_yes_argmax(self._vote_counts(X), self.classes_)]


def train_random_forest(ds, n_trees=100, max_features=None, seed=0, bootstrap=True,
                        min_leaf=2):
    return RandomForest(n_trees, max_features, bootstrap, min_leaf, seed).fit(ds.X, ds.y)


def predict_rf(model, vec):
    """``(class, fraction of trees voting for it)``."""
    x = np.atleast_2d(vec)
    label = model.predict(x)[0]
    frac = model.predict_proba(x)[0]
    return label, float(frac[list(model.classes_).index(label)])
