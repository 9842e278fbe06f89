"""Gaussian naive Bayes with a variance floor."""
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._common import encode_labels, prefer_yes_argmax


class GaussianNaiveBayes(ClassifierMixin, BaseEstimator):
    """Naive Bayes with one normal density per class and attribute.

    Variances are unbiased sample variances, floored at ``var_floor`` (a class
    with a single record, or a constant attribute, gets exactly the floor).

    Parameters
    ----------
    var_floor : float, default=1e-9
    """

    def __init__(self, var_floor=1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, codes = encode_labels(y)
        if len(self.classes_) < 2:
            raise ValueError("naive Bayes needs at least two classes in the training data")
        n_classes, d = len(self.classes_), X.shape[1]
        self.class_count_ = np.bincount(codes, minlength=n_classes).astype(np.float64)
        self.class_prior_ = self.class_count_ / self.class_count_.sum()
        self.theta_ = np.empty((n_classes, d))
        self.var_ = np.empty((n_classes, d))
        for c in range(n_classes):
            Xc = X[codes == c]
            self.theta_[c] = Xc.mean(axis=0)
            if len(Xc) > 1:
                var = Xc.var(axis=0, ddof=1)
            else:
                var = np.zeros(d)
            self.var_[c] = np.maximum(var, self.var_floor)
        self.n_features_in_ = d
        return self

    def joint_log_likelihood(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        diff = X[:, None, :] - self.theta_[None, :, :]
        log_density = -0.5 * (np.log(2.0 * np.pi * self.var_) + diff ** 2 / self.var_)
        return np.log(self.class_prior_) + log_density.sum(axis=2)

    def predict_proba(self, X):
        jll = self.joint_log_likelihood(X)
        jll = jll - jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X):
        jll = self.joint_log_likelihood(X)
        return self.classes_[prefer_yes_argmax(jll, self.classes_)]


def train_naive_bayes(ds, var_floor=1e-9):
    return GaussianNaiveBayes(var_floor).fit(ds.X, ds.y)


def predict_nb(model, vec):
    """``(class, posterior of that class)`` for one feature vector."""
    proba = model.predict_proba(np.atleast_2d(vec))[0]
    label = model.predict(np.atleast_2d(vec))[0]
    return label, float(proba[list(model.classes_).index(label)])
