"""C4.5-style binary decision tree on numeric attributes.

Split thresholds sit at midpoints between adjacent distinct sorted values and
``x <= threshold`` goes left. Two selection criteria are supported:

``"gain"``
    maximum information gain (random-forest mode).
``"gain_ratio"``
    C4.5's rule: each attribute's cut point is chosen by gain, then among
    attributes whose gain reaches the average gain the one with the highest
    gain ratio wins (PART mode).

Ties in the selection score go to the lowest attribute index, then the lowest
threshold. A split is admissible only if each side keeps ``min_leaf`` records.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._common import encode_labels, prefer_yes_argmax

LEAF = -1
TIE_EPS = 1e-12  # scores this close count as tied (summation order noise)


def entropy(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _entropy_rows(counts, totals):
    # row-wise entropy of an (m, C) count matrix
    p = counts / totals[:, None]
    safe = np.where(p > 0, p, 1.0)
    return -(p * np.log2(safe)).sum(axis=1)


def best_cut(x, codes, n_classes, weights=None, min_leaf=2):
    """Best information-gain cut on one attribute.

    Returns ``(gain, threshold, n_left)``, or None when no admissible cut has
    positive gain. ``weights`` are per-record multiplicities.
    """
    n = len(x)
    if n < 2:
        return None
    order = np.argsort(x, kind="stable")
    xs = x[order]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)[order]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), codes[order]] = w
    left = np.cumsum(onehot, axis=0)
    total = left[-1]
    left = left[:-1]
    n_left = left.sum(axis=1)
    n_total = total.sum()
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_total - n_left >= min_leaf)
    if not valid.any():
        return None
    idx = np.flatnonzero(valid)
    lc = left[idx]
    nl = n_left[idx]
    nr = n_total - nl
    child = (nl * _entropy_rows(lc, nl) + nr * _entropy_rows(total - lc, nr)) / n_total
    gains = entropy(total) - child
    best = int(np.argmax(gains >= gains.max() - TIE_EPS))  # lowest tied threshold
    gain = float(gains[best])
    if gain <= TIE_EPS:
        return None
    i = idx[best]
    threshold = (xs[i] + xs[i + 1]) / 2.0
    if not xs[i] <= threshold < xs[i + 1]:
        threshold = xs[i]  # adjacent floats: the midpoint rounded onto the upper value
    return gain, float(threshold), float(nl[best])


def split_info(n_left, n_total):
    return entropy([n_left, n_total - n_left])


def choose_split(X, codes, n_classes, order=None, min_evaluated=None, criterion="gain",
                 weights=None, min_leaf=2):
    """Return ``(attribute, threshold)`` of the best split, or None.

    Attributes are visited in ``order`` (default: index order). Once
    ``min_evaluated`` attributes have been scored, visiting stops as soon as one
    admissible positive-gain cut is known. By default every attribute is scored.
    """
    order = range(X.shape[1]) if order is None else order
    need = X.shape[1] if min_evaluated is None else min_evaluated
    results = []
    for seen, a in enumerate(order, start=1):
        cut = best_cut(X[:, a], codes, n_classes, weights, min_leaf)
        if cut is not None:
            results.append((int(a), *cut))
        if seen >= need and results:
            break
    if not results:
        return None
    if criterion == "gain":
        top = max(r[1] for r in results)
        a, _, thr, _ = min((r for r in results if r[1] >= top - TIE_EPS),
                           key=lambda r: (r[0], r[2]))
        return a, thr
    if criterion != "gain_ratio":
        raise ValueError(f"unknown criterion {criterion!r}")
    n_total = float(len(codes)) if weights is None else float(np.sum(weights))
    avg = np.mean([r[1] for r in results])
    scored = []
    for a, gain, thr, nl in results:
        if gain < avg - TIE_EPS:
            continue
        si = split_info(nl, n_total)
        scored.append((gain / si if si > 0 else 0.0, a, thr))
    top = max(r[0] for r in scored)
    _, a, thr = min((r for r in scored if r[0] >= top - TIE_EPS), key=lambda r: (r[1], r[2]))
    return a, thr


class TreeStructure:
    """Flat node arrays, in the spirit of sklearn's ``tree_`` attribute."""

    def __init__(self, n_classes):
        self.n_classes = n_classes
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def add_leaf(self, counts):
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(np.asarray(counts, dtype=np.float64))
        return len(self.feature) - 1

    def freeze(self):
        self.feature = np.asarray(self.feature, dtype=np.intp)
        self.threshold = np.asarray(self.threshold, dtype=np.float64)
        self.left = np.asarray(self.left, dtype=np.intp)
        self.right = np.asarray(self.right, dtype=np.intp)
        self.value = (np.vstack(self.value) if len(self.value)
                      else np.zeros((0, self.n_classes)))
        return self

    @property
    def node_count(self):
        return len(self.feature)

    def apply(self, X):
        """Leaf index reached by every row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = self.feature[node] != LEAF
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active[rows] = self.feature[node[rows]] != LEAF
        return node

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d, n_classes):
        t = cls(n_classes)
        t.feature, t.threshold = list(d["feature"]), list(d["threshold"])
        t.left, t.right = list(d["left"]), list(d["right"])
        t.value = [np.asarray(v, dtype=np.float64) for v in d["value"]]
        sizes = {len(t.feature), len(t.threshold), len(t.left), len(t.right), len(t.value)}
        if len(sizes) != 1 or not t.feature:
            raise ValueError("inconsistent node arrays")
        t.freeze()
        internal = t.feature != LEAF
        n = t.node_count
        if t.value.shape[1] != n_classes or np.any(
            internal & ((t.left < 0) | (t.left >= n) | (t.right < 0) | (t.right >= n))
        ):
            raise ValueError("invalid node links")
        return t


def grow_tree(X, codes, n_classes, *, criterion="gain", min_leaf=2, weights=None,
              max_features=None, rng=None):
    """Grow an unpruned tree.

    With ``rng`` given, every node visits the attributes in a fresh random
    order and scores at least ``max_features`` of them (continuing past that
    until some positive-gain cut turns up). Growth stops at pure nodes, nodes
    too small to split, and nodes without an admissible positive-gain split.
    """
    tree = TreeStructure(n_classes)
    w_all = np.ones(len(codes)) if weights is None else np.asarray(weights, dtype=np.float64)
    d = X.shape[1]
    stack = [(np.arange(len(codes)), None, None)]
    while stack:
        rows, parent, side = stack.pop()
        counts = np.bincount(codes[rows], weights=w_all[rows], minlength=n_classes)
        node = tree.add_leaf(counts)
        if parent is not None:
            (tree.left if side == "L" else tree.right)[parent] = node
        if np.count_nonzero(counts) <= 1 or counts.sum() < 2 * min_leaf:
            continue
        Xr = X[rows]
        if rng is None:
            order, need = None, None
        else:
            order, need = rng.permutation(d), max_features
        split = choose_split(Xr, codes[rows], n_classes, order, need, criterion,
                             None if weights is None else w_all[rows], min_leaf)
        if split is None:
            continue
        a, thr = split
        go_left = Xr[:, a] <= thr
        tree.feature[node] = a
        tree.threshold[node] = thr
        # right pushed first so the left subtree is numbered before it
        stack.append((rows[~go_left], node, "R"))
        stack.append((rows[go_left], node, "L"))
    return tree.freeze()


class DecisionTree(ClassifierMixin, BaseEstimator):
    """Single unpruned C4.5-style tree.

    Parameters
    ----------
    criterion : {"gain", "gain_ratio"}, default="gain"
    min_leaf : int, default=2
        Minimum records on each side of a split.
    """

    def __init__(self, criterion="gain", min_leaf=2):
        self.criterion = criterion
        self.min_leaf = min_leaf

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, codes = encode_labels(y)
        self.n_features_in_ = X.shape[1]
        self.tree_ = grow_tree(X, codes, len(self.classes_), criterion=self.criterion,
                               min_leaf=self.min_leaf)
        return self

    def predict_proba(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        counts = self.tree_.value[self.tree_.apply(X)]
        return counts / counts.sum(axis=1, keepdims=True)

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[prefer_yes_argmax(proba, self.classes_)]


def train_tree(ds, criterion="gain", min_leaf=2) -> DecisionTree:
    return DecisionTree(criterion, min_leaf).fit(ds.X, ds.y)
