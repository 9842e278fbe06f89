"""PART: decision lists from repeatedly built partial C4.5 trees.

Each round grows a partial tree on the records not yet covered. A node's
children are expanded in order of increasing entropy and expansion of the
siblings stops at the first child that does not end up as a leaf. A node
whose expanded children are all leaves is considered for subtree replacement
with C4.5's pessimistic error estimate. The largest explored leaf becomes the
next rule and the records it covers are removed. A round whose partial tree is
a single leaf yields the final, condition-free default rule.
"""
from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._common import encode_labels, prefer_yes_argmax
from .tree import choose_split, entropy


@dataclass(frozen=True)
class Condition:
    attribute: int
    op: str  # "<=" or ">"
    threshold: float

    def holds(self, X):
        col = X[:, self.attribute]
        return col <= self.threshold if self.op == "<=" else col > self.threshold


@dataclass(frozen=True)
class Rule:
    conditions: tuple
    label: str
    coverage: int
    accuracy: float | None

    @property
    def is_default(self):
        return not self.conditions

    def matches(self, X):
        mask = np.ones(X.shape[0], dtype=bool)
        for cond in self.conditions:
            mask &= cond.holds(X)
        return mask

    def describe(self, feature_names=None):
        def name(a):
            return feature_names[a] if feature_names is not None else f"x[{a}]"
        body = " AND ".join(f"{name(c.attribute)} {c.op} {c.threshold:.6g}"
                            for c in self.conditions)
        return f"{body or 'otherwise'} -> {self.label} ({self.coverage})"


def added_errors(n, e, confidence):
    """Upper-confidence extra errors for ``e`` errors observed in ``n`` records."""
    if confidence > 0.5:
        raise ValueError("confidence must be <= 0.5")
    if n <= 0:
        return 0.0
    if e < 1:
        base = n * (1.0 - confidence ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (added_errors(n, 1.0, confidence) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1.0 - confidence)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * np.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (
        1 + z * z / n
    )
    return r * n - e


def leaf_error_estimate(counts, confidence):
    n = float(np.sum(counts))
    e = n - float(np.max(counts))
    return e + added_errors(n, e, confidence)


class _Node:
    __slots__ = ("counts", "attribute", "threshold", "children")

    def __init__(self, counts):
        self.counts = counts
        self.attribute = None
        self.threshold = None
        self.children = [None, None]  # None = unexplored

    @property
    def is_leaf(self):
        return self.attribute is None


class PART(ClassifierMixin, BaseEstimator):
    """Rule learner producing an ordered decision list.

    Parameters
    ----------
    confidence : float, default=0.25
        Pruning confidence factor.
    min_leaf : int, default=2
        Minimum records on each side of a split.
    """

    def __init__(self, confidence=0.25, min_leaf=2):
        self.confidence = confidence
        self.min_leaf = min_leaf

    def _expand(self, X, codes, rows):
        counts = np.bincount(codes[rows], minlength=self._n_classes).astype(np.float64)
        node = _Node(counts)
        if np.count_nonzero(counts) <= 1 or len(rows) < 2 * self.min_leaf:
            return node
        split = choose_split(X[rows], codes[rows], self._n_classes,
                             criterion="gain_ratio", min_leaf=self.min_leaf)
        if split is None:
            return node
        node.attribute, node.threshold = split
        go_left = X[rows, node.attribute] <= node.threshold
        subsets = [rows[go_left], rows[~go_left]]
        ent = [entropy(np.bincount(codes[s], minlength=self._n_classes)) for s in subsets]
        for side in sorted((0, 1), key=lambda s: (ent[s], s)):
            child = self._expand(X, codes, subsets[side])
            node.children[side] = child
            if not child.is_leaf:
                return node
        tree_err = sum(leaf_error_estimate(c.counts, self.confidence) for c in node.children)
        if leaf_error_estimate(counts, self.confidence) <= tree_err + 0.1:
            node.attribute = node.threshold = None
            node.children = [None, None]
        return node

    def _largest_leaf(self, root):
        best, best_path = None, None
        stack = [(root, ())]
        while stack:
            node, path = stack.pop()
            if node.is_leaf:
                if best is None or node.counts.sum() > best.counts.sum():
                    best, best_path = node, path
                continue
            for side in (1, 0):  # left visited first
                child = node.children[side]
                if child is not None:
                    op = "<=" if side == 0 else ">"
                    stack.append((child, path + (Condition(node.attribute, op, node.threshold),)))
        return best, best_path

    def _label_of(self, counts):
        return self.classes_[prefer_yes_argmax(counts, self.classes_)[0]]

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, codes = encode_labels(y)
        self._n_classes = len(self.classes_)
        self.n_features_in_ = X.shape[1]
        rules = []
        remaining = np.arange(X.shape[0])
        while remaining.size:
            root = self._expand(X, codes, remaining)
            leaf, path = self._largest_leaf(root)
            label = self._label_of(leaf.counts)
            if not path:
                acc = float(np.mean(self.classes_[codes[remaining]] == label))
                rules.append(Rule((), label, int(remaining.size), acc))
                remaining = remaining[:0]
                break
            rule = Rule(path, label, 0, None)
            covered = rule.matches(X[remaining])
            hits = remaining[covered]
            acc = float(np.mean(self.classes_[codes[hits]] == label))
            rules.append(Rule(path, label, int(hits.size), acc))
            remaining = remaining[~covered]
        if not rules[-1].is_default:
            counts = np.bincount(codes, minlength=self._n_classes)
            rules.append(Rule((), self._label_of(counts), 0, None))
        self.rules_ = rules
        return self

    def matched_rule(self, X):
        """Index of the first rule firing for each row."""
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        out = np.full(X.shape[0], -1, dtype=np.intp)
        for i, rule in enumerate(self.rules_):
            free = out < 0
            if not free.any():
                break
            hit = free.copy()
            hit[free] = rule.matches(X[free])
            out[hit] = i
        return out

    def predict(self, X):
        labels = np.array([r.label for r in self.rules_], dtype=object)
        return labels[self.matched_rule(X)]

    def predict_proba(self, X):
        pred = self.predict(X)
        return (pred[:, None] == self.classes_[None, :]).astype(np.float64)


def train_part(ds, confidence=0.25, min_leaf=2):
    return PART(confidence, min_leaf).fit(ds.X, ds.y)


def predict_part(model, vec):
    """``(class, index of the rule that fired)``."""
    idx = int(model.matched_rule(np.atleast_2d(vec))[0])
    return model.rules_[idx].label, idx
