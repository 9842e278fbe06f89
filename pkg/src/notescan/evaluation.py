"""Stratified k-fold cross-validation and per-class / weighted metrics.

Predictions from all held-out folds are pooled into one confusion matrix
before any metric is computed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .dataset import CLASS_VALUES, Dataset
from .resample import smote_schedule

LEAKAGE_WARNING = (
    "SMOTE was applied to the whole dataset before cross-validation; synthetic "
    "records built from held-out neighbours leak into training folds, so these "
    "scores are optimistic. Use strict mode to resample inside training folds only."
)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def split(self):
        for fold in range(self.k):
            test = self.assignments == fold
            yield np.flatnonzero(~test), np.flatnonzero(test)


def stratified_folds(y, k=10, seed=0) -> FoldPlan:
    """Shuffle each class with a seeded RNG and deal records round-robin.

    Classes are dealt one after another, in order of first appearance, with
    the dealing position carried over, so both the per-class and the total
    fold sizes differ by at most one. If the smallest class has fewer than
    ``k`` records, ``k`` is reduced to that size with a warning.
    """
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    y = np.asarray(y, dtype=object)
    classes = list(dict.fromkeys(y.tolist()))
    smallest = min(int(np.sum(y == c)) for c in classes)
    if smallest < k:
        if smallest < 2:
            raise ValueError(f"a class has only {smallest} record(s); cannot build 2 folds")
        warnings.warn(f"k reduced from {k} to {smallest} (smallest class size)", stacklevel=2)
        k = smallest
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(y), dtype=np.intp)
    pos = 0
    for c in classes:
        members = rng.permutation(np.flatnonzero(y == c))
        assignments[members] = (pos + np.arange(members.size)) % k
        pos = (pos + members.size) % k
    return FoldPlan(k, assignments, seed)


class StratifiedFolds:
    """sklearn-compatible splitter wrapping :func:`stratified_folds`."""

    def __init__(self, n_splits=10, seed=0):
        self.n_splits = n_splits
        self.seed = seed

    def split(self, X, y, groups=None):
        yield from stratified_folds(y, self.n_splits, self.seed).split()

    def get_n_splits(self, X=None, y=None, groups=None):
        return self.n_splits


@dataclass
class ConfusionMatrix:
    labels: tuple
    counts: np.ndarray  # counts[actual, predicted]

    @classmethod
    def from_predictions(cls, y_true, y_pred, labels=CLASS_VALUES):
        index = {c: i for i, c in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
        for t, p in zip(y_true, y_pred):
            counts[index[t], index[p]] += 1
        return cls(tuple(labels), counts)

    @property
    def total(self):
        return int(self.counts.sum())


@dataclass
class ClassMetrics:
    tp_rate: float
    precision: float
    recall: float
    f_measure: float
    support: int
    precision_undefined: bool = False


@dataclass
class EvalReport:
    classifier: str
    smote_level: str
    accuracy: float
    per_class: dict
    weighted: ClassMetrics
    confusion: ConfusionMatrix
    strict: bool = False
    warnings: list = field(default_factory=list)

    def summary_row(self):
        w = self.weighted
        return {
            "accuracy": self.accuracy,
            "tp_rate": w.tp_rate,
            "precision": w.precision,
            "recall": w.recall,
            "f_measure": w.f_measure,
        }


def metrics(cm: ConfusionMatrix):
    """``(accuracy, per_class, weighted)`` for a confusion matrix.

    Precision is 0 (and flagged) for a class that was never predicted;
    F-measure is 0 when precision + recall is 0. Weighted figures use class
    support (row totals) as weights.
    """
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty confusion matrix")
    per_class = {}
    for i, label in enumerate(cm.labels):
        tp = counts[i, i]
        support = counts[i].sum()
        predicted = counts[:, i].sum()
        recall = tp / support if support > 0 else 0.0
        precision = tp / predicted if predicted > 0 else 0.0
        f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[label] = ClassMetrics(recall, precision, recall, f, int(support),
                                        precision_undefined=predicted == 0)
    weights = np.array([m.support for m in per_class.values()], dtype=np.float64) / total

    def wavg(attr):
        return float(sum(w * getattr(m, attr) for w, m in zip(weights, per_class.values())))

    weighted = ClassMetrics(wavg("tp_rate"), wavg("precision"), wavg("recall"),
                            wavg("f_measure"), int(total),
                            any(m.precision_undefined for m in per_class.values()))
    accuracy = float(np.trace(counts) / total)
    return accuracy, per_class, weighted


def cross_validate(ds: Dataset, estimator, k=10, seed=0, *, classifier_name=None,
                   smote_level="none", strict_smote=None, presmoted=False):
    """Pooled stratified k-fold evaluation of a fresh clone of ``estimator``.

    ``strict_smote`` is an optional list of SmoteConfig applied to each
    training fold only. ``presmoted`` marks a dataset that was resampled before
    the split and attaches the leakage warning to the report.
    """
    plan = stratified_folds(ds.y, k, seed)
    y_pred = np.empty(len(ds), dtype=object)
    for train, test in plan.split():
        train_ds = ds.subset(train)
        if strict_smote:
            train_ds = smote_schedule(train_ds, strict_smote)[-1]
        model = clone(estimator).fit(train_ds.X, train_ds.y)
        y_pred[test] = model.predict(ds.X[test])
    cm = ConfusionMatrix.from_predictions(ds.y, y_pred, ds.class_values)
    accuracy, per_class, weighted = metrics(cm)
    notes = [LEAKAGE_WARNING] if presmoted and not strict_smote else []
    return EvalReport(
        classifier=classifier_name or type(estimator).__name__,
        smote_level=smote_level,
        accuracy=accuracy,
        per_class=per_class,
        weighted=weighted,
        confusion=cm,
        strict=bool(strict_smote),
        warnings=notes,
    )


METRIC_COLUMNS = ("tp_rate", "precision", "recall", "f_measure")


def render_report_tables(reports):
    """Tab-separated tables: accuracy (levels x classifiers), then one metric
    table per classifier (levels x TP rate / precision / recall / F-measure)."""
    levels = list(dict.fromkeys(r.smote_level for r in reports))
    classifiers = list(dict.fromkeys(r.classifier for r in reports))
    cell = {(r.smote_level, r.classifier): r for r in reports}
    strict = any(r.strict for r in reports)
    lines = [f"# mode\t{'strict' if strict else 'presmote'}", "# table accuracy",
             "\t".join(["smote", *classifiers])]
    for level in levels:
        lines.append("\t".join([level, *(
            f"{cell[level, c].accuracy:.6f}" if (level, c) in cell else "" for c in classifiers
        )]))
    for c in classifiers:
        lines += ["", f"# table {c}", "\t".join(["smote", *METRIC_COLUMNS])]
        for level in levels:
            if (level, c) in cell:
                row = cell[level, c].summary_row()
                lines.append("\t".join([level, *(f"{row[m]:.6f}" for m in METRIC_COLUMNS)]))
    return "\n".join(lines) + "\n"


def format_accuracy_table(reports):
    """Human-readable percentage table, one row per SMOTE level."""
    levels = list(dict.fromkeys(r.smote_level for r in reports))
    classifiers = list(dict.fromkeys(r.classifier for r in reports))
    cell = {(r.smote_level, r.classifier): r.accuracy for r in reports}
    width = max(8, *(len(c) + 2 for c in classifiers))
    head = f"{'SMOTE':<8}" + "".join(f"{c.upper():>{width}}" for c in classifiers)
    rows = [head]
    for level in levels:
        rows.append(f"{level:<8}" + "".join(
            f"{100 * cell[level, c]:>{width - 1}.2f}%" if (level, c) in cell else " " * width
            for c in classifiers
        ))
    return "\n".join(rows)
