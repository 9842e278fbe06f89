"""SMOTE oversampling and the iterated multi-level schedule.

Randomness: one ``numpy`` PCG64 substream per parent record, spawned from
``SeedSequence(seed)``. Parent ``i`` always draws from substream ``i`` so the
output does not depend on the order in which parents are processed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from .dataset import Dataset
from .exceptions import DatasetError


@dataclass(frozen=True)
class SmoteConfig:
    percent: int = 100
    k: int = 5
    seed: int = 0
    target_class: str | None = None  # None: current minority class

    def __post_init__(self):
        if self.percent < 100 or self.percent % 100:
            raise ValueError(f"percent must be a positive multiple of 100, got {self.percent}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def k_nearest_neighbors(query, pool, k: int, exclude: int | None = None) -> np.ndarray:
    """Indices of the ``k`` pool points closest to ``query`` (Euclidean).

    ``exclude`` drops one pool index, normally the query itself. Equal
    distances resolve to the lower index.
    """
    pool = np.atleast_2d(np.asarray(pool, dtype=np.float64))
    available = pool.shape[0] - (exclude is not None)
    if k > available:
        raise ValueError(f"need {k} neighbours but the pool has only {available} candidates")
    d2 = ((pool - np.asarray(query, dtype=np.float64)) ** 2).sum(axis=1)
    order = np.argsort(d2, kind="stable")
    if exclude is not None:
        order = order[order != exclude]
    return order[:k]


def minority_class(y, class_values):
    """Least frequent present class; ties go to the earlier declared value."""
    labels = list(np.asarray(y, dtype=object))
    present = [c for c in class_values if c in labels]
    if not present:
        raise DatasetError("dataset has no labels")
    return min(present, key=lambda c: (labels.count(c), class_values.index(c)))


class Smote(BaseEstimator):
    """Synthetic minority oversampling.

    Every target-class record spawns ``percent / 100`` synthetic records, each
    ``x + u * (n - x)`` for a neighbour ``n`` picked uniformly among its ``k``
    nearest same-class records and one ``u ~ U[0, 1)`` per synthetic record.
    With ``k`` >= the class size, ``k`` is reduced to ``size - 1``.

    Parameters
    ----------
    percent : int, default=100
        Oversampling amount, a positive multiple of 100.
    k_neighbors : int, default=5
    target_class : str or None
        Class to oversample; ``None`` picks the minority class.
    random_state : int, default=0
    """

    def __init__(self, percent=100, k_neighbors=5, target_class=None, random_state=0):
        self.percent = percent
        self.k_neighbors = k_neighbors
        self.target_class = target_class
        self.random_state = random_state

    def fit_resample(self, X, y, class_values=None):
        SmoteConfig(self.percent, self.k_neighbors)  # validates
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=object)
        if class_values is None:
            class_values = tuple(dict.fromkeys(y.tolist()))
        target = self.target_class
        if target is None:
            target = minority_class(y, tuple(class_values))
        parents = np.flatnonzero(y == target)
        if parents.size == 0:
            raise DatasetError(f"target class {target!r} is absent")
        if parents.size < 2:
            raise DatasetError(f"class {target!r} has {parents.size} record; SMOTE needs 2")
        k = min(self.k_neighbors, parents.size - 1)
        per_parent = self.percent // 100
        pool = X[parents]

        self.k_ = k
        self.target_class_ = target
        self.neighbors_ = np.empty((parents.size, per_parent), dtype=np.intp)
        self.coefficients_ = np.empty((parents.size, per_parent))

        streams = np.random.SeedSequence(self.random_state).spawn(parents.size)
        synth = np.empty((parents.size * per_parent, X.shape[1]))
        for i, stream in enumerate(streams):
            rng = np.random.Generator(np.random.PCG64(stream))
            nbrs = k_nearest_neighbors(pool[i], pool, k, exclude=i)
            for s in range(per_parent):
                n = nbrs[rng.integers(k)]
                u = rng.random()
                synth[i * per_parent + s] = pool[i] + u * (pool[n] - pool[i])
                self.neighbors_[i, s] = parents[n]
                self.coefficients_[i, s] = u
        self.parents_ = parents
        X_out = np.vstack([X, synth])
        y_out = np.concatenate([y, np.full(synth.shape[0], target, dtype=object)])
        return X_out, y_out


def smote(ds: Dataset, cfg: SmoteConfig) -> Dataset:
    sampler = Smote(cfg.percent, cfg.k, cfg.target_class, cfg.seed)
    X, y = sampler.fit_resample(ds.X, ds.y, ds.class_values)
    return ds.replace(X=X, y=y)


def smote_schedule(ds: Dataset, levels, recompute_minority: bool = True):
    """Apply SMOTE level after level, each on the previous output.

    With ``recompute_minority`` the target class is re-identified before every
    level; otherwise the first level's target is kept. Returns the dataset
    after each level.
    """
    levels = list(levels)
    if not levels:
        raise ValueError("at least one SMOTE level is required")
    out, current, fixed = [], ds, None
    for cfg in levels:
        if cfg.target_class is None and not recompute_minority:
            if fixed is None:
                fixed = minority_class(current.y, current.class_values)
            cfg = SmoteConfig(cfg.percent, cfg.k, cfg.seed, fixed)
        current = smote(current, cfg)
        out.append(current)
    return out


def schedule_configs(percents, k: int = 5, seed: int = 0):
    """One SmoteConfig per level with independent, reproducible seeds."""
    seeds = np.random.SeedSequence(seed).generate_state(len(percents))
    return [SmoteConfig(int(p), k, int(s)) for p, s in zip(percents, seeds)]
