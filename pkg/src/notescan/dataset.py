"""Labeled feature datasets, min-max scaling, and CSV / ARFF interchange.

CSV layout: a header of the 17 attribute names, then one row per note with 16
numbers (shortest round-trip repr, '.' decimal) and the label; ',' separator,
LF line endings. ARFF layout is WEKA's, with the class declared as
``@attribute Class {yes,no}``.
"""
from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DatasetError, ParseError
from .texfeat import FEATURE_NAMES

CLASS_NAME = "Class"
CLASS_VALUES = ("yes", "no")  # yes = genuine, no = counterfeit
RELATION = "afn_banknotes"


@dataclass(frozen=True)
class FeatureRecord:
    features: np.ndarray
    label: str

    def __post_init__(self):
        vec = np.asarray(self.features, dtype=np.float64)
        if vec.shape != (len(FEATURE_NAMES),):
            raise DatasetError(f"expected {len(FEATURE_NAMES)} features, got shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise DatasetError("features must be finite")
        if self.label not in CLASS_VALUES:
            raise DatasetError(f"unknown label {self.label!r}")
        object.__setattr__(self, "features", vec)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable ``(n, 16)`` feature matrix with its yes/no labels."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple = FEATURE_NAMES
    class_values: tuple = CLASS_VALUES
    relation: str = field(default=RELATION)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        y = np.array(self.y, dtype=object)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise DatasetError(
                f"X must have shape (n, {len(self.feature_names)}), got {X.shape}"
            )
        if y.shape != (X.shape[0],):
            raise DatasetError(f"{X.shape[0]} rows but {y.shape} labels")
        if not np.all(np.isfinite(X)):
            raise DatasetError("features must be finite")
        unknown = set(y.tolist()) - set(self.class_values)
        if unknown:
            raise DatasetError(f"unknown label(s): {sorted(map(str, unknown))}")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_values", tuple(self.class_values))

    def __len__(self):
        return self.X.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and self.class_values == other.class_values
            and np.array_equal(self.X, other.X)
            and self.y.tolist() == other.y.tolist()
        )

    __hash__ = None

    @property
    def records(self):
        return [FeatureRecord(x, label) for x, label in zip(self.X, self.y)]

    def class_counts(self):
        labels = self.y.tolist()
        return {c: labels.count(c) for c in self.class_values}

    def replace(self, X=None, y=None):
        return Dataset(
            self.X if X is None else X,
            self.y if y is None else y,
            self.feature_names,
            self.class_values,
            self.relation,
        )

    def subset(self, index):
        return self.replace(self.X[index], self.y[index])


def build_dataset(records) -> Dataset:
    records = list(records)
    if not records:
        raise DatasetError("cannot build a dataset from zero records")
    return Dataset(
        np.array([r.features for r in records]), np.array([r.label for r in records], dtype=object)
    )


# ---------------------------------------------------------------- normalization

@dataclass(frozen=True)
class NormalizationParams:
    """Per-attribute training minima and maxima."""

    minimum: tuple
    maximum: tuple
    feature_names: tuple = FEATURE_NAMES

    def __post_init__(self):
        if not (len(self.minimum) == len(self.maximum) == len(self.feature_names)):
            raise DatasetError("min/max/name lengths differ")
        if any(lo > hi for lo, hi in zip(self.minimum, self.maximum)):
            raise DatasetError("min exceeds max for some attribute")

    def to_json(self):
        return json.dumps({
            "format": "notescan-normalization",
            "version": 1,
            "feature_names": list(self.feature_names),
            "min": list(self.minimum),
            "max": list(self.maximum),
        }, indent=1) + "\n"

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
            if doc.get("format") != "notescan-normalization" or doc.get("version") != 1:
                raise DatasetError("not a version-1 normalization file")
            return cls(tuple(map(float, doc["min"])), tuple(map(float, doc["max"])),
                       tuple(doc["feature_names"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise DatasetError(f"corrupt normalization file: {exc}") from exc

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _scale(X, lo, hi):
    span = hi - lo
    out = np.zeros_like(X, dtype=np.float64)
    np.divide(X - lo, span, out=out, where=span > 0)
    return out


class MinMaxNormalizer(TransformerMixin, BaseEstimator):
    """Rescale every attribute to [0, 1] with the training min and max.

    A constant training column maps to 0. Values outside the training range
    are clamped at transform time.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def fit_transform(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.fit(X)
        return _scale(X, self.data_min_, self.data_max_)

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return np.clip(_scale(X, self.data_min_, self.data_max_), 0.0, 1.0)

    def to_params(self, feature_names=FEATURE_NAMES):
        check_is_fitted(self)
        return NormalizationParams(tuple(self.data_min_.tolist()),
                                   tuple(self.data_max_.tolist()), tuple(feature_names))

    @classmethod
    def from_params(cls, params):
        self = cls()
        self.data_min_ = np.array(params.minimum, dtype=np.float64)
        self.data_max_ = np.array(params.maximum, dtype=np.float64)
        self.n_features_in_ = len(params.minimum)
        return self


def min_max_normalize(ds: Dataset):
    """Scale a dataset with its own extremes; returns ``(scaled, params)``."""
    if len(ds) == 0:
        raise DatasetError("cannot normalize an empty dataset")
    scaler = MinMaxNormalizer()
    X = scaler.fit_transform(ds.X)
    return ds.replace(X=X), scaler.to_params(ds.feature_names)


def apply_normalization(vec, params: NormalizationParams) -> np.ndarray:
    """Scale unseen feature vectors (1-D or 2-D) with training params, clamped."""
    vec = np.asarray(vec, dtype=np.float64)
    out = MinMaxNormalizer.from_params(params).transform(np.atleast_2d(vec))
    return out[0] if vec.ndim == 1 else out


# ---------------------------------------------------------------- CSV

def _fmt(v):
    return repr(float(v))


def _parse_number(text, lineno, name):
    text = text.strip()
    if text == "?":
        raise ParseError(f"missing value for {name}", lineno)
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {text!r} for {name}", lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r} for {name}", lineno)
    return value


def write_csv(ds: Dataset, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*ds.feature_names, CLASS_NAME])
        for x, label in zip(ds.X, ds.y):
            writer.writerow([*map(_fmt, x), label])


def read_csv(path) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty file", 1)
    header = [h.strip() for h in rows[0]]
    n_attr = len(FEATURE_NAMES) + 1
    if len(header) != n_attr:
        raise ParseError(f"header has {len(header)} fields, expected {n_attr}", 1)
    X, y = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != n_attr:
            raise ParseError(f"row has {len(row)} fields, expected {n_attr}", lineno)
        X.append([_parse_number(v, lineno, n) for v, n in zip(row[:-1], header)])
        label = row[-1].strip()
        if label not in CLASS_VALUES:
            raise ParseError(f"unknown label {label!r}", lineno)
        y.append(label)
    if not X:
        raise DatasetError(f"{path}: no data rows")
    return Dataset(np.array(X), np.array(y, dtype=object), tuple(header[:-1]))


# ---------------------------------------------------------------- ARFF

def _arff_quote(name):
    if re.fullmatch(r"[A-Za-z_][\w.\-]*", name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def write_arff(ds: Dataset, path):
    lines = [f"@relation {_arff_quote(ds.relation)}", ""]
    lines += [f"@attribute {_arff_quote(n)} numeric" for n in ds.feature_names]
    lines.append(f"@attribute {CLASS_NAME} {{{','.join(ds.class_values)}}}")
    lines += ["", "@data"]
    lines += [",".join([*map(_fmt, x), label]) for x, label in zip(ds.X, ds.y)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


_TOKEN = re.compile(r"""\s*(?:'((?:[^'\\]|\\.)*)'|"((?:[^"\\]|\\.)*)"|([^\s,{}'"]+))""")


def _unquote(s):
    return re.sub(r"\\(.)", r"\1", s)


def _split_row(line, lineno):
    """Split an ARFF data row on commas, honouring single/double quotes."""
    fields, buf, quote, i = [], [], None, 0
    while i < len(line):
        ch = line[i]
        if quote:
            if ch == "\\" and i + 1 < len(line):
                buf.append(line[i + 1])
                i += 1
            elif ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            quote = ch
        elif ch == ",":
            fields.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
        i += 1
    if quote:
        raise ParseError("unterminated quote", lineno)
    fields.append("".join(buf).strip())
    return fields


def _parse_attribute(rest, lineno):
    m = _TOKEN.match(rest)
    if not m:
        raise ParseError("missing attribute name", lineno)
    name = _unquote(next(g for g in m.groups() if g is not None))
    kind = rest[m.end():].strip()
    if kind.startswith("{"):
        if not kind.endswith("}"):
            raise ParseError("unterminated nominal declaration", lineno)
        values = [_unquote(v.strip().strip("'\"")) for v in _split_row(kind[1:-1], lineno)]
        return name, tuple(values)
    if kind.lower() in ("numeric", "real", "integer"):
        return name, None
    raise ParseError(f"unsupported attribute type {kind!r}", lineno)


def read_arff(path) -> Dataset:
    """Parse a WEKA ARFF file with 16 numeric attributes and a nominal class."""
    relation = RELATION
    attrs = []
    X, y = [], []
    in_data = False
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            m = re.match(r"(@\w+)\s*(.*)$", line)
            if not m:
                raise ParseError(f"unexpected header line {line!r}", lineno)
            keyword, rest = m.group(1).lower(), m.group(2).strip()
            if keyword == "@relation":
                m = _TOKEN.match(rest)
                relation = _unquote(next(g for g in m.groups() if g is not None)) if m else rest
            elif keyword == "@attribute":
                attrs.append(_parse_attribute(rest, lineno))
            elif keyword == "@data":
                in_data = True
                _check_header(attrs, lineno)
            else:
                raise ParseError(f"unexpected header line {line!r}", lineno)
            continue
        fields = _split_row(line, lineno)
        if len(fields) != len(attrs):
            raise ParseError(f"row has {len(fields)} values, expected {len(attrs)}", lineno)
        X.append([_parse_number(v, lineno, a[0]) for v, a in zip(fields[:-1], attrs)])
        label = fields[-1]
        if label == "?":
            raise ParseError("missing class value", lineno)
        if label not in attrs[-1][1]:
            raise ParseError(f"class value {label!r} not declared in {attrs[-1][1]}", lineno)
        y.append(label)
    if not in_data:
        raise ParseError("missing @data section", len(lines) + 1)
    if not X:
        raise DatasetError(f"{path}: no data rows")
    names = tuple(a[0] for a in attrs[:-1])
    return Dataset(np.array(X), np.array(y, dtype=object), names, CLASS_VALUES, relation)


def _check_header(attrs, lineno):
    n = len(FEATURE_NAMES) + 1
    if len(attrs) != n:
        raise ParseError(f"{len(attrs)} attributes declared, expected {n}", lineno)
    if any(values is not None for _, values in attrs[:-1]):
        raise ParseError("attributes 1-16 must be numeric", lineno)
    values = attrs[-1][1]
    if values is None or set(values) != set(CLASS_VALUES):
        raise ParseError(f"class attribute must be nominal {{yes,no}}, got {values}", lineno)
