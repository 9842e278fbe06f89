"""Versioned JSON model files.

Layout::

    {"format": "notescan-model", "version": 1, "kind": "nb" | "rf" | "part",
     "classes": [...], "n_features": 16, "feature_names": [...],
     "params": {...}, "state": {...}}

Floats are written with Python's shortest round-trip repr, so a reloaded
model predicts bit-identically. Keys are sorted so retraining with the same
seed reproduces the file byte for byte.
"""
import json

import numpy as np

from ..exceptions import ModelFormatError
from .forest import RandomForest
from .naive_bayes import GaussianNaiveBayes
from .part import PART, Condition, Rule
from .tree import TreeStructure

FORMAT = "notescan-model"
VERSION = 1
KINDS = {"nb": GaussianNaiveBayes, "rf": RandomForest, "part": PART}


def model_kind(model):
    for kind, cls in KINDS.items():
        if isinstance(model, cls):
            return kind
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _state(model, kind):
    if kind == "nb":
        return {
            "class_prior": model.class_prior_.tolist(),
            "class_count": model.class_count_.tolist(),
            "theta": model.theta_.tolist(),
            "var": model.var_.tolist(),
        }
    if kind == "rf":
        return {"max_features": model.max_features_,
                "trees": [t.to_dict() for t in model.estimators_]}
    return {"rules": [
        {
            "conditions": [[c.attribute, c.op, c.threshold] for c in r.conditions],
            "label": r.label,
            "coverage": r.coverage,
            "accuracy": r.accuracy,
        }
        for r in model.rules_
    ]}


def dumps(model, feature_names=None):
    kind = model_kind(model)
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "classes": [str(c) for c in model.classes_],
        "n_features": int(model.n_features_in_),
        "feature_names": list(feature_names) if feature_names is not None else None,
        "params": model.get_params(),
        "state": _state(model, kind),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _restore(doc):
    kind = doc["kind"]
    if kind not in KINDS:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    model = KINDS[kind](**doc["params"])
    model.classes_ = np.array(doc["classes"], dtype=object)
    model.n_features_in_ = int(doc["n_features"])
    n_classes = len(model.classes_)
    state = doc["state"]
    if kind == "nb":
        model.class_prior_ = np.array(state["class_prior"], dtype=np.float64)
        model.class_count_ = np.array(state["class_count"], dtype=np.float64)
        model.theta_ = np.array(state["theta"], dtype=np.float64)
        model.var_ = np.array(state["var"], dtype=np.float64)
        if model.theta_.shape != (n_classes, model.n_features_in_) or \
                model.var_.shape != model.theta_.shape:
            raise ModelFormatError("naive Bayes tables have the wrong shape")
    elif kind == "rf":
        model.max_features_ = int(state["max_features"])
        model.estimators_ = [TreeStructure.from_dict(t, n_classes) for t in state["trees"]]
        if not model.estimators_:
            raise ModelFormatError("forest has no trees")
    else:
        model.rules_ = [
            Rule(tuple(Condition(int(a), op, float(t)) for a, op, t in r["conditions"]),
                 r["label"], int(r["coverage"]), r["accuracy"])
            for r in state["rules"]
        ]
        if not model.rules_ or not model.rules_[-1].is_default:
            raise ModelFormatError("rule list must end with a default rule")
        model._n_classes = n_classes
    return model


def loads(text):
    """Inverse of :func:`dumps`; returns ``(model, feature_names)``."""
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError("not a notescan model file")
    if doc.get("version") != VERSION:
        raise ModelFormatError(
            f"unsupported model version {doc.get('version')!r}; expected {VERSION}"
        )
    try:
        return _restore(doc), doc.get("feature_names")
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model file: {exc!r}") from exc


def save_model(model, path, feature_names=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(model, feature_names))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())[0]
