"""End-to-end orchestration shared by the CLI and programmatic callers."""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import CLASS_VALUES, FeatureRecord, build_dataset, min_max_normalize
from .evaluation import cross_validate
from .exceptions import DatasetError, NotescanError
from .imaging import preprocess
from .learn import make_classifier
from .resample import schedule_configs, smote_schedule
from .texfeat import feature_vector

CLASSIFIER_ORDER = ("rf", "nb", "part")


def read_manifest(path):
    """``[(filename, label), ...]`` from a two-column CSV (header optional)."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    if rows and [f.strip().lower() for f in rows[0]] == ["filename", "label"]:
        rows = rows[1:]
    out = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise DatasetError(f"{path}: manifest row {lineno} needs filename,label")
        name, label = row[0].strip(), row[1].strip()
        if label not in CLASS_VALUES:
            raise DatasetError(f"{path}: unknown label {label!r} for {name}")
        out.append((name, label))
    if not out:
        raise DatasetError(f"{path}: manifest lists no images")
    return out


def image_features(path, cfg):
    rois = preprocess(path, cfg.roi_spec, cfg.resize_target, cfg.wiener_window)
    return feature_vector(rois, cfg.glcm_levels, cfg.glcm_symmetric)


def _safe_features(args):
    path, cfg = args
    try:
        return image_features(path, cfg), None
    except (NotescanError, OSError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


@dataclass
class ExtractResult:
    dataset: object
    names: list
    failures: list = field(default_factory=list)  # (filename, message)


def extract_dataset(images_dir, manifest_path, cfg) -> ExtractResult:
    """Features for every manifest entry, ordered by filename.

    Failing images are collected, not raised; a DatasetError is raised only
    when nothing could be extracted.
    """
    if not os.path.isdir(images_dir):
        raise DatasetError(f"image directory {images_dir} does not exist")
    if not os.path.isfile(manifest_path):
        raise DatasetError(f"label manifest {manifest_path} not found")
    entries = sorted(read_manifest(manifest_path))
    jobs = [(os.path.join(images_dir, name), cfg) for name, _ in entries]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_safe_features, jobs))
    else:
        results = [_safe_features(j) for j in jobs]
    records, names, failures = [], [], []
    for (name, label), (vec, err) in zip(entries, results):
        if err is None:
            records.append(FeatureRecord(vec, label))
            names.append(name)
        else:
            failures.append((name, err))
    if not records:
        raise DatasetError("no image could be processed: " +
                           "; ".join(f"{n}: {m}" for n, m in failures))
    return ExtractResult(build_dataset(records), names, failures)


def classifier_params(name, cfg):
    if name == "rf":
        return {"n_estimators": cfg.rf_trees, "max_features": cfg.rf_features,
                "bootstrap": cfg.rf_bootstrap, "min_leaf": cfg.min_leaf,
                "random_state": cfg.seed}
    if name == "part":
        return {"confidence": cfg.part_confidence, "min_leaf": cfg.min_leaf}
    if name == "nb":
        return {"var_floor": cfg.nb_var_floor}
    raise ValueError(f"unknown classifier {name!r}")


def build_classifier(name, cfg):
    return make_classifier(name, **classifier_params(name, cfg))


def selected_classifiers(cfg):
    return CLASSIFIER_ORDER if cfg.classifier == "all" else (cfg.classifier,)


def level_label(percents):
    return f"{percents[-1]}%" if percents else "none"


def evaluate_dataset(ds, cfg):
    """Normalize, resample at every configured level, cross-validate.

    Returns a list of EvalReports ordered by level then classifier. In strict
    mode resampling happens inside each training fold instead.
    """
    norm, _ = min_max_normalize(ds)
    levels = list(cfg.smote_levels)
    smote_cfgs = schedule_configs(levels, cfg.smote_k, cfg.seed)
    stages = []
    if not levels:
        stages.append(("none", norm, None))
    elif cfg.strict_smote:
        for i in range(len(levels)):
            stages.append((level_label(levels[: i + 1]), norm, smote_cfgs[: i + 1]))
    else:
        for i, resampled in enumerate(smote_schedule(norm, smote_cfgs)):
            stages.append((level_label(levels[: i + 1]), resampled, None))
    reports = []
    for label, data, strict in stages:
        for name in selected_classifiers(cfg):
            reports.append(cross_validate(
                data, build_classifier(name, cfg), cfg.cv_folds, cfg.seed,
                classifier_name=name, smote_level=label, strict_smote=strict,
                presmoted=bool(levels) and not cfg.strict_smote,
            ))
    return reports


def resample_dataset(ds, cfg):
    """``(normalized, params, [(percent, dataset), ...])``."""
    norm, params = min_max_normalize(ds)
    cfgs = schedule_configs(cfg.smote_levels, cfg.smote_k, cfg.seed)
    return norm, params, list(zip(cfg.smote_levels, smote_schedule(norm, cfgs)))


def confidence_of(model, kind, x):
    """Posterior (nb), vote fraction (rf) or matched rule index (part)."""
    x = np.atleast_2d(x)
    if kind == "part":
        return int(model.matched_rule(x)[0])
    label = model.predict(x)[0]
    proba = model.predict_proba(x)[0]
    return float(proba[list(model.classes_).index(label)])
