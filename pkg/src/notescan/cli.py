"""Command-line interface: ``notescan <verb> [--config FILE] [--key value ...]``.

Verbs: fixtures, extract, resample, train, eval, predict. Every config key is
also accepted as a flag (``--cv-folds 10`` or ``--cv_folds 10``).

Exit codes: 0 success (``predict``: genuine), 1 (``predict``: counterfeit;
``extract``: some images failed), 2 usage, configuration or runtime error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import KEYS, load_config
from .dataset import (
    NormalizationParams,
    apply_normalization,
    min_max_normalize,
    read_arff,
    read_csv,
    write_arff,
    write_csv,
)
from .evaluation import format_accuracy_table, render_report_tables
from .exceptions import ConfigError, NotescanError
from .fixtures import MANIFEST, generate_corpus
from .learn.persistence import dumps, loads, model_kind
from .pipeline import (
    build_classifier,
    confidence_of,
    evaluate_dataset,
    extract_dataset,
    image_features,
    resample_dataset,
)
from .texfeat import FEATURE_NAMES

log = logging.getLogger("notescan")

EXIT_OK, EXIT_FAKE, EXIT_ERROR = 0, 1, 2


def _require(cfg, *keys):
    missing = [k for k in keys if getattr(cfg, k) is None]
    if missing:
        raise ConfigError("missing required setting(s): " +
                          ", ".join("--" + k.replace("_", "-") for k in missing))


def read_dataset(path):
    if not os.path.isfile(path):
        raise NotescanError(f"dataset file {path} not found")
    return read_arff(path) if path.lower().endswith(".arff") else read_csv(path)


def write_dataset_pair(ds, csv_path):
    stem = csv_path[:-4] if csv_path.lower().endswith(".csv") else csv_path
    write_csv(ds, stem + ".csv")
    write_arff(ds, stem + ".arff")
    return stem + ".csv", stem + ".arff"


def _write_text(path, text):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ------------------------------------------------------------------ verbs

def cmd_fixtures(cfg):
    """Write a synthetic corpus of real and fake scans plus labels.csv."""
    _require(cfg, "out_dir")
    rows = generate_corpus(cfg.out_dir, cfg.n_real, cfg.n_fake, cfg.seed,
                           spec=cfg.roi_spec)
    print(f"wrote {len(rows)} images and {MANIFEST} to {cfg.out_dir}")
    return EXIT_OK


def cmd_extract(cfg):
    """Extract the 16 texture features of every labelled image."""
    _require(cfg, "images_dir", "dataset")
    manifest = cfg.labels_file or os.path.join(cfg.images_dir, MANIFEST)
    result = extract_dataset(cfg.images_dir, manifest, cfg)
    os.makedirs(os.path.dirname(os.path.abspath(cfg.dataset)), exist_ok=True)
    paths = write_dataset_pair(result.dataset, cfg.dataset)
    counts = result.dataset.class_counts()
    print(f"extracted {len(result.dataset)} records "
          f"({counts['yes']} yes / {counts['no']} no) -> {', '.join(paths)}")
    for name, message in result.failures:
        print(f"FAILED {name}: {message}", file=sys.stderr)
    return EXIT_FAKE if result.failures else EXIT_OK


def cmd_resample(cfg):
    """Normalize a dataset and write one SMOTE output per level."""
    _require(cfg, "dataset", "out_dir")
    if not cfg.smote_levels:
        raise ConfigError("resample needs at least one smote level")
    ds = read_dataset(cfg.dataset)
    norm, params, levels = resample_dataset(ds, cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    params.save(os.path.join(cfg.out_dir, "params.json"))
    write_dataset_pair(norm, os.path.join(cfg.out_dir, "normalized.csv"))
    for percent, out in levels:
        csv_path, _ = write_dataset_pair(out, os.path.join(cfg.out_dir, f"smote_{percent}.csv"))
        c = out.class_counts()
        print(f"SMOTE {percent}%: {c['no']} no / {c['yes']} yes -> {csv_path}")
    return EXIT_OK


def cmd_train(cfg):
    """Train one classifier and save it with its normalization params."""
    _require(cfg, "dataset", "model")
    if cfg.classifier == "all":
        raise ConfigError("train needs a single --classifier (rf, nb or part)")
    ds = read_dataset(cfg.dataset)
    if cfg.params:
        params = NormalizationParams.load(cfg.params)
        data = ds
    else:
        data, params = min_max_normalize(ds)
    model = build_classifier(cfg.classifier, cfg).fit(data.X, data.y)
    _write_text(cfg.model, dumps(model, ds.feature_names))
    params.save(cfg.model + ".params.json")
    counts = data.class_counts()
    train_acc = float((model.predict(data.X) == data.y).mean())
    print(f"trained {cfg.classifier} on {len(data)} records "
          f"({counts['yes']} yes / {counts['no']} no); training accuracy {train_acc:.4f}")
    if cfg.classifier == "part":
        for i, rule in enumerate(model.rules_):
            print(f"  rule {i}: {rule.describe(ds.feature_names)}")
    print(f"model -> {cfg.model}; normalization -> {cfg.model}.params.json")
    return EXIT_OK


def cmd_eval(cfg):
    """Cross-validate the classifiers at every SMOTE level."""
    _require(cfg, "dataset")
    ds = read_dataset(cfg.dataset)
    reports = evaluate_dataset(ds, cfg)
    mode = "strict (SMOTE inside training folds)" if cfg.strict_smote else "presmote"
    print(f"{cfg.cv_folds}-fold stratified CV, mode: {mode}")
    print(format_accuracy_table(reports))
    for note in dict.fromkeys(w for r in reports for w in r.warnings):
        print(f"WARNING: {note}", file=sys.stderr)
    if cfg.report:
        _write_text(cfg.report, render_report_tables(reports))
        print(f"report -> {cfg.report}")
    return EXIT_OK


def cmd_predict(cfg):
    """Classify one scanned note as real or fake."""
    _require(cfg, "model", "image")
    params_path = cfg.params or cfg.model + ".params.json"
    if not os.path.isfile(cfg.model):
        raise NotescanError(f"model file {cfg.model} not found")
    if not os.path.isfile(params_path):
        raise NotescanError(f"normalization params {params_path} not found")
    with open(cfg.model, encoding="utf-8") as fh:
        model, names = loads(fh.read())
    params = NormalizationParams.load(params_path)
    if len(params.minimum) != model.n_features_in_ or (
        names is not None and tuple(names) != tuple(params.feature_names)
    ):
        raise NotescanError("model and normalization params describe different attributes")
    raw = image_features(cfg.image, cfg)
    x = apply_normalization(raw, params)
    kind = model_kind(model)
    label = model.predict(x[None, :])[0]
    conf = confidence_of(model, kind, x)
    verdict = "real" if label == "yes" else "fake"
    conf_name = {"nb": "posterior", "rf": "vote_fraction", "part": "rule"}[kind]
    print(f"verdict: {verdict} ({label})")
    print(f"{conf_name}: {conf}")
    for name, value in zip(FEATURE_NAMES, raw):
        print(f"  {name:<14} {value!r}")
    return EXIT_OK if label == "yes" else EXIT_FAKE


COMMANDS = {
    "fixtures": cmd_fixtures,
    "extract": cmd_extract,
    "resample": cmd_resample,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="notescan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for verb, func in COMMANDS.items():
        p = sub.add_parser(verb, help=(func.__doc__ or verb).splitlines()[0])
        p.add_argument("--config", help="flat key = value config file")
        for key in KEYS:
            flags = ["--" + key.replace("_", "-")]
            if "_" in key:
                flags.append("--" + key)
            p.add_argument(*flags, dest=key, metavar="VALUE", default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in KEYS if getattr(args, k) is not None}
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg)
    except (NotescanError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        log.debug("unexpected failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
