"""Flat ``key = value`` configuration.

Lines starting with ``#`` are comments. Lists are comma separated, booleans
are true/false/yes/no/1/0. Resolution order, lowest to highest: built-in
defaults, config file, the ``NOTESCAN_SEED`` environment variable (seed only),
command-line flags.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields

from .exceptions import ConfigError
from .imaging import RoiSpec

SEED_ENV = "NOTESCAN_SEED"
CLASSIFIER_CHOICES = ("rf", "nb", "part", "all")


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _ints(text):
    text = text.strip()
    if text.lower() in ("", "none"):
        return ()
    return tuple(int(v) for v in text.split(","))


def _bool(text):
    low = str(text).strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text):
    return None if str(text).strip().lower() in ("", "auto", "none") else int(text)


def _opt_str(text):
    text = str(text).strip()
    return text or None


@dataclass
class Config:
    # imaging
    roi_strip: tuple = (0.0, 0.60, 1.0, 0.10)
    roi_bottom: tuple = (0.80, 0.0, 0.20, 1.0)
    resize_rows: int = 1056
    resize_cols: int = 2481
    wiener_window: int = 3
    # texture
    glcm_levels: int = 8
    glcm_symmetric: bool = False
    # resampling
    smote_levels: tuple = (100, 200, 300)
    smote_k: int = 5
    seed: int = 1
    # learning
    classifier: str = "all"
    rf_trees: int = 100
    rf_features: int | None = None
    rf_bootstrap: bool = True
    min_leaf: int = 2
    part_confidence: float = 0.25
    nb_var_floor: float = 1e-9
    # evaluation
    cv_folds: int = 10
    strict_smote: bool = False
    # fixtures
    n_real: int = 50
    n_fake: int = 20
    # execution and paths
    jobs: int = 1
    images_dir: str | None = None
    labels_file: str | None = None
    dataset: str | None = None
    out_dir: str | None = None
    model: str | None = None
    params: str | None = None
    image: str | None = None
    report: str | None = None

    def validate(self):
        try:
            RoiSpec(self.roi_strip, self.roi_bottom)
        except ValueError as exc:
            raise ConfigError(f"roi: {exc}") from exc
        checks = [
            (self.resize_rows >= 1 and self.resize_cols >= 1, "resize target must be positive"),
            (self.wiener_window >= 3 and self.wiener_window % 2 == 1,
             "wiener_window must be odd and >= 3"),
            (self.glcm_levels >= 2, "glcm_levels must be >= 2"),
            (all(p >= 100 and p % 100 == 0 for p in self.smote_levels),
             "smote_levels must be positive multiples of 100"),
            (self.smote_k >= 1, "smote_k must be >= 1"),
            (self.classifier in CLASSIFIER_CHOICES,
             f"classifier must be one of {', '.join(CLASSIFIER_CHOICES)}"),
            (self.rf_trees >= 1, "rf_trees must be >= 1"),
            (self.rf_features is None or 1 <= self.rf_features <= 16,
             "rf_features must be in [1, 16] or auto"),
            (self.min_leaf >= 1, "min_leaf must be >= 1"),
            (0 < self.part_confidence <= 0.5, "part_confidence must be in (0, 0.5]"),
            (self.nb_var_floor > 0, "nb_var_floor must be positive"),
            (self.cv_folds >= 2, "cv_folds must be >= 2"),
            (self.n_real >= 0 and self.n_fake >= 0 and self.n_real + self.n_fake >= 1,
             "need n_real + n_fake >= 1"),
            (self.jobs >= 1, "jobs must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self

    @property
    def roi_spec(self):
        return RoiSpec(self.roi_strip, self.roi_bottom)

    @property
    def resize_target(self):
        return self.resize_rows, self.resize_cols


PARSERS = {
    "roi_strip": _floats, "roi_bottom": _floats,
    "resize_rows": int, "resize_cols": int, "wiener_window": int,
    "glcm_levels": int, "glcm_symmetric": _bool,
    "smote_levels": _ints, "smote_k": int, "seed": int,
    "classifier": lambda s: s.strip().lower(),
    "rf_trees": int, "rf_features": _opt_int, "rf_bootstrap": _bool, "min_leaf": int,
    "part_confidence": float, "nb_var_floor": float,
    "cv_folds": int, "strict_smote": _bool,
    "n_real": int, "n_fake": int, "jobs": int,
    **{k: _opt_str for k in ("images_dir", "labels_file", "dataset", "out_dir", "model",
                             "params", "image", "report")},
}
KEYS = tuple(f.name for f in fields(Config))


def parse_value(key, text):
    if key not in PARSERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return PARSERS[key](text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None


def read_config_file(path):
    """Parse a config file into a ``{key: value}`` dict (unknown keys rejected)."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key = key.strip()
        try:
            values[key] = parse_value(key, value.strip())
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return values


def load_config(path=None, overrides=None, environ=None):
    """Build a validated Config from defaults, file, environment and overrides.

    ``overrides`` maps keys to raw strings (as given on the command line).
    """
    environ = os.environ if environ is None else environ
    values = read_config_file(path) if path else {}
    if environ.get(SEED_ENV):
        values["seed"] = parse_value("seed", environ[SEED_ENV])
    for key, text in (overrides or {}).items():
        values[key] = parse_value(key, text)
    return dataclasses.replace(Config(), **values).validate()


def render_config(cfg: Config):
    """Serialize a Config back to the file format."""
    def fmt(v):
        if isinstance(v, tuple):
            return ",".join(repr(x) if isinstance(x, float) else str(x) for x in v) or "none"
        if isinstance(v, bool):
            return "true" if v else "false"
        if v is None:
            return ""
        return str(v)
    return "".join(f"{k} = {fmt(getattr(cfg, k))}\n" for k in KEYS)
