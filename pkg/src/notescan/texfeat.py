"""First-order histogram statistics and direction-averaged GLCM statistics.

The 16-value feature vector follows this fixed order, strip block first::

    Contrast_1 Correlation_1 Energy_1 Homogeneity_1
    Entropy_1 Variance_1 Skewness_1 Kurtosis_1
    Contrast_2 ... Kurtosis_2          (same eight, bottom design)
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DegenerateRegionError, NoValidPairsError
from .imaging import MIN_ROI_SIDE, RoiPair

# distance-1 offsets as (row delta, column delta)
DIRECTIONS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}

STAT_NAMES = (
    "Contrast", "Correlation", "Energy", "Homogeneity",
    "Entropy", "Variance", "Skewness", "Kurtosis",
)
FEATURE_NAMES = tuple(f"{s}_{block}" for block in (1, 2) for s in STAT_NAMES)


class FirstOrderStats(NamedTuple):
    variance: float
    skewness: float
    kurtosis: float
    entropy: float


class GlcmStats(NamedTuple):
    contrast: float
    correlation: float
    energy: float
    homogeneity: float


def histogram(img: np.ndarray) -> np.ndarray:
    """256-bin intensity histogram."""
    img = np.asarray(img)
    if img.size == 0:
        raise ValueError("empty image")
    return np.bincount(img.astype(np.uint8).ravel(), minlength=256)


def first_order_stats(counts: np.ndarray) -> FirstOrderStats:
    """Variance, skewness, non-excess kurtosis and base-2 entropy of a histogram.

    A zero-variance histogram reports skewness = kurtosis = 0.
    """
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("histogram is empty")
    p = counts / total
    levels = np.arange(p.size, dtype=np.float64)
    mu = levels @ p
    d = levels - mu
    var = (d * d) @ p
    nz = p[p > 0]
    entropy = float(-(nz * np.log2(nz)).sum()) + 0.0
    if var <= 0.0:
        return FirstOrderStats(0.0, 0.0, 0.0, entropy)
    skew = (d ** 3) @ p / var ** 1.5
    kurt = (d ** 4) @ p / var ** 2
    return FirstOrderStats(float(var), float(skew), float(kurt), entropy)


def quantize(img: np.ndarray, levels: int) -> np.ndarray:
    """Equal-width binning of [0, 255] into ``levels`` gray levels."""
    return (np.asarray(img, dtype=np.int64) * levels) // 256


def glcm(img: np.ndarray, offset=(0, 1), levels: int = 8, quantized: bool = False,
         symmetric: bool = False) -> np.ndarray:
    """Normalized gray-level co-occurrence matrix.

    Counts pairs ``(img[r, c], img[r + dr, c + dc])`` over every position where
    both pixels exist. Pass ``quantized=True`` when ``img`` already holds level
    indices in ``[0, levels)``.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    q = np.asarray(img, dtype=np.int64)
    if q.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {q.shape}")
    if quantized:
        if q.size and (q.min() < 0 or q.max() >= levels):
            raise ValueError(f"quantized values must lie in [0, {levels})")
    else:
        q = quantize(q, levels)
    dr, dc = offset
    rows, cols = q.shape
    if rows - abs(dr) <= 0 or cols - abs(dc) <= 0:
        raise NoValidPairsError(f"no pixel pairs at offset {offset} in {rows}x{cols} image")
    r_ref = slice(max(0, -dr), rows - max(0, dr))
    c_ref = slice(max(0, -dc), cols - max(0, dc))
    r_nbr = slice(max(0, dr), rows - max(0, -dr))
    c_nbr = slice(max(0, dc), cols - max(0, -dc))
    pair_index = q[r_ref, c_ref] * levels + q[r_nbr, c_nbr]
    counts = np.bincount(pair_index.ravel(), minlength=levels * levels)
    counts = counts.reshape(levels, levels).astype(np.float64)
    if symmetric:
        counts = counts + counts.T
    return counts / counts.sum()


def glcm_stats(p: np.ndarray) -> GlcmStats:
    """Contrast, correlation, energy and homogeneity of a normalized GLCM.

    Correlation is defined as 1 when either marginal has zero spread.
    """
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[0]
    i, j = np.indices((n, n), dtype=np.float64)
    contrast = float(((i - j) ** 2 * p).sum())
    energy = float((p * p).sum())
    homogeneity = float((p / (1.0 + np.abs(i - j))).sum())
    mu_i = float((i * p).sum())
    mu_j = float((j * p).sum())
    sd_i = np.sqrt(((i - mu_i) ** 2 * p).sum())
    sd_j = np.sqrt(((j - mu_j) ** 2 * p).sum())
    if sd_i * sd_j <= 1e-15:
        correlation = 1.0
    else:
        correlation = float(((i - mu_i) * (j - mu_j) * p).sum() / (sd_i * sd_j))
    return GlcmStats(contrast, correlation, energy, homogeneity)


def texture_features(roi: np.ndarray, levels: int = 8, symmetric: bool = False):
    """First-order stats and the 4-direction mean of the GLCM stats of one ROI."""
    roi = np.asarray(roi)
    if roi.ndim != 2 or roi.shape[0] < MIN_ROI_SIDE or roi.shape[1] < MIN_ROI_SIDE:
        raise DegenerateRegionError(
            f"ROI of shape {roi.shape} is smaller than {MIN_ROI_SIDE}x{MIN_ROI_SIDE}"
        )
    first = first_order_stats(histogram(roi))
    per_dir = np.array([
        glcm_stats(glcm(roi, off, levels, symmetric=symmetric))
        for off in DIRECTIONS.values()
    ])
    return first, GlcmStats(*(float(v) for v in per_dir.mean(axis=0)))


def _block(roi, levels, symmetric):
    first, second = texture_features(roi, levels, symmetric)
    return [
        second.contrast, second.correlation, second.energy, second.homogeneity,
        first.entropy, first.variance, first.skewness, first.kurtosis,
    ]


def feature_vector(rois: RoiPair, levels: int = 8, symmetric: bool = False) -> np.ndarray:
    """16 texture features: strip block then bottom-design block."""
    strip, bottom = rois
    vec = np.array(_block(strip, levels, symmetric) + _block(bottom, levels, symmetric))
    if not np.all(np.isfinite(vec)):
        raise ValueError("non-finite texture feature")
    return vec


class TextureFeatures(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping a sequence of RoiPairs to an (n, 16) array.

    Parameters
    ----------
    levels : int, default=8
        GLCM quantization levels.
    symmetric : bool, default=False
        Count each pair in both orders.
    """

    def __init__(self, levels=8, symmetric=False):
        self.levels = levels
        self.symmetric = symmetric

    def fit(self, X, y=None):
        self.n_features_out_ = len(FEATURE_NAMES)
        return self

    def transform(self, X):
        return np.array([feature_vector(p, self.levels, self.symmetric) for p in X])

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURE_NAMES, dtype=object)
