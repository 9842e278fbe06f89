"""Scan ingestion and normalization: background removal, resize, denoise, ROI crop.

Images are plain numpy arrays: ``(H, W, 3) uint8`` for RGB and ``(H, W) uint8``
for grayscale. Masks are ``(H, W) bool``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .exceptions import (
    DegenerateRegionError,
    EmptyMaskError,
    ImageDecodeError,
    OutOfBoundsError,
)

STANDARD_SIZE = (1056, 2481)  # rows, columns
MIN_ROI_SIDE = 8

_LUMA = np.array([0.299, 0.587, 0.114])
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


class BoundingBox(NamedTuple):
    top: int
    left: int
    height: int
    width: int

    @property
    def area(self):
        return self.height * self.width


class RoiPair(NamedTuple):
    strip: np.ndarray
    bottom: np.ndarray


@dataclass(frozen=True)
class RoiSpec:
    """Fractional ``(top, left, height, width)`` rectangles for the two ROIs.

    The defaults place the holographic strip as a full-height band at 60-70% of
    the width and the bottom design as the lowest fifth of the note. They are
    placeholders; calibrate them on real scans through the config file.
    """

    strip: tuple = (0.0, 0.60, 1.0, 0.10)
    bottom: tuple = (0.80, 0.0, 0.20, 1.0)

    def __post_init__(self):
        for name in ("strip", "bottom"):
            rect = tuple(float(v) for v in getattr(self, name))
            if len(rect) != 4:
                raise ValueError(f"{name} must have 4 fractions, got {len(rect)}")
            top, left, height, width = rect
            if not all(0.0 <= v <= 1.0 for v in rect):
                raise ValueError(f"{name} fractions must lie in [0, 1]: {rect}")
            if top + height > 1.0 + 1e-12 or left + width > 1.0 + 1e-12:
                raise ValueError(f"{name} extends past the image: {rect}")
            object.__setattr__(self, name, rect)
        rows, cols = STANDARD_SIZE
        for name in ("strip", "bottom"):
            box = fraction_to_box(getattr(self, name), rows, cols)
            if box.height < MIN_ROI_SIDE or box.width < MIN_ROI_SIDE:
                raise DegenerateRegionError(
                    f"{name} maps to {box.height}x{box.width} pixels on the "
                    f"standard image; need at least {MIN_ROI_SIDE}x{MIN_ROI_SIDE}"
                )


def load_image(path) -> np.ndarray:
    """Decode a JPEG or PNG file into an ``(H, W, 3) uint8`` array."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            if im.format not in ("JPEG", "PNG"):
                raise ImageDecodeError(f"{path}: unsupported format {im.format}")
            rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageDecodeError(f"{path}: cannot decode image ({exc})") from exc
    return rgb


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half-up and clamped to [0, 255]."""
    img = np.asarray(img)
    if img.ndim == 2:
        return img.astype(np.uint8, copy=True)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got shape {img.shape}")
    gray = img.astype(np.float64) @ _LUMA
    return np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)


def otsu_threshold(img: np.ndarray) -> float | None:
    """Global threshold maximizing between-class variance.

    Pixels with intensity ``> threshold`` belong to the bright class. When
    several cut points tie, the threshold is the midpoint of the first run of
    maximizing cuts, so a two-level image gets a separator strictly between its
    levels. Returns None for a constant image.

    The comparison uses exact integer arithmetic: for a cut after level ``t``
    with ``n`` pixels and intensity sum ``s`` at or below it, the between-class
    variance is proportional to ``(N*s - n*S)**2 / (n * (N - n))``.
    """
    counts = np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)
    total = int(counts.sum())
    grand = int(np.dot(counts, np.arange(256)))
    best_num, best_den = -1, 1
    first = last = None
    n = s = 0
    for t in range(255):
        n += int(counts[t])
        s += t * int(counts[t])
        if n == 0 or n == total:
            continue
        num = (total * s - n * grand) ** 2
        den = n * (total - n)
        cmp = num * best_den - best_num * den
        if cmp > 0:
            best_num, best_den = num, den
            first = last = t
        elif cmp == 0 and last == t - 1:
            last = t
    if first is None:
        return None
    return (first + last) / 2.0 + 0.5


def binarize(img: np.ndarray) -> np.ndarray:
    """Otsu foreground mask (bright class).

    A constant image is all foreground, except an all-zero (blank black) scan,
    which has nothing to isolate and yields an empty mask.
    """
    img = np.asarray(img)
    threshold = otsu_threshold(img)
    if threshold is None:
        return np.full(img.shape, img.size > 0 and img.flat[0] > 0, dtype=bool)
    return img > threshold


def largest_blob(mask: np.ndarray) -> BoundingBox:
    """Tight bounding box of the largest 8-connected foreground component.

    Ties on pixel count go to the component whose box has the smallest top,
    then the smallest left.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    if count == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    winners = np.flatnonzero(sizes == sizes.max())
    slices = ndimage.find_objects(labels)
    boxes = [
        BoundingBox(
            sl[0].start, sl[1].start, sl[0].stop - sl[0].start, sl[1].stop - sl[1].start
        )
        for sl in (slices[w - 1] for w in winners)
    ]
    return min(boxes, key=lambda b: (b.top, b.left))


def crop(img: np.ndarray, box: BoundingBox) -> np.ndarray:
    img = np.asarray(img)
    top, left, height, width = box
    rows, cols = img.shape[:2]
    if (
        height < 1
        or width < 1
        or top < 0
        or left < 0
        or top + height > rows
        or left + width > cols
    ):
        raise OutOfBoundsError(f"box {tuple(box)} outside image of size {rows}x{cols}")
    return img[top : top + height, left : left + width].copy()


def _sample_grid(n_in, n_out):
    # pixel-center alignment, clamped at the borders
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def resize(img: np.ndarray, out_height: int = STANDARD_SIZE[0],
           out_width: int = STANDARD_SIZE[1]) -> np.ndarray:
    """Bilinear resize with edge clamping; results rounded half-up."""
    if out_height < 1 or out_width < 1:
        raise ValueError(f"target size must be positive, got {out_height}x{out_width}")
    src = np.asarray(img, dtype=np.float64)
    r0, r1, fr = _sample_grid(src.shape[0], out_height)
    c0, c1, fc = _sample_grid(src.shape[1], out_width)
    fr = fr[:, None]
    rows = src[r0] * (1.0 - fr) + src[r1] * fr
    out = rows[:, c0] * (1.0 - fc) + rows[:, c1] * fc
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def wiener_denoise(img: np.ndarray, window: int = 3) -> np.ndarray:
    """Adaptive local Wiener filter.

    Local mean and variance come from a ``window x window`` neighbourhood with
    symmetric padding; the noise power is the mean of all local variances.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    x = np.asarray(img, dtype=np.float64)
    mean = ndimage.uniform_filter(x, size=window, mode="reflect")
    var = ndimage.uniform_filter(x * x, size=window, mode="reflect") - mean * mean
    var = np.maximum(var, 0.0)
    noise = var.mean()
    denom = np.maximum(var, noise)
    gain = np.divide(
        np.maximum(var - noise, 0.0), denom, out=np.zeros_like(var), where=denom > 0
    )
    out = mean + gain * (x - mean)
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def fraction_to_box(rect, rows: int, cols: int) -> BoundingBox:
    """Map a fractional rectangle to pixels: floor the origin, ceil the extent."""
    top, left, height, width = rect
    r = math.floor(top * rows)
    c = math.floor(left * cols)
    h = min(math.ceil(height * rows), rows - r)
    w = min(math.ceil(width * cols), cols - c)
    return BoundingBox(r, c, h, w)


def roi_boxes(shape, spec: RoiSpec):
    rows, cols = shape[:2]
    return fraction_to_box(spec.strip, rows, cols), fraction_to_box(spec.bottom, rows, cols)


def extract_rois(img: np.ndarray, spec: RoiSpec | None = None) -> RoiPair:
    spec = spec or RoiSpec()
    boxes = roi_boxes(img.shape, spec)
    for name, box in zip(RoiPair._fields, boxes):
        if box.height < MIN_ROI_SIDE or box.width < MIN_ROI_SIDE:
            raise DegenerateRegionError(
                f"{name} region is {box.height}x{box.width} pixels; "
                f"need at least {MIN_ROI_SIDE}x{MIN_ROI_SIDE}"
            )
    return RoiPair(*(crop(img, box) for box in boxes))


def normalize_note(rgb: np.ndarray, size=STANDARD_SIZE, window: int = 3) -> np.ndarray:
    """Grayscale, cut the note out of its background, resize, denoise."""
    gray = to_grayscale(rgb)
    note = crop(gray, largest_blob(binarize(gray)))
    return wiener_denoise(resize(note, *size), window)


def preprocess(path, spec: RoiSpec | None = None, size=STANDARD_SIZE,
               window: int = 3) -> RoiPair:
    """Scan file to the pair of denoised security-region crops."""
    return extract_rois(normalize_note(load_image(path), size, window), spec)
