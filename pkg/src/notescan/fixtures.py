"""Synthetic scanned-banknote generator.

Genuine notes get a smooth holographic strip and a periodic bottom guilloche;
counterfeits get a grainy strip and an aperiodic bottom pattern. Every note
has a bright frame and sits on a dark scanner bed with a random margin, so the
background-removal stage has real work to do.
"""
from __future__ import annotations

import csv
import os

import numpy as np
from PIL import Image
from scipy import ndimage

from .imaging import RoiSpec, fraction_to_box

NOTE_SIZE = (1200, 2820)  # rows, cols: roughly a 600 dpi scan
FRAME = 24
MANIFEST = "labels.csv"
F32 = np.float32


def _noise(rng, sigma, shape):
    return rng.standard_normal(shape, dtype=F32) * F32(sigma)


def _bed(rng, shape):
    return F32(18.0) + _noise(rng, 4.0, shape)


def _base_note(rng, rows, cols):
    r = np.arange(rows, dtype=F32)[:, None]
    c = np.arange(cols, dtype=F32)[None, :]
    shade = F32(168.0 + rng.uniform(-8, 8))
    wash = F32(14.0) * np.sin(F32(2 * np.pi / rng.uniform(300, 420)) * c) * np.cos(
        F32(2 * np.pi / rng.uniform(250, 350)) * r)
    return shade + wash + _noise(rng, 3.0, (rows, cols))


def _strip(rng, rows, cols, genuine):
    r = np.arange(rows, dtype=F32)[:, None]
    c = np.arange(cols, dtype=F32)[None, :]
    glow = F32(18.0) * np.sin(F32(2 * np.pi / rng.uniform(90, 140)) * (r + F32(0.5) * c))
    if genuine:
        level = F32(205.0 + rng.uniform(-6, 6))
        return level + glow + _noise(rng, rng.uniform(1.5, 3.0), (rows, cols))
    level = F32(195.0 + rng.uniform(-6, 6))
    return level + F32(0.4) * glow + _noise(rng, rng.uniform(20.0, 30.0), (rows, cols))


def _bottom(rng, rows, cols, genuine):
    amp = F32(rng.uniform(45, 60))
    if genuine:
        r = np.arange(rows, dtype=F32)[:, None]
        c = np.arange(cols, dtype=F32)[None, :]
        period = rng.uniform(10, 14)
        angle = rng.uniform(0.2, 0.5)
        k = 2 * np.pi / period
        pattern = np.sin(F32(k * np.cos(angle)) * c + F32(k * np.sin(angle)) * r)
        noise = _noise(rng, 3.0, (rows, cols))
    else:
        blobs = ndimage.gaussian_filter(_noise(rng, 1.0, (rows, cols)), rng.uniform(2.5, 4.0))
        pattern = blobs / blobs.std()
        noise = _noise(rng, 6.0, (rows, cols))
    return F32(140.0 + rng.uniform(-6, 6)) + amp * pattern + noise


def render_note(rng, genuine, note_size=NOTE_SIZE, spec: RoiSpec | None = None,
                margin=(40, 140)):
    """One RGB scan as a ``uint8`` array; ``margin=None`` gives a borderless scan."""
    spec = spec or RoiSpec()
    rows, cols = note_size
    note = _base_note(rng, rows, cols)
    s = fraction_to_box(spec.strip, rows, cols)
    note[s.top:s.top + s.height, s.left:s.left + s.width] = _strip(rng, s.height, s.width,
                                                                    genuine)
    b = fraction_to_box(spec.bottom, rows, cols)
    note[b.top:b.top + b.height, b.left:b.left + b.width] = _bottom(rng, b.height, b.width,
                                                                     genuine)
    note[:FRAME] = note[-FRAME:] = 232.0
    note[:, :FRAME] = note[:, -FRAME:] = 232.0
    if margin is None:
        canvas = note
    else:
        top, bottom, left, right = rng.integers(margin[0], margin[1], size=4)
        canvas = _bed(rng, (rows + top + bottom, cols + left + right))
        canvas[top:top + rows, left:left + cols] = note
    tint = np.array([1.0, 0.97, 0.9])  # warm paper; keeps luma close to gray
    tint = (tint / (tint @ [0.299, 0.587, 0.114])).astype(F32)
    rgb = np.empty(canvas.shape + (3,), dtype=np.uint8)
    for ch in range(3):
        rgb[..., ch] = np.clip(np.rint(canvas * tint[ch]), 0, 255)
    return rgb


def write_image(rgb, path, quality=92):
    """JPEG for .jpg/.jpeg paths (fixed quality, no optimizer), PNG otherwise."""
    img = Image.fromarray(rgb, mode="RGB")
    if path.lower().endswith((".jpg", ".jpeg")):
        img.save(path, format="JPEG", quality=quality, subsampling=0)
    else:
        img.save(path, format="PNG")


def generate_corpus(out_dir, n_real=50, n_fake=20, seed=7, note_size=NOTE_SIZE,
                    spec: RoiSpec | None = None, ext=".jpg"):
    """Write ``n_real + n_fake`` scans plus a ``labels.csv`` manifest.

    Each note draws from its own substream of ``SeedSequence(seed)``, so the
    corpus is byte-identical for a given seed. Returns the manifest rows.
    """
    if n_real < 0 or n_fake < 0 or n_real + n_fake == 0:
        raise ValueError("need at least one note (n_real + n_fake >= 1, both >= 0)")
    os.makedirs(out_dir, exist_ok=True)
    labels = ["yes"] * n_real + ["no"] * n_fake
    streams = np.random.SeedSequence(seed).spawn(len(labels))
    order = np.random.default_rng(seed).permutation(len(labels))
    rows = []
    for i, idx in enumerate(order):
        label = labels[idx]
        rng = np.random.default_rng(streams[idx])
        name = f"note_{i:03d}{ext}"
        write_image(render_note(rng, label == "yes", note_size, spec),
                    os.path.join(out_dir, name))
        rows.append((name, label))
    with open(os.path.join(out_dir, MANIFEST), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["filename", "label"])
        writer.writerows(rows)
    return rows
