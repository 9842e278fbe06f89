from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from notescan.exceptions import (
    DegenerateRegionError,
    EmptyMaskError,
    ImageDecodeError,
    OutOfBoundsError,
)
from notescan.fixtures import render_note, write_image
from notescan.imaging import (
    STANDARD_SIZE,
    BoundingBox,
    RoiSpec,
    binarize,
    crop,
    extract_rois,
    fraction_to_box,
    largest_blob,
    load_image,
    otsu_threshold,
    preprocess,
    resize,
    to_grayscale,
    wiener_denoise,
)

small_gray = arrays(np.uint8, st.tuples(st.integers(1, 24), st.integers(1, 24)))
small_mask = arrays(np.bool_, st.tuples(st.integers(1, 32), st.integers(1, 32)))


# ---------------------------------------------------------------- oracles

def otsu_oracle_scores(img):
    """Between-class variance for every cut ``t`` (dark = values <= t)."""
    v = img.astype(np.float64).ravel()
    scores = np.full(256, -np.inf)
    for t in range(256):
        dark, bright = v[v <= t], v[v > t]
        if dark.size and bright.size:
            w0, w1 = dark.size / v.size, bright.size / v.size
            scores[t] = w0 * w1 * (dark.mean() - bright.mean()) ** 2
    return scores


def flood_fill_components(mask):
    """Component list ``[(size, top, left, bottom, right)]`` by 8-connected BFS."""
    rows, cols = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    out = []
    for r0 in range(rows):
        for c0 in range(cols):
            if not mask[r0, c0] or seen[r0, c0]:
                continue
            queue = deque([(r0, c0)])
            seen[r0, c0] = True
            pixels = []
            while queue:
                r, c = queue.popleft()
                pixels.append((r, c))
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        rr, cc = r + dr, c + dc
                        if 0 <= rr < rows and 0 <= cc < cols and mask[rr, cc] and not seen[rr, cc]:
                            seen[rr, cc] = True
                            queue.append((rr, cc))
            rs = [p[0] for p in pixels]
            cs = [p[1] for p in pixels]
            out.append((len(pixels), min(rs), min(cs), max(rs), max(cs)))
    return out


def wiener_oracle(img, window):
    x = img.astype(np.float64)
    h = window // 2
    padded = np.pad(x, h, mode="symmetric")
    rows, cols = x.shape
    mean = np.empty_like(x)
    var = np.empty_like(x)
    for r in range(rows):
        for c in range(cols):
            block = padded[r:r + window, c:c + window]
            mean[r, c] = block.mean()
            var[r, c] = block.var()
    noise = var.mean()
    out = np.empty_like(x)
    for r in range(rows):
        for c in range(cols):
            denom = max(var[r, c], noise)
            gain = max(0.0, var[r, c] - noise) / denom if denom > 0 else 0.0
            out[r, c] = mean[r, c] + gain * (x[r, c] - mean[r, c])
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------- loading

def test_load_png_and_jpeg_keep_dimensions(tmp_path, rng):
    rgb = rng.integers(0, 256, size=(50, 100, 3), dtype=np.uint8)
    for ext in (".png", ".jpg"):
        path = str(tmp_path / f"a{ext}")
        Image.fromarray(rgb).save(path)
        out = load_image(path)
        assert out.shape == (50, 100, 3) and out.dtype == np.uint8
    assert np.array_equal(load_image(str(tmp_path / "a.png")), rgb)


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(str(tmp_path / "nope.jpg"))


def test_load_text_file_with_jpeg_extension(tmp_path):
    path = tmp_path / "fake.jpg"
    path.write_text("definitely not an image")
    with pytest.raises(ImageDecodeError):
        load_image(str(path))


def test_load_rejects_other_formats(tmp_path):
    path = str(tmp_path / "a.bmp")
    Image.new("RGB", (4, 4)).save(path, format="BMP")
    with pytest.raises(ImageDecodeError):
        load_image(path)


# ---------------------------------------------------------------- grayscale

@pytest.mark.parametrize("pixel, expected", [
    ((255, 255, 255), 255), ((0, 0, 0), 0), ((100, 150, 200), 141),
])
def test_grayscale_examples(pixel, expected):
    assert to_grayscale(np.array([[pixel]], dtype=np.uint8))[0, 0] == expected


@given(arrays(np.uint8, st.tuples(st.integers(1, 10), st.integers(1, 10), st.just(3))),
       st.randoms())
@settings(max_examples=50, deadline=None)
def test_grayscale_is_pointwise(rgb, random):
    flat = rgb.reshape(-1, 3)
    perm = list(range(flat.shape[0]))
    random.shuffle(perm)
    perm = np.array(perm)
    gray_perm = to_grayscale(flat[perm][None])[0]
    restored = np.empty_like(gray_perm)
    restored[perm] = gray_perm
    assert np.array_equal(restored, to_grayscale(rgb).ravel())


# ---------------------------------------------------------------- binarize

def test_half_black_half_white_marks_right_half():
    img = np.zeros((6, 8), dtype=np.uint8)
    img[:, 4:] = 255
    assert np.array_equal(binarize(img), img == 255)


def test_two_level_threshold_strictly_between():
    img = np.full((5, 5), 50, dtype=np.uint8)
    img[:2] = 200
    t = otsu_threshold(img)
    assert 50 < t < 200
    assert binarize(img).sum() == 10


def test_constant_image_is_all_foreground():
    img = np.full((4, 7), 90, dtype=np.uint8)
    assert otsu_threshold(img) is None
    assert binarize(img).all()


def test_blank_black_image_has_no_foreground():
    assert not binarize(np.zeros((4, 7), dtype=np.uint8)).any()


@given(small_gray)
@settings(max_examples=200, deadline=None)
def test_otsu_matches_brute_force(img):
    scores = otsu_oracle_scores(img)
    t = otsu_threshold(img)
    if not np.isfinite(scores).any():
        assert t is None
        return
    # the chosen mask must be a cut with maximal between-class variance
    cut = int(np.floor(t))
    assert scores[cut] == pytest.approx(scores.max(), rel=1e-12, abs=1e-9)
    assert np.array_equal(binarize(img), img > cut)


# ---------------------------------------------------------------- blob

def test_single_rectangle_blob():
    mask = np.zeros((30, 40), dtype=bool)
    mask[5:15, 7:27] = True
    assert largest_blob(mask) == BoundingBox(5, 7, 10, 20)


def test_larger_component_wins():
    mask = np.zeros((20, 20), dtype=bool)
    mask[1:4, 1:5] = True          # 12 px
    mask[10:16, 10:15] = True      # 30 px
    assert largest_blob(mask) == BoundingBox(10, 10, 6, 5)


def test_diagonal_pixels_are_connected():
    mask = np.eye(5, dtype=bool)
    mask[0, 4] = True
    assert largest_blob(mask) == BoundingBox(0, 0, 5, 5)


def test_tie_goes_to_topmost_then_leftmost():
    mask = np.zeros((10, 10), dtype=bool)
    mask[5:7, 0:2] = True
    mask[1:3, 6:8] = True
    mask[1:3, 2:4] = True
    assert largest_blob(mask) == BoundingBox(1, 2, 2, 2)


def test_empty_mask_raises():
    with pytest.raises(EmptyMaskError):
        largest_blob(np.zeros((3, 3), dtype=bool))


@given(small_mask)
@settings(max_examples=200, deadline=None)
def test_largest_blob_matches_flood_fill(mask):
    comps = flood_fill_components(mask)
    if not comps:
        with pytest.raises(EmptyMaskError):
            largest_blob(mask)
        return
    best = max(c[0] for c in comps)
    size, top, left, bottom, right = min(
        (c for c in comps if c[0] == best), key=lambda c: (c[1], c[2]))
    box = largest_blob(mask)
    assert box == BoundingBox(top, left, bottom - top + 1, right - left + 1)
    assert all(best >= c[0] for c in comps)


# ---------------------------------------------------------------- crop

def test_crop_full_image_is_identity(rng):
    img = rng.integers(0, 256, size=(7, 9), dtype=np.uint8)
    assert np.array_equal(crop(img, BoundingBox(0, 0, 7, 9)), img)


def test_crop_single_pixel(rng):
    img = rng.integers(0, 256, size=(7, 9), dtype=np.uint8)
    out = crop(img, BoundingBox(0, 0, 1, 1))
    assert out.shape == (1, 1) and out[0, 0] == img[0, 0]


def test_crop_works_on_rgb(rng):
    img = rng.integers(0, 256, size=(7, 9, 3), dtype=np.uint8)
    assert crop(img, BoundingBox(2, 3, 4, 5)).shape == (4, 5, 3)


@pytest.mark.parametrize("box", [
    BoundingBox(0, 5, 2, 5), BoundingBox(-1, 0, 2, 2), BoundingBox(0, 0, 0, 3),
    BoundingBox(6, 0, 2, 2),
])
def test_crop_out_of_bounds(box):
    with pytest.raises(OutOfBoundsError):
        crop(np.zeros((7, 9), dtype=np.uint8), box)


@given(st.data())
@settings(max_examples=100, deadline=None)
def test_nested_crops_compose(data):
    rows, cols = data.draw(st.integers(1, 20)), data.draw(st.integers(1, 20))
    img = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    t1 = data.draw(st.integers(0, rows - 1))
    l1 = data.draw(st.integers(0, cols - 1))
    h1 = data.draw(st.integers(1, rows - t1))
    w1 = data.draw(st.integers(1, cols - l1))
    t2 = data.draw(st.integers(0, h1 - 1))
    l2 = data.draw(st.integers(0, w1 - 1))
    h2 = data.draw(st.integers(1, h1 - t2))
    w2 = data.draw(st.integers(1, w1 - l2))
    twice = crop(crop(img, BoundingBox(t1, l1, h1, w1)), BoundingBox(t2, l2, h2, w2))
    once = crop(img, BoundingBox(t1 + t2, l1 + l2, h2, w2))
    assert np.array_equal(twice, once)


# ---------------------------------------------------------------- resize

@given(small_gray)
@settings(max_examples=50, deadline=None)
def test_resize_to_same_size_is_identity(img):
    assert np.array_equal(resize(img, *img.shape), img)


@pytest.mark.parametrize("target", [(1, 1), (3, 17), (40, 9)])
def test_resize_constant_stays_constant(target):
    out = resize(np.full((5, 6), 128, dtype=np.uint8), *target)
    assert out.shape == target and np.all(out == 128)


def test_resize_midpoint_column():
    out = resize(np.array([[0, 255], [0, 255]], dtype=np.uint8), 2, 3)
    # centre sample sits exactly between the two columns: 127.5 rounds up
    assert out[:, 1].tolist() == [128, 128]
    assert out[:, 0].tolist() == [0, 0] and out[:, 2].tolist() == [255, 255]


def test_resize_default_orientation():
    assert resize(np.zeros((10, 20), dtype=np.uint8)).shape == STANDARD_SIZE == (1056, 2481)


def test_resize_rejects_zero_dimension():
    with pytest.raises(ValueError):
        resize(np.zeros((3, 3), dtype=np.uint8), 0, 5)


# ---------------------------------------------------------------- wiener

def test_wiener_constant_unchanged():
    img = np.full((9, 11), 77, dtype=np.uint8)
    assert np.array_equal(wiener_denoise(img), img)


def test_wiener_reduces_impulse():
    img = np.full((5, 5), 100, dtype=np.uint8)
    img[2, 2] = 250
    out = wiener_denoise(img)
    assert abs(int(out[2, 2]) - 100) < 150


@pytest.mark.parametrize("window", [4, 1, 2, 0])
def test_wiener_rejects_bad_window(window):
    with pytest.raises(ValueError):
        wiener_denoise(np.zeros((5, 5), dtype=np.uint8), window)


@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12))),
       st.sampled_from([3, 5]))
@settings(max_examples=100, deadline=None)
def test_wiener_matches_loop_oracle(img, window):
    out = wiener_denoise(img, window)
    expected = wiener_oracle(img, window)
    # cumulative-sum filtering may land a hair either side of a .5 rounding edge
    assert np.abs(out.astype(int) - expected.astype(int)).max() <= 1
    assert out.min() >= 0 and out.max() <= 255


# ---------------------------------------------------------------- rois

def test_default_roi_boxes_on_standard_size():
    spec = RoiSpec()
    assert fraction_to_box(spec.strip, 1056, 2481) == BoundingBox(0, 1488, 1056, 249)
    b = fraction_to_box(spec.bottom, 1056, 2481)
    assert (b.top, b.left, b.height, b.width) == (844, 0, 212, 2481)


def test_extract_rois_shapes():
    rois = extract_rois(np.zeros(STANDARD_SIZE, dtype=np.uint8))
    assert rois.strip.shape == (1056, 249)
    assert rois.bottom.shape == (212, 2481)


def test_degenerate_strip_rejected():
    with pytest.raises(DegenerateRegionError):
        RoiSpec(strip=(0.0, 0.6, 1.0, 0.001))


@pytest.mark.parametrize("strip", [(0.5, 0.0, 0.6, 0.1), (-0.1, 0, 0.5, 0.5), (0, 0, 1.2, 0.1)])
def test_invalid_fractions_rejected(strip):
    with pytest.raises(ValueError):
        RoiSpec(strip=strip)


# ---------------------------------------------------------------- preprocess

SMALL = (240, 560)


def _write_note(path, seed, genuine=True, margin=(20, 60)):
    rgb = render_note(np.random.default_rng(seed), genuine, (300, 700), margin=margin)
    write_image(rgb, str(path))


def test_preprocess_dimensions(tmp_path):
    path = tmp_path / "note.png"
    _write_note(path, 1)
    rois = preprocess(str(path), size=SMALL)
    strip, bottom = fraction_to_box(RoiSpec().strip, *SMALL), fraction_to_box(RoiSpec().bottom, *SMALL)
    assert rois.strip.shape == (strip.height, strip.width)
    assert rois.bottom.shape == (bottom.height, bottom.width)


def test_preprocess_margin_removed(tmp_path):
    framed, bare = tmp_path / "framed.png", tmp_path / "bare.png"
    _write_note(framed, 3)
    _write_note(bare, 3, margin=None)
    a, b = preprocess(str(framed), size=SMALL), preprocess(str(bare), size=SMALL)
    for x, y in zip(a, b):
        assert x.shape == y.shape
        assert np.abs(x.astype(float) - y.astype(float)).mean() <= 2.0


def test_preprocess_is_deterministic(tmp_path):
    path = tmp_path / "note.jpg"
    _write_note(path, 5, genuine=False)
    a, b = preprocess(str(path), size=SMALL), preprocess(str(path), size=SMALL)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_all_black_scan_is_empty_mask(tmp_path):
    path = str(tmp_path / "black.png")
    Image.new("RGB", (64, 32)).save(path)
    with pytest.raises(EmptyMaskError):
        preprocess(path, size=SMALL)
