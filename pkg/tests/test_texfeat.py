import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from notescan.exceptions import DegenerateRegionError, NoValidPairsError
from notescan.imaging import RoiPair
from notescan.texfeat import (
    DIRECTIONS,
    FEATURE_NAMES,
    TextureFeatures,
    feature_vector,
    first_order_stats,
    glcm,
    glcm_stats,
    histogram,
    texture_features,
)

OFFSETS = [(0, 1), (-1, 1), (-1, 0), (-1, -1)]


def glcm_oracle(q, offset, levels):
    """Pair enumeration over pre-quantized levels; returns exact counts."""
    dr, dc = offset
    counts = np.zeros((levels, levels), dtype=np.int64)
    rows, cols = q.shape
    for r in range(rows):
        for c in range(cols):
            rr, cc = r + dr, c + dc
            if 0 <= rr < rows and 0 <= cc < cols:
                counts[q[r, c], q[rr, cc]] += 1
    return counts


def pixel_moment_oracle(img):
    """Variance, skewness, kurtosis, entropy straight from the pixel list."""
    v = [float(x) for x in np.asarray(img).ravel()]
    n = len(v)
    mu = sum(v) / n
    m2 = sum((x - mu) ** 2 for x in v) / n
    m3 = sum((x - mu) ** 3 for x in v) / n
    m4 = sum((x - mu) ** 4 for x in v) / n
    freq = {}
    for x in v:
        freq[x] = freq.get(x, 0) + 1
    ent = -sum((c / n) * math.log2(c / n) for c in freq.values())
    if m2 == 0:
        return m2, 0.0, 0.0, ent
    return m2, m3 / m2 ** 1.5, m4 / m2 ** 2, ent


def stats_oracle(p):
    n = p.shape[0]
    cells = [(i, j, p[i, j]) for i in range(n) for j in range(n)]
    contrast = sum((i - j) ** 2 * w for i, j, w in cells)
    energy = sum(w * w for _, _, w in cells)
    homog = sum(w / (1 + abs(i - j)) for i, j, w in cells)
    mi = sum(i * w for i, _, w in cells)
    mj = sum(j * w for _, j, w in cells)
    si = math.sqrt(sum((i - mi) ** 2 * w for i, _, w in cells))
    sj = math.sqrt(sum((j - mj) ** 2 * w for _, j, w in cells))
    corr = 1.0 if si * sj == 0 else sum((i - mi) * (j - mj) * w for i, j, w in cells) / (si * sj)
    return contrast, corr, energy, homog


HALF_HALF = np.array([[0, 0, 1, 1]] * 4)


# ---------------------------------------------------------------- histogram

def test_histogram_constant():
    h = histogram(np.full((3, 3), 7, dtype=np.uint8))
    assert h[7] == 9 and h.sum() == 9 and h.size == 256


def test_histogram_small():
    h = histogram(np.array([[0, 1, 1, 2]], dtype=np.uint8))
    assert h[:3].tolist() == [1, 2, 1]


def test_histogram_total(rng):
    assert histogram(rng.integers(0, 256, (16, 16), dtype=np.uint8)).sum() == 256


# ---------------------------------------------------------------- first order

def test_constant_first_order():
    h = histogram(np.full((8, 8), 33, dtype=np.uint8))
    assert tuple(first_order_stats(h)) == (0.0, 0.0, 0.0, 0.0)


def test_uniform_histogram_entropy():
    assert first_order_stats(np.ones(256)).entropy == pytest.approx(8.0, abs=1e-12)


def test_two_point_histogram():
    h = np.zeros(256)
    h[0] = h[255] = 10
    s = first_order_stats(h)
    assert s.variance == pytest.approx(16256.25, rel=1e-12)
    assert s.skewness == pytest.approx(0.0, abs=1e-12)
    assert s.kurtosis == pytest.approx(1.0, rel=1e-12)
    assert s.entropy == pytest.approx(1.0, rel=1e-12)


@given(arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20))))
@settings(max_examples=100, deadline=None)
def test_first_order_matches_pixel_oracle(img):
    got = first_order_stats(histogram(img))
    want = pixel_moment_oracle(img)
    for g, w in zip(got, want):
        assert g == pytest.approx(w, rel=1e-9, abs=1e-9)
    assert got.variance >= 0 and 0 <= got.entropy <= 8


# ---------------------------------------------------------------- glcm

def test_worked_half_half_example():
    p = glcm(HALF_HALF, (0, 1), levels=2, quantized=True)
    assert np.allclose(p, [[1 / 3, 1 / 3], [0, 1 / 3]], rtol=0, atol=1e-15)
    s = glcm_stats(p)
    assert s.contrast == pytest.approx(1 / 3, abs=1e-12)
    assert s.energy == pytest.approx(1 / 3, abs=1e-12)
    assert s.homogeneity == pytest.approx(5 / 6, abs=1e-12)
    assert s.correlation == pytest.approx(1 / 2, abs=1e-12)


def test_constant_glcm_single_cell():
    for off in OFFSETS:
        p = glcm(np.full((5, 5), 100, dtype=np.uint8), off)
        assert p[100 * 8 // 256, 100 * 8 // 256] == 1.0 and np.count_nonzero(p) == 1


def test_no_valid_pairs():
    with pytest.raises(NoValidPairsError):
        glcm(np.zeros((1, 1), dtype=np.uint8), (0, 1))
    with pytest.raises(NoValidPairsError):
        glcm(np.zeros((1, 5), dtype=np.uint8), (-1, 0))


def test_direction_offsets():
    assert DIRECTIONS == {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}


@given(arrays(np.uint8, st.tuples(st.integers(2, 16), st.integers(2, 16))),
       st.sampled_from([2, 4, 8]))
@settings(max_examples=100, deadline=None)
def test_glcm_matches_pair_enumeration(img, levels):
    q = img.astype(np.int64) * levels // 256
    for off in OFFSETS:
        counts = glcm_oracle(q, off, levels)
        p = glcm(img, off, levels)
        assert np.array_equal(p, counts / counts.sum())
        assert p.sum() == pytest.approx(1.0, abs=1e-12)


@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(2, 12))))
@settings(max_examples=50, deadline=None)
def test_mirror_transposes_horizontal_glcm(img):
    p = glcm(img, (0, 1))
    assert np.array_equal(p, glcm(img[:, ::-1], (0, 1)).T)


def test_symmetric_option():
    p = glcm(HALF_HALF, (0, 1), levels=2, quantized=True, symmetric=True)
    assert np.allclose(p, p.T)
    assert p.sum() == pytest.approx(1.0)


# ---------------------------------------------------------------- glcm stats

def test_diagonal_glcm_stats():
    s = glcm_stats(np.eye(4) / 4)
    assert s.contrast == 0 and s.homogeneity == pytest.approx(1.0) and s.correlation == pytest.approx(1.0)


def test_single_off_diagonal_cell():
    p = np.zeros((8, 8))
    p[1, 5] = 1.0
    s = glcm_stats(p)
    assert s.energy == 1.0 and s.contrast == 16.0 and s.correlation == 1.0


@given(arrays(np.uint8, st.tuples(st.integers(2, 16), st.integers(2, 16))),
       st.sampled_from([2, 4, 8]))
@settings(max_examples=100, deadline=None)
def test_glcm_stats_match_oracle_and_ranges(img, levels):
    for off in OFFSETS:
        p = glcm(img, off, levels)
        s = glcm_stats(p)
        for g, w in zip(s, stats_oracle(p)):
            assert g == pytest.approx(w, rel=1e-9, abs=1e-12)
        assert 0 < s.energy <= 1 and 0 < s.homogeneity <= 1 + 1e-12
        assert s.contrast >= 0 and -1 - 1e-9 <= s.correlation <= 1 + 1e-9
        assert (s.energy == 1.0) == (np.count_nonzero(p) == 1)
        on_diagonal = np.count_nonzero(p - np.diag(np.diag(p))) == 0
        assert (abs(s.homogeneity - 1) < 1e-12) == on_diagonal


# ---------------------------------------------------------------- texture features

def test_vertical_stripes_contrast_ordering():
    roi = np.tile(np.array([0, 255], dtype=np.uint8), (8, 4))
    per_dir = {a: glcm_stats(glcm(roi, off)).contrast for a, off in DIRECTIONS.items()}
    assert per_dir[0] > per_dir[90]
    _, mean = texture_features(roi)
    assert per_dir[90] < mean.contrast < per_dir[0]


def test_texture_features_average_directions(rng):
    roi = rng.integers(0, 256, (12, 10), dtype=np.uint8)
    _, mean = texture_features(roi)
    per_dir = np.array([stats_oracle(glcm_oracle(roi.astype(int) * 8 // 256, o, 8)
                                     / ((roi.shape[0] - abs(o[0])) * (roi.shape[1] - abs(o[1]))))
                        for o in OFFSETS])
    assert np.allclose(mean, per_dir.mean(axis=0), rtol=1e-12, atol=1e-12)


def test_constant_roi_conventions():
    first, second = texture_features(np.full((8, 8), 200, dtype=np.uint8))
    assert tuple(first) == (0.0, 0.0, 0.0, 0.0)
    assert second.contrast == 0 and second.energy == 1 and second.homogeneity == 1
    assert second.correlation == 1


def test_undersized_roi():
    with pytest.raises(DegenerateRegionError):
        texture_features(np.zeros((7, 20), dtype=np.uint8))


def test_feature_vector_layout(rng):
    a = rng.integers(0, 256, (10, 12), dtype=np.uint8)
    b = rng.integers(0, 64, (9, 15), dtype=np.uint8)
    vec = feature_vector(RoiPair(a, b))
    assert vec.shape == (16,) and len(FEATURE_NAMES) == 16
    assert FEATURE_NAMES[0] == "Contrast_1" and FEATURE_NAMES[-1] == "Kurtosis_2"
    swapped = feature_vector(RoiPair(b, a))
    assert np.array_equal(vec[:8], swapped[8:]) and np.array_equal(vec[8:], swapped[:8])
    first, second = texture_features(a)
    expected = [second.contrast, second.correlation, second.energy, second.homogeneity,
                first.entropy, first.variance, first.skewness, first.kurtosis]
    assert vec[:8].tolist() == expected


def test_feature_vector_constant_pair():
    c = np.full((8, 8), 10, dtype=np.uint8)
    vec = feature_vector(RoiPair(c, c))
    assert vec.tolist() == [0, 1, 1, 1, 0, 0, 0, 0] * 2


def test_transformer_wraps_feature_vector(rng):
    pairs = [RoiPair(rng.integers(0, 256, (9, 9), dtype=np.uint8),
                     rng.integers(0, 256, (9, 9), dtype=np.uint8)) for _ in range(3)]
    t = TextureFeatures()
    out = t.fit_transform(pairs)
    assert out.shape == (3, 16)
    assert np.array_equal(out[1], feature_vector(pairs[1]))
    assert list(t.get_feature_names_out()) == list(FEATURE_NAMES)
