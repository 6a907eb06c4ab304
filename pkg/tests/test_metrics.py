"""Metrics against independent references: loop-based oracles for accuracy,
contours and point-set distances, and scikit-image for SSIM."""

import numpy as np
import pytest
from skimage.metrics import structural_similarity

from attr2font.errors import EmptySet, ShapeMismatch
from attr2font.metrics import (
    SSIM_RANGE,
    chamfer_distance,
    contour_points,
    hausdorff_distance,
    pix_acc,
    ssim,
)

RNG = np.random.default_rng(21)


def glyph_like(seed, size=64):
    """Smooth random field pushed toward binary, like an anti-aliased glyph."""
    rng = np.random.default_rng(seed)
    field = rng.normal(size=(size, size))
    from scipy.ndimage import gaussian_filter
    return np.tanh(gaussian_filter(field, 3.0) * 8.0)


# ---------------------------------------------------------------- oracles

def oracle_pix_acc(a, b):
    h, w = a.shape
    hits = 0
    for r in range(h):
        for c in range(w):
            hits += (a[r, c] < 0) == (b[r, c] < 0)
    return hits / (h * w)


def oracle_contours(img):
    h, w = img.shape
    pts = []
    for r in range(h):
        for c in range(w):
            if img[r, c] >= 0:
                continue
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, cc = r + dr, c + dc
                if not (0 <= rr < h and 0 <= cc < w) or img[rr, cc] >= 0:
                    pts.append((r, c))
                    break
    return np.array(pts, dtype=np.int64).reshape(-1, 2)


def oracle_hausdorff(pa, pb):
    def directed(xs, ys):
        worst = 0.0
        for x in xs:
            best = min(float(np.hypot(*(x - y))) for y in ys)
            worst = max(worst, best)
        return worst
    return max(directed(pa, pb), directed(pb, pa))


def oracle_chamfer(pa, pb):
    total = 0.0
    for x in pa:
        total += min(float(np.hypot(*(x - y))) for y in pb)
    for y in pb:
        total += min(float(np.hypot(*(y - x))) for x in pa)
    return total


# ----------------------------------------------------------------- pix acc

def test_pix_acc_matches_oracle():
    a = glyph_like(1, 24)
    b = glyph_like(2, 24)
    assert pix_acc(a, b) == pytest.approx(oracle_pix_acc(a, b), abs=1e-12)


def test_pix_acc_extremes():
    a = glyph_like(3, 16)
    assert pix_acc(a, a) == 1.0
    assert pix_acc(a, -a) == pytest.approx(np.mean(a == 0.0) if np.any(a == 0) else 0.0, abs=1e-12)


def test_pix_acc_accepts_uint8():
    img = np.full((16, 16), 255, np.uint8)
    img[4:10, 4:10] = 0
    assert pix_acc(img, img) == 1.0


def test_pix_acc_shape_guard():
    with pytest.raises(ShapeMismatch):
        pix_acc(np.zeros((4, 4)), np.zeros((5, 5)))


# -------------------------------------------------------------------- ssim

def test_ssim_matches_skimage():
    a = glyph_like(4)
    b = glyph_like(5)
    ours = ssim(a, b)
    ref = structural_similarity(
        a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
        data_range=SSIM_RANGE,
    )
    assert ours == pytest.approx(ref, abs=1e-4)


def test_ssim_identical_is_one():
    a = glyph_like(6)
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-9)


def test_ssim_orders_by_similarity():
    base = glyph_like(7)
    near = np.clip(base + 0.05 * RNG.normal(size=base.shape), -1, 1)
    far = glyph_like(8)
    assert ssim(near, base) > ssim(far, base)


def test_ssim_window_guard():
    with pytest.raises(ShapeMismatch):
        ssim(np.zeros((8, 8)), np.zeros((8, 8)))


# ---------------------------------------------------------------- contours

def test_contours_match_oracle():
    img = glyph_like(9, 32)
    got = contour_points(img)
    expected = oracle_contours(img)
    np.testing.assert_array_equal(got, expected)


def test_contours_square():
    img = np.ones((10, 10))
    img[3:7, 3:7] = -1.0
    pts = set(map(tuple, contour_points(img)))
    # a filled 4x4 block: every ink pixel touches background except none (all
    # 12 border pixels of the block qualify, the 4 interior ones do not)
    assert (4, 4) not in pts and (5, 5) not in pts
    assert (3, 3) in pts and (6, 6) in pts and len(pts) == 12


def test_contours_include_image_border():
    img = -np.ones((6, 6))  # all ink: only the outer ring touches "outside"
    pts = set(map(tuple, contour_points(img)))
    assert (0, 0) in pts and (5, 5) in pts
    assert (2, 2) not in pts
    assert len(pts) == 20


def test_contours_empty_for_blank():
    assert contour_points(np.ones((8, 8))).shape == (0, 2)


# --------------------------------------------------------------- distances

def test_hausdorff_matches_oracle():
    pa = RNG.integers(0, 30, (12, 2)).astype(np.float64)
    pb = RNG.integers(0, 30, (9, 2)).astype(np.float64)
    assert hausdorff_distance(pa, pb) == pytest.approx(oracle_hausdorff(pa, pb), abs=1e-9)


def test_hausdorff_known_case():
    pa = np.array([[0.0, 0.0], [0.0, 3.0]])
    pb = np.array([[4.0, 0.0]])
    assert hausdorff_distance(pa, pb) == pytest.approx(5.0, abs=1e-12)


def test_chamfer_matches_oracle():
    pa = RNG.integers(0, 30, (11, 2)).astype(np.float64)
    pb = RNG.integers(0, 30, (14, 2)).astype(np.float64)
    assert chamfer_distance(pa, pb) == pytest.approx(oracle_chamfer(pa, pb), abs=1e-9)


def test_chamfer_is_sum_form():
    pa = np.array([[0.0, 0.0], [0.0, 2.0]])
    pb = np.array([[1.0, 0.0]])
    # nearest distances: 1 and sqrt(5) from pa, 1 from pb; summed, not averaged
    assert chamfer_distance(pa, pb) == pytest.approx(2.0 + np.sqrt(5.0), abs=1e-12)


def test_distance_identity_and_symmetry():
    pts = RNG.integers(0, 20, (8, 2)).astype(np.float64)
    other = RNG.integers(0, 20, (5, 2)).astype(np.float64)
    assert hausdorff_distance(pts, pts) == 0.0
    assert chamfer_distance(pts, pts) == 0.0
    assert hausdorff_distance(pts, other) == pytest.approx(hausdorff_distance(other, pts), abs=1e-12)
    assert chamfer_distance(pts, other) == pytest.approx(chamfer_distance(other, pts), abs=1e-12)


def test_distances_reject_empty_sets():
    pts = np.array([[1.0, 1.0]])
    empty = np.zeros((0, 2))
    for fn in (hausdorff_distance, chamfer_distance):
        with pytest.raises(EmptySet):
            fn(pts, empty)
        with pytest.raises(EmptySet):
            fn(empty, pts)
