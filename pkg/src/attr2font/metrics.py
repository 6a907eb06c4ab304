"""Image and shape metrics used by the evaluation suite.

Images are float glyphs in [-1, 1]; uint8 inputs are converted. Ink is
anything below 0.
"""

import numpy as np
from scipy.ndimage import correlate
from scipy.spatial import cKDTree

from .errors import EmptySet, ShapeMismatch

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_RANGE = 2.0  # glyphs live in [-1, 1]
SSIM_C1 = (0.01 * SSIM_RANGE) ** 2
SSIM_C2 = (0.03 * SSIM_RANGE) ** 2


def _as_float_image(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.dtype == np.uint8:
        arr = (arr.astype(np.float64) / 127.5) - 1.0
    return arr.astype(np.float64)


def pix_acc(generated: np.ndarray, target: np.ndarray, threshold: float = 0.0) -> float:
    """Fraction of pixels whose ink/background decision agrees."""
    g = _as_float_image(generated)
    t = _as_float_image(target)
    if g.shape != t.shape:
        raise ShapeMismatch(f"image shapes differ: {g.shape} vs {t.shape}")
    return float(np.mean((g < threshold) == (t < threshold)))


def _gaussian_kernel() -> np.ndarray:
    half = SSIM_WINDOW // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x ** 2) / (2.0 * SSIM_SIGMA ** 2))
    g /= g.sum()
    return np.outer(g, g)


def ssim(generated: np.ndarray, target: np.ndarray) -> float:
    """Structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Statistics are weighted means under the window; only windows fully
    inside the image contribute to the final mean.
    """
    x = _as_float_image(generated)
    y = _as_float_image(target)
    if x.shape != y.shape:
        raise ShapeMismatch(f"image shapes differ: {x.shape} vs {y.shape}")
    if min(x.shape) < SSIM_WINDOW:
        raise ShapeMismatch(f"images must be at least {SSIM_WINDOW}px on each side")
    kernel = _gaussian_kernel()

    def filt(a: np.ndarray) -> np.ndarray:
        half = SSIM_WINDOW // 2
        out = correlate(a, kernel, mode="constant")
        return out[half:-half, half:-half]  # windows fully inside only

    mu_x, mu_y = filt(x), filt(y)
    s_xx = filt(x * x) - mu_x * mu_x
    s_yy = filt(y * y) - mu_y * mu_y
    s_xy = filt(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * s_xy + SSIM_C2)
    den = (mu_x ** 2 + mu_y ** 2 + SSIM_C1) * (s_xx + s_yy + SSIM_C2)
    return float(np.mean(num / den))


def contour_points(img: np.ndarray, threshold: float = 0.0) -> np.ndarray:
    """(N, 2) row/col coordinates of ink pixels that touch background.

    A pixel is on the contour when it is ink and at least one 4-neighbor is
    background; outside the image counts as background. Points come back in
    row-major order.
    """
    arr = _as_float_image(img)
    ink = arr < threshold
    padded = np.pad(ink, 1, constant_values=False)
    boundary = ink & ~(
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return np.argwhere(boundary)


def hausdorff_distance(points_a: np.ndarray, points_b: np.ndarray) -> float:
    """max over both directions of the farthest nearest-neighbor distance."""
    a = np.asarray(points_a, dtype=np.float64)
    b = np.asarray(points_b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("hausdorff distance needs two non-empty point sets")
    d_ab = cKDTree(b).query(a)[0]
    d_ba = cKDTree(a).query(b)[0]
    return float(max(d_ab.max(), d_ba.max()))


def chamfer_distance(points_a: np.ndarray, points_b: np.ndarray) -> float:
    """Sum over both point sets of each point's nearest-neighbor distance."""
    a = np.asarray(points_a, dtype=np.float64)
    b = np.asarray(points_b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("chamfer distance needs two non-empty point sets")
    d_ab = cKDTree(b).query(a)[0]
    d_ba = cKDTree(a).query(b)[0]
    return float(d_ab.sum() + d_ba.sum())
