"""Evaluation suite: reconstruction quality, per-attribute impact, and
structure of the labeled attribute space."""

import json
import os
import warnings
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .data import FontDataset, to_float
from .errors import EmptySet, ShapeMismatch
from .infer import EDIT_SWEEP, InferenceSession, edit_vector
from .metrics import chamfer_distance, contour_points, hausdorff_distance, pix_acc, ssim


class ZeroVarianceWarning(UserWarning):
    """An attribute is constant across the labeled fonts."""


class DegenerateRankWarning(UserWarning):
    """The labeled attribute matrix has fewer informative directions than
    requested components."""


def pearson_correlation(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson r; 0 when either side has zero variance (with a warning)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeMismatch(f"series lengths differ: {x.shape} vs {y.shape}")
    xc = x - x.mean()
    yc = y - y.mean()
    nx = np.sqrt((xc ** 2).sum())
    ny = np.sqrt((yc ** 2).sum())
    if nx == 0.0 or ny == 0.0:
        warnings.warn("zero-variance series in correlation; reporting 0", ZeroVarianceWarning)
        return 0.0
    return float((xc * yc).sum() / (nx * ny))


def correlation_matrix(attributes: np.ndarray) -> np.ndarray:
    """(n_attr, n_attr) Pearson matrix over fonts; diagonal is 1 by
    convention even for constant attributes."""
    attrs = np.asarray(attributes, dtype=np.float64)
    n = attrs.shape[1]
    out = np.eye(n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroVarianceWarning)
        degenerate = [j for j in range(n) if np.ptp(attrs[:, j]) == 0.0]
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = out[j, i] = pearson_correlation(attrs[:, i], attrs[:, j])
    if degenerate:
        warnings.warn(
            f"{len(degenerate)} attribute(s) constant across fonts; their correlations are 0",
            ZeroVarianceWarning,
        )
    return out


def pca_projection(attributes: np.ndarray, k: int = 2):
    """Project fonts onto the top-k principal directions of their attributes.

    Returns (coords (n_fonts, k), components (k, n_attr)). Components are
    eigenvectors of the covariance, eigenvalue-descending, each flipped so
    its first nonzero loading is positive. When fewer than k directions have
    positive variance, the missing columns/components are zero.
    """
    attrs = np.asarray(attributes, dtype=np.float64)
    centered = attrs - attrs.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / max(attrs.shape[0] - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]

    comps = np.zeros((k, attrs.shape[1]))
    coords = np.zeros((attrs.shape[0], k))
    rank = int(np.sum(eigvals > 1e-12))
    usable = min(k, rank)
    for c in range(usable):
        v = eigvecs[:, c]
        nz = np.nonzero(v)[0]
        if len(nz) and v[nz[0]] < 0:
            v = -v
        comps[c] = v
        coords[:, c] = centered @ v
    if usable < k:
        warnings.warn(
            f"attribute matrix has rank {rank} < {k}; padding remaining components with zeros",
            DegenerateRankWarning,
        )
    return coords, comps


def attribute_impact(session: InferenceSession, base_attrs: Sequence[float],
                     chars: Sequence[int] = (0,),
                     values: Sequence[float] = EDIT_SWEEP) -> Dict[str, float]:
    """How strongly each attribute changes the rendering.

    Each attribute is swept over the standard grid with everything else held
    at base; the impact score is the mean absolute pixel change between
    consecutive sweep points.
    """
    base = session.resolve_attrs(base_attrs)
    scores: Dict[str, float] = {}
    for idx, name in enumerate(session.attribute_names):
        stacks = []
        for v in values:
            stack, _ = session.synthesize_charset(edit_vector(base, idx, float(v)), chars=list(chars))
            stacks.append(to_float(stack))
        deltas = [float(np.mean(np.abs(stacks[i + 1] - stacks[i]))) for i in range(len(stacks) - 1)]
        scores[name] = float(np.mean(deltas))
    return scores


def reconstruction_metrics(session: InferenceSession, dataset: FontDataset,
                           max_fonts: Optional[int] = None,
                           chars: Optional[Sequence[int]] = None) -> Dict[str, float]:
    """Regenerate labeled fonts from their own attribute vectors and score
    the outputs against the renderings."""
    font_rows = dataset.labeled_indices[:max_fonts] if max_fonts else dataset.labeled_indices
    if not font_rows:
        raise EmptySet("no labeled fonts to evaluate")
    char_ids = list(chars) if chars is not None else list(range(dataset.n_chars))
    accs: List[float] = []
    ssims: List[float] = []
    hausdorffs: List[float] = []
    chamfers: List[float] = []
    for fi in font_rows:
        rec = dataset.fonts[fi]
        stack, _ = session.synthesize_charset(rec.attributes, chars=char_ids)
        for pos, k in enumerate(char_ids):
            gen = to_float(stack[pos])
            real = to_float(rec.glyphs[k])
            accs.append(pix_acc(gen, real))
            ssims.append(ssim(gen, real))
            pg, pr = contour_points(gen), contour_points(real)
            if len(pg) and len(pr):
                hausdorffs.append(hausdorff_distance(pg, pr))
                chamfers.append(chamfer_distance(pg, pr))
    out = {
        "pix_acc": float(np.mean(accs)),
        "ssim": float(np.mean(ssims)),
        "n_glyphs": len(accs),
    }
    if hausdorffs:
        out["hausdorff"] = float(np.mean(hausdorffs))
        out["chamfer"] = float(np.mean(chamfers))
    return out


def evaluate(session: InferenceSession, dataset: FontDataset, out_dir: str,
             max_fonts: Optional[int] = None,
             impact_chars: Sequence[int] = (0,),
             extra_metrics: Optional[Dict[str, Callable]] = None) -> Dict:
    """Full report: reconstruction scores, attribute impact ranking,
    correlation matrix and 2-D projection of the labeled attribute space.

    extra_metrics lets callers add heavyweight scores (e.g. a pretrained
    perceptual distance): each callable gets (generated_stack, real_stack)
    as uint8 arrays and must return a float.
    """
    os.makedirs(out_dir, exist_ok=True)
    report: Dict = {"reconstruction": reconstruction_metrics(session, dataset, max_fonts)}

    base = np.full(session.cfg.n_attr, 0.5)
    impact = attribute_impact(session, base, chars=impact_chars)
    report["attribute_impact"] = dict(sorted(impact.items(), key=lambda kv: -kv[1]))

    labeled = dataset.labeled_attribute_matrix()
    corr = correlation_matrix(labeled)
    coords, comps = pca_projection(labeled, k=2)
    report["attribute_correlation"] = corr.tolist()
    report["pca"] = {
        "coords": coords.tolist(),
        "components": comps.tolist(),
        "font_ids": [dataset.fonts[i].font_id for i in dataset.labeled_indices],
    }

    if extra_metrics:
        fi = dataset.labeled_indices[0]
        rec = dataset.fonts[fi]
        stack, _ = session.synthesize_charset(rec.attributes)
        for name, fn in extra_metrics.items():
            report["reconstruction"][name] = float(fn(stack, rec.glyphs))

    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    _plot_projection(coords, report["pca"]["font_ids"], os.path.join(out_dir, "attribute_space.png"))
    return report


def _plot_projection(coords: np.ndarray, labels: List[str], path: str) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception:
        return
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter(coords[:, 0], coords[:, 1], s=12)
    for (x, y), label in zip(coords, labels):
        ax.annotate(label, (x, y), fontsize=6, alpha=0.7)
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
