"""Loss terms for the transfer network and the two step objectives.

Conventions: every reduction is a mean (over pixels, attributes, patches and
batch), so the default weights stay resolution-independent. Probabilities are
clamped to [1e-7, 1-1e-7] before any log.
"""

import torch
import torch.nn.functional as F

from .config import DEFAULT_LAMBDAS
from .errors import IndexOutOfRange, ShapeMismatch

PROB_EPS = 1e-7

# contextual-similarity settings: raw patch features, no pretrained extractor
CX_PATCH = 5
CX_STRIDE = 2
CX_BANDWIDTH = 0.5
CX_EPS = 1e-5


def _clamp_prob(p):
    p = torch.as_tensor(p)
    return p.clamp(PROB_EPS, 1.0 - PROB_EPS)


def pixel_loss(generated, target):
    """Mean absolute pixel difference."""
    generated = torch.as_tensor(generated)
    target = torch.as_tensor(target)
    if generated.shape != target.shape:
        raise ShapeMismatch(f"pixel shapes differ: {tuple(generated.shape)} vs {tuple(target.shape)}")
    return (generated - target).abs().mean()


def char_loss(class_logits, k):
    """Cross-entropy of the character classifier: -log softmax(logits)[k].

    Accepts a single logit vector with an int index, or a batch (B, n_chars)
    with a (B,) index tensor; batched losses are averaged.
    """
    logits = torch.as_tensor(class_logits)
    if logits.ndim == 1:
        k = int(k)
        if not 0 <= k < logits.shape[0]:
            raise IndexOutOfRange(f"char index {k} outside [0, {logits.shape[0]})")
        return -F.log_softmax(logits, dim=-1)[k]
    targets = torch.as_tensor(k, dtype=torch.long)
    if targets.min() < 0 or targets.max() >= logits.shape[-1]:
        raise IndexOutOfRange("char index outside logits width")
    return -F.log_softmax(logits, dim=-1).gather(-1, targets.unsqueeze(-1)).mean()


def smooth_l1(d):
    """Mean of elementwise 0.5*d^2 when |d| <= 1, else |d| - 0.5."""
    d = torch.as_tensor(d)
    absd = d.abs()
    return torch.where(absd <= 1.0, 0.5 * d * d, absd - 0.5).mean()


def attr_loss(attr_pred, attr_true):
    """Smooth-L1 between predicted and conditioning attribute values."""
    attr_pred = torch.as_tensor(attr_pred)
    attr_true = torch.as_tensor(attr_true)
    if attr_pred.shape != attr_true.shape:
        raise ShapeMismatch(f"attribute shapes differ: {tuple(attr_pred.shape)} vs {tuple(attr_true.shape)}")
    return smooth_l1(attr_pred - attr_true)


def _patch_features(image):
    """All 5x5/stride-2 patches, flattened and centered by the mean patch.

    image: (1, H, W) or (C, H, W) tensor. Returns (n_patches, C*25).
    """
    feats = F.unfold(image.unsqueeze(0), kernel_size=CX_PATCH, stride=CX_STRIDE)
    feats = feats.squeeze(0).transpose(0, 1)  # (n_patches, C*k*k)
    return feats - feats.mean(dim=0, keepdim=True)


def contextual_loss(generated, target):
    """Alignment-free patch similarity between two images.

    Pairwise cosine distances between patch features are normalized per row by
    the row minimum, exponentiated into affinities with bandwidth h, and
    row-normalized into contextual similarities; the loss is
    -log(mean over target patches of the best similarity). Images whose
    centered patch features are all zero (uniform inputs) give loss 0.
    """
    generated = torch.as_tensor(generated)
    target = torch.as_tensor(target)
    if generated.shape != target.shape:
        raise ShapeMismatch(f"image shapes differ: {tuple(generated.shape)} vs {tuple(target.shape)}")
    if generated.ndim == 2:
        return _contextual_single(generated.unsqueeze(0), target.unsqueeze(0))
    if generated.ndim == 3:
        return _contextual_single(generated, target)
    losses = [_contextual_single(g, t) for g, t in zip(generated, target)]
    return torch.stack(losses).mean()


def _contextual_single(generated, target):
    f_gen = _patch_features(generated)
    f_tgt = _patch_features(target)
    # degenerate inputs: every patch identical -> all-zero features
    if float(f_gen.detach().abs().max()) == 0.0 or float(f_tgt.detach().abs().max()) == 0.0:
        return torch.zeros((), dtype=generated.dtype)
    gen_n = f_gen / (f_gen.norm(dim=1, keepdim=True) + CX_EPS)
    tgt_n = f_tgt / (f_tgt.norm(dim=1, keepdim=True) + CX_EPS)
    dist = 1.0 - gen_n @ tgt_n.t()                      # d[i, j], rows = generated
    dist_norm = dist / (dist.min(dim=1, keepdim=True).values + CX_EPS)
    w = torch.exp((1.0 - dist_norm) / CX_BANDWIDTH)
    cx = w / w.sum(dim=1, keepdim=True)
    best = cx.max(dim=0).values                         # best match per target patch
    return -torch.log(best.mean())


def generator_objective(l_g, l_pixel, l_char, l_cx, l_attr, weights=DEFAULT_LAMBDAS):
    """Weighted sum of the five generation-step losses."""
    w1, w2, w3, w4, w5 = weights
    return w1 * l_g + w2 * l_pixel + w3 * l_char + w4 * l_cx + w5 * l_attr


def adversarial_generator_loss(p_real_on_fake):
    """-log p(real | generated)."""
    return -torch.log(_clamp_prob(p_real_on_fake)).mean()


def adversarial_discriminator_loss(p_real_on_real, p_real_on_fake):
    """-log p(real | real) - log p(fake | generated)."""
    real = -torch.log(_clamp_prob(p_real_on_real)).mean()
    fake = -torch.log(1.0 - _clamp_prob(p_real_on_fake)).mean()
    return real + fake


def discriminator_objective(p_real_on_real, p_real_on_fake, attr_pred_real, attr_true):
    """Discrimination-step total: adversarial log-loss plus the attribute
    regression on real images only."""
    return adversarial_discriminator_loss(p_real_on_real, p_real_on_fake) \
        + attr_loss(attr_pred_real, attr_true)
