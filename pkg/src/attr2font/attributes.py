"""Attribute vocabulary, embeddings, pseudo-attribute store and attribute attention.

Attribute vectors are length-37 arrays in [0,1]. The attention path turns the
attribute delta between two fonts into per-attribute 2-D maps: each delta
scales that attribute's embedding row (beta), each row is expanded to a
symmetric rank-1 map by an outer product (gamma), and a squeeze-stretch
channel gate reweights the maps before they are resized for the decoder.
"""

from dataclasses import dataclass
from importlib import resources

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ShapeMismatch, ValueOutOfRange, ZeroSize


def attribute_names():
    """Canonical ordered list of the 37 attribute names."""
    text = resources.files("attr2font").joinpath("resources/attributes.txt").read_text()
    names = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.startswith("#")]
    return names


def validate_attribute_vector(values, n_attr=37):
    """Check length and [0,1] range; returns a float64 numpy copy."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n_attr:
        raise ShapeMismatch(f"attribute vector must have length {n_attr}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueOutOfRange("attribute vector contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueOutOfRange("attribute values must lie in [0, 1]")
    return arr


class AttributeEmbedding(nn.Module):
    """Learnable table of one embedding row per attribute, init N(0, 0.02)."""

    def __init__(self, n_attr, embed_dim):
        super().__init__()
        self.n_attr = n_attr
        self.embed_dim = embed_dim
        self.table = nn.Parameter(torch.randn(n_attr, embed_dim) * 0.02)

    def forward(self):
        return self.table


def attribute_feature_difference(alpha_a, alpha_b, table):
    """beta[i, j] = (alpha_b[i] - alpha_a[i]) * table[i, j].

    Accepts attribute tensors of shape (..., n_attr) and a table of shape
    (n_attr, embed_dim); returns (..., n_attr, embed_dim).
    """
    if alpha_a.shape != alpha_b.shape:
        raise ShapeMismatch(f"attribute shapes differ: {tuple(alpha_a.shape)} vs {tuple(alpha_b.shape)}")
    if alpha_a.shape[-1] != table.shape[0]:
        raise ShapeMismatch(
            f"attribute length {alpha_a.shape[-1]} does not match table rows {table.shape[0]}")
    delta = alpha_b - alpha_a
    return delta.unsqueeze(-1) * table


def outer_product_maps(beta):
    """gamma[i] = outer(beta[i], beta[i]): per-attribute symmetric rank-1 maps.

    (..., n_attr, embed_dim) -> (..., n_attr, embed_dim, embed_dim).
    """
    return beta.unsqueeze(-1) @ beta.unsqueeze(-2)


class ChannelAttention(nn.Module):
    """Per-channel sigmoid gates from average-pooled features.

    Squeeze to channels/reduction with a 1x1 conv, rectify, stretch back,
    sigmoid. forward() returns the gated input; gates() exposes the map.
    """

    def __init__(self, channels, reduction=8):
        super().__init__()
        hidden = max(1, channels // reduction)
        self.squeeze = nn.Conv2d(channels, hidden, kernel_size=1)
        self.stretch = nn.Conv2d(hidden, channels, kernel_size=1)

    def gates(self, x):
        pooled = F.adaptive_avg_pool2d(x, 1)
        return torch.sigmoid(self.stretch(F.relu(self.squeeze(pooled))))

    def forward(self, x):
        return self.gates(x) * x


@dataclass
class AttentionMaps:
    """Output bundle of the attention stage over the outer-product maps."""

    gamma: torch.Tensor        # (..., n_attr, n_e, n_e), symmetric per slice
    channel_map: torch.Tensor  # (..., n_attr, 1, 1), entries in (0, 1)
    refined: torch.Tensor      # channel_map * gamma


def channel_attention(gamma, block):
    """Apply a ChannelAttention block to outer-product maps.

    Accepts gamma of shape (n_attr, n_e, n_e) or batched (B, n_attr, n_e, n_e);
    returns AttentionMaps with matching leading dims.
    """
    squeezed = gamma.ndim == 3
    x = gamma.unsqueeze(0) if squeezed else gamma
    if x.ndim != 4:
        raise ShapeMismatch(f"expected 3- or 4-D gamma, got shape {tuple(gamma.shape)}")
    gates = block.gates(x)
    refined = gates * x
    if squeezed:
        gates, refined = gates.squeeze(0), refined.squeeze(0)
    return AttentionMaps(gamma=gamma, channel_map=gates, refined=refined)


def rescale_for_stage(refined, stage_hw):
    """Bilinearly resize attention maps to a decoder stage's spatial size.

    Channel count (n_attr) is preserved; align_corners keeps map corners fixed.
    """
    h, w = stage_hw
    if h < 1 or w < 1:
        raise ZeroSize(f"stage size must be positive, got {(h, w)}")
    squeezed = refined.ndim == 3
    x = refined.unsqueeze(0) if squeezed else refined
    out = F.interpolate(x, size=(h, w), mode="bilinear", align_corners=True)
    return out.squeeze(0) if squeezed else out


class PseudoAttributeStore(nn.Module):
    """Learnable attribute logits for unlabeled fonts, exposed through sigmoid.

    The sigmoid view keeps every exposed value strictly inside (0,1) no matter
    how far gradient updates push the logits.
    """

    def __init__(self, logits):
        super().__init__()
        logits = torch.as_tensor(logits, dtype=torch.float32)
        if logits.ndim != 2:
            raise ShapeMismatch(f"logits must be 2-D (n_fonts, n_attr), got {tuple(logits.shape)}")
        self.logits = nn.Parameter(logits)

    @property
    def n_fonts(self):
        return self.logits.shape[0]

    @property
    def n_attr(self):
        return self.logits.shape[1]

    def view_tensor(self, row):
        """Differentiable attribute values of one font."""
        if not 0 <= row < self.n_fonts:
            raise IndexError(f"row {row} outside pseudo store of {self.n_fonts} fonts")
        return torch.sigmoid(self.logits[row])

    def view(self, row):
        """Current attribute values of one font as a numpy array."""
        return self.view_tensor(row).detach().numpy().astype(np.float64)

    def values(self):
        """Current values for all fonts, (n_fonts, n_attr) numpy array."""
        return torch.sigmoid(self.logits).detach().numpy().astype(np.float64)


class AttributeAttention(nn.Module):
    """Full attention pipeline from two attribute vectors to per-stage maps.

    Owns the embedding table and one ChannelAttention block per decoder stage
    that consumes attention maps (stages 2..levels, i.e. levels-1 blocks).
    """

    def __init__(self, n_attr, embed_dim, n_stages, reduction=8):
        super().__init__()
        self.embedding = AttributeEmbedding(n_attr, embed_dim)
        self.stage_blocks = nn.ModuleList(
            ChannelAttention(n_attr, reduction) for _ in range(n_stages))

    def forward(self, alpha_a, alpha_b, stage_sizes):
        """Refined attention maps resized for each stage.

        alpha_a, alpha_b: (B, n_attr); stage_sizes: list of (h, w), one per
        stage block. Returns a list of (B, n_attr, h, w) tensors.
        """
        if len(stage_sizes) != len(self.stage_blocks):
            raise ShapeMismatch(
                f"{len(stage_sizes)} stage sizes for {len(self.stage_blocks)} attention blocks")
        beta = attribute_feature_difference(alpha_a, alpha_b, self.embedding())
        gamma = outer_product_maps(beta)
        maps = []
        for block, hw in zip(self.stage_blocks, stage_sizes):
            refined = channel_attention(gamma, block).refined
            maps.append(rescale_for_stage(refined, hw))
        return maps
