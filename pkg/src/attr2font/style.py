"""Style pathway: encode reference glyphs into a global style feature and
transform it toward a target attribute configuration."""

from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import ModelConfig
from .errors import ShapeMismatch, WrongRefCount


class StyleEncoder(nn.Module):
    """m reference glyphs, stacked on the channel axis, down to one vector.

    Strided conv stages halve the resolution until the map is tiny, then a
    global average pool and a linear head produce the style feature.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.m = cfg.m
        widths = cfg.encoder_widths()
        layers = []
        in_ch = cfg.m
        for i, w in enumerate(widths):
            layers.append(nn.Conv2d(in_ch, w, 4, stride=2, padding=1))
            if i > 0:
                layers.append(nn.InstanceNorm2d(w))
            layers.append(nn.ReLU(inplace=True))
            in_ch = w
        self.stages = nn.Sequential(*layers)
        self.head = nn.Linear(widths[-1], cfg.style_dim)

    def forward(self, refs: torch.Tensor) -> torch.Tensor:
        if refs.ndim != 4 or refs.shape[1] != self.m:
            raise WrongRefCount(f"expected (B, {self.m}, H, W) reference stack, got {tuple(refs.shape)}")
        h = self.stages(refs)
        h = F.adaptive_avg_pool2d(h, 1).flatten(1)
        return self.head(h)


class _ResidualBlock(nn.Module):
    """Vector residual block; zeroing the second linear makes it an identity."""

    def __init__(self, dim: int):
        super().__init__()
        self.fc1 = nn.Linear(dim, dim)
        self.norm = nn.LayerNorm(dim)
        self.fc2 = nn.Linear(dim, dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.fc2(F.relu(self.norm(self.fc1(x))))


class StyleTransformer(nn.Module):
    """Predict the style residual that carries s(a) to s(b).

    The attribute delta is injected once: [s; alpha_b - alpha_a] is projected
    back to the style dimension and refined by a stack of residual blocks;
    the result is added to the input style.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.project = nn.Linear(cfg.style_dim + cfg.n_attr, cfg.style_dim)
        self.blocks = nn.Sequential(*[_ResidualBlock(cfg.style_dim) for _ in range(cfg.n_resblocks)])

    def forward(self, style: torch.Tensor, delta: torch.Tensor) -> torch.Tensor:
        if style.shape[:-1] != delta.shape[:-1]:
            raise ShapeMismatch(f"style batch {tuple(style.shape)} vs delta batch {tuple(delta.shape)}")
        h = self.project(torch.cat([style, delta], dim=-1))
        return style + self.blocks(h)


class VisualStyleTransformer(nn.Module):
    """Encoder plus transformer, the full style branch."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.encoder = StyleEncoder(cfg)
        self.transformer = StyleTransformer(cfg)

    def encode(self, refs: torch.Tensor) -> torch.Tensor:
        return self.encoder(refs)

    def transform(self, style: torch.Tensor, delta: torch.Tensor) -> torch.Tensor:
        return self.transformer(style, delta)

    def forward(self, refs: torch.Tensor, delta: torch.Tensor) -> torch.Tensor:
        return self.transform(self.encode(refs), delta)
