"""Dual-head patch discriminator: real/fake probability plus attribute
regression from the same conv trunk."""

from typing import Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import ModelConfig


class Discriminator(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        widths = [cfg.base_width * (2 ** i) for i in range(4)]
        widths = [min(w, cfg.max_width) for w in widths]
        layers = []
        in_ch = 1
        for i, w in enumerate(widths):
            layers.append(nn.Conv2d(in_ch, w, 4, stride=2, padding=1))
            if i > 0:
                layers.append(nn.InstanceNorm2d(w))
            layers.append(nn.LeakyReLU(0.2, inplace=True))
            in_ch = w
        self.trunk = nn.Sequential(*layers)
        self.real_head = nn.Linear(widths[-1], 1)
        self.attr_head = nn.Linear(widths[-1], cfg.n_attr)

    def forward(self, image: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """Returns (p_real in (0,1) of shape (B,), attr prediction (B, n_attr))."""
        h = self.trunk(image)
        h = F.adaptive_avg_pool2d(h, 1).flatten(1)
        return torch.sigmoid(self.real_head(h)).squeeze(-1), self.attr_head(h)
