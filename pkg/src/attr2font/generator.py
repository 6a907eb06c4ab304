"""Glyph generator: hierarchical content encoder, style-conditioned skip
fusion and an attribute-attention modulated decoder."""

from dataclasses import dataclass
from typing import List, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from .attributes import AttributeAttention, ChannelAttention
from .config import ModelConfig
from .errors import ShapeMismatch, WrongResolution
from .style import VisualStyleTransformer


def _tile(vec: torch.Tensor, h: int, w: int) -> torch.Tensor:
    """(B, C) -> (B, C, h, w) by spatial broadcast."""
    return vec[:, :, None, None].expand(-1, -1, h, w)


class ContentEncoder(nn.Module):
    """Strided conv pyramid over the source glyph; keeps every stage output
    as a skip feature and classifies the character from the deepest one."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        widths = cfg.encoder_widths()
        stages = []
        in_ch = 1
        for i, w in enumerate(widths):
            ops: List[nn.Module] = [nn.Conv2d(in_ch, w, 4, stride=2, padding=1)]
            if i > 0:
                ops.append(nn.InstanceNorm2d(w))
            ops.append(nn.ReLU(inplace=True))
            stages.append(nn.Sequential(*ops))
            in_ch = w
        self.stages = nn.ModuleList(stages)
        self.classifier = nn.Linear(widths[-1], cfg.n_chars)

    def forward(self, x: torch.Tensor) -> Tuple[List[torch.Tensor], torch.Tensor]:
        feats = []
        h = x
        for stage in self.stages:
            h = stage(h)
            feats.append(h)
        logits = self.classifier(F.adaptive_avg_pool2d(h, 1).flatten(1))
        return feats, logits


class Decoder(nn.Module):
    """Mirror of the encoder. Each upsampling stage consumes the previous
    output gated by channel attention together with the attribute attention
    map at that scale, plus a style-fused skip from the encoder."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        widths = cfg.encoder_widths()
        L = cfg.levels
        self.levels = L
        # skip fusion: 1x1 conv over [tiled style; encoder feature], one per
        # skip actually consumed (stages 2..L use skips L-1 down to 1)
        self.fuse = nn.ModuleList(
            nn.Conv2d(cfg.style_dim + widths[j], widths[j], 1) for j in range(L - 1)
        )
        # channel attention over [g_{i-1}; attention map] for stages 2..L
        up_in = [cfg.style_dim + widths[L - 1]]  # stage 1 input: [style; c_L]
        self.gates = nn.ModuleList()
        for i in range(2, L + 1):
            g_ch = widths[L - i]  # width produced by stage i-1
            self.gates.append(ChannelAttention(g_ch + cfg.n_attr, cfg.attn_reduction))
            up_in.append(g_ch + cfg.n_attr + widths[L - i])
        ups = []
        for i in range(1, L + 1):
            out_ch = widths[L - 1 - i] if i < L else 1
            block: List[nn.Module] = [nn.ConvTranspose2d(up_in[i - 1], out_ch, 4, stride=2, padding=1)]
            if i < L:
                block += [nn.InstanceNorm2d(out_ch), nn.ReLU(inplace=True)]
            else:
                block.append(nn.Tanh())
            ups.append(nn.Sequential(*block))
        self.ups = nn.ModuleList(ups)

    def forward(self, feats: List[torch.Tensor], style: torch.Tensor,
                attn_maps: List[torch.Tensor]) -> torch.Tensor:
        L = self.levels
        if len(attn_maps) != L - 1:
            raise ShapeMismatch(f"need {L - 1} attention maps, got {len(attn_maps)}")
        deep = feats[-1]
        g = self.ups[0](torch.cat([_tile(style, *deep.shape[-2:]), deep], dim=1))
        for i in range(2, L + 1):
            amap = attn_maps[i - 2]
            if amap.shape[-2:] != g.shape[-2:]:
                raise ShapeMismatch(f"attention map {tuple(amap.shape)} vs stage feature {tuple(g.shape)}")
            gated = self.gates[i - 2](torch.cat([g, amap], dim=1))
            skip = feats[L - i]
            fused = self.fuse[L - i](torch.cat([_tile(style, *skip.shape[-2:]), skip], dim=1))
            g = self.ups[i - 1](torch.cat([gated, fused], dim=1))
        return g


@dataclass
class GeneratorOutput:
    image: torch.Tensor        # (B, 1, H, W) in [-1, 1]
    char_logits: torch.Tensor  # (B, n_chars), classifier on the source glyph


class GlyphGenerator(nn.Module):
    """Full synthesis network: content + style + attribute attention."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.content = ContentEncoder(cfg)
        self.style = VisualStyleTransformer(cfg)
        self.attention = AttributeAttention(cfg.n_attr, cfg.embed_dim, cfg.levels - 1, cfg.attn_reduction)
        self.decoder = Decoder(cfg)

    def stage_sizes(self) -> List[Tuple[int, int]]:
        """Spatial sizes of decoder stages that take attention maps."""
        r = self.cfg.resolution
        return [(r >> (self.cfg.levels - i), r >> (self.cfg.levels - i)) for i in range(1, self.cfg.levels)]

    def forward(self, source: torch.Tensor, refs: torch.Tensor,
                alpha_a: torch.Tensor, alpha_b: torch.Tensor) -> GeneratorOutput:
        if source.shape[-1] != self.cfg.resolution or source.shape[-2] != self.cfg.resolution:
            raise WrongResolution(f"expected {self.cfg.resolution}px glyphs, got {tuple(source.shape)}")
        feats, logits = self.content(source)
        style = self.style(refs, alpha_b - alpha_a)
        maps = self.attention(alpha_a, alpha_b, self.stage_sizes())
        image = self.decoder(feats, style, maps)
        return GeneratorOutput(image=image, char_logits=logits)
