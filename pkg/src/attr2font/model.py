"""Model bundle: generator, discriminator and the learnable attribute store
for unlabeled fonts, kept together so checkpointing sees one state tree."""

from typing import Optional

import torch
import torch.nn as nn

from .attributes import PseudoAttributeStore
from .config import ModelConfig
from .discriminator import Discriminator
from .generator import GlyphGenerator


class TransferModel(nn.Module):
    def __init__(self, cfg: ModelConfig, n_unlabeled: int = 0, seed: Optional[int] = None):
        super().__init__()
        if seed is not None:
            torch.manual_seed(seed)
        self.cfg = cfg
        self.generator = GlyphGenerator(cfg)
        self.discriminator = Discriminator(cfg)
        self.pseudo = PseudoAttributeStore(torch.zeros(n_unlabeled, cfg.n_attr))

    @property
    def n_unlabeled(self) -> int:
        return self.pseudo.logits.shape[0]


def build_model(cfg: Optional[ModelConfig] = None, n_unlabeled: int = 0,
                seed: Optional[int] = None) -> TransferModel:
    return TransferModel(cfg or ModelConfig(), n_unlabeled, seed)
