"""Shared fixtures: a small rendered font corpus and a briefly trained model.

The corpus uses the DejaVu faces shipped with the OS so rendering paths are
exercised against real font files. Training here is only a few epochs; it
produces a functional checkpoint for API tests, not a converged model.
"""

import os

import numpy as np
import pytest

from attr2font import ModelConfig, TrainConfig, attribute_names
from attr2font.data import FontDataset, FontRecord, parse_charset, render_font
from attr2font.infer import InferenceSession
from attr2font.train import train

DEJAVU_DIR = "/usr/share/fonts/truetype/dejavu"
SANS = os.path.join(DEJAVU_DIR, "DejaVuSans.ttf")
SERIF_BOLD = os.path.join(DEJAVU_DIR, "DejaVuSerif-Bold.ttf")
MONO = os.path.join(DEJAVU_DIR, "DejaVuSansMono.ttf")

FIXTURE_CHARSET = "a-j"


def tiny_model_config(n_chars: int = 10) -> ModelConfig:
    """Small-but-real architecture used across the functional tests."""
    return ModelConfig(
        n_chars=n_chars, resolution=64, m=2, base_width=8, max_width=32,
        style_dim=32, embed_dim=8, n_resblocks=2,
    )


@pytest.fixture(scope="session")
def names():
    return attribute_names()


@pytest.fixture(scope="session")
def tiny_cfg():
    return tiny_model_config()


@pytest.fixture(scope="session")
def fixture_dataset(names):
    charset = parse_charset(FIXTURE_CHARSET)
    rng = np.random.default_rng(7)
    fonts = [
        FontRecord("sans", render_font(SANS, charset, 64), rng.random(37)),
        FontRecord("serif-bold", render_font(SERIF_BOLD, charset, 64), rng.random(37)),
        FontRecord("mono", render_font(MONO, charset, 64), None),
    ]
    return FontDataset(fonts, charset, names)


@pytest.fixture(scope="session")
def trained_checkpoint(tmp_path_factory, fixture_dataset, tiny_cfg):
    out = tmp_path_factory.mktemp("trained")
    tc = TrainConfig(epochs=2, batch_size=4, seed=0, validation=False, checkpoint_every=100)
    return train(fixture_dataset, tiny_cfg, tc, out_dir=str(out))


@pytest.fixture(scope="session")
def session(trained_checkpoint):
    return InferenceSession.from_checkpoint(trained_checkpoint)
