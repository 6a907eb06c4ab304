"""attr2font: attribute-conditioned font style transfer.

Generate glyph sets whose visual style follows 37 continuous attribute
values, train the model on partially annotated font corpora, and serve
interactive synthesis over HTTP.
"""

__version__ = "0.1.0"

from .attributes import attribute_names, validate_attribute_vector
from .checkpoint import SourceBank, load_checkpoint, restore_model, save_checkpoint
from .config import DEFAULT_LAMBDAS, ModelConfig, TrainConfig
from .data import FontDataset, build_dataset, load_dataset, render_glyph
from .infer import InferenceSession
from .model import TransferModel, build_model

__all__ = [
    "DEFAULT_LAMBDAS",
    "FontDataset",
    "InferenceSession",
    "ModelConfig",
    "SourceBank",
    "TrainConfig",
    "TransferModel",
    "attribute_names",
    "build_dataset",
    "build_model",
    "load_checkpoint",
    "load_dataset",
    "render_glyph",
    "restore_model",
    "save_checkpoint",
    "validate_attribute_vector",
    "__version__",
]
