"""Checkpoint format.

Layout: MAGIC || sha256(payload) || payload, where payload is a pickle of a
plain dict tree holding only builtins and numpy arrays. Keys are sorted and
arrays made contiguous before pickling, so saving the same state twice gives
identical bytes; the digest catches truncation and bit rot. Writes go through
a temp file and os.replace so a crash never leaves a half-written file.

A checkpoint carries everything standalone inference needs: model weights,
the model configuration, and a source bank of labeled-font glyphs plus their
attribute vectors.
"""

import hashlib
import io
import os
import pickle
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
import torch

from .config import ModelConfig
from .errors import ConfigMismatch, CorruptCheckpoint
from .model import TransferModel, build_model

MAGIC = b"A2FCKPT1\x00"
FORMAT_VERSION = 1


def _to_numpy_tree(obj: Any) -> Any:
    if isinstance(obj, torch.Tensor):
        return obj.detach().cpu().numpy()
    if isinstance(obj, dict):
        return {k: _to_numpy_tree(obj[k]) for k in obj}
    if isinstance(obj, (list, tuple)):
        seq = [_to_numpy_tree(v) for v in obj]
        return tuple(seq) if isinstance(obj, tuple) else seq
    return obj


def _to_torch_tree(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return torch.from_numpy(obj.copy())
    if isinstance(obj, dict):
        return {k: _to_torch_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        seq = [_to_torch_tree(v) for v in obj]
        return tuple(seq) if isinstance(obj, tuple) else seq
    return obj


def _canonical(obj: Any) -> Any:
    """Normalize a tree so pickling the same values always gives the same bytes.

    Dict keys are sorted, arrays made contiguous, containers rebuilt fresh, and
    strings interned. Interning matters: pickle memoizes by object identity, so
    an equal string that is shared in one tree but duplicated in another (e.g.
    after an unpickle round trip) would otherwise shift the encoding.
    """
    if isinstance(obj, dict):
        return {_canonical(k): _canonical(obj[k]) for k in sorted(obj, key=str)}
    if isinstance(obj, (list, tuple)):
        seq = [_canonical(v) for v in obj]
        return tuple(seq) if isinstance(obj, tuple) else seq
    if isinstance(obj, str):
        return sys.intern(obj)
    if isinstance(obj, np.ndarray):
        return np.ascontiguousarray(obj)
    return obj


@dataclass
class SourceBank:
    """Labeled fonts packaged for inference without the training corpus."""

    font_ids: list
    attributes: np.ndarray   # (n_labeled, n_attr) in [0, 1]
    glyphs: np.ndarray       # (n_labeled, n_chars, H, W) uint8
    charset: str
    attribute_names: list

    def to_tree(self) -> Dict[str, Any]:
        return {
            "font_ids": list(self.font_ids),
            "attributes": np.asarray(self.attributes, dtype=np.float64),
            "glyphs": np.asarray(self.glyphs, dtype=np.uint8),
            "charset": self.charset,
            "attribute_names": list(self.attribute_names),
        }

    @classmethod
    def from_tree(cls, tree: Dict[str, Any]) -> "SourceBank":
        return cls(
            font_ids=list(tree["font_ids"]),
            attributes=np.asarray(tree["attributes"]),
            glyphs=np.asarray(tree["glyphs"]),
            charset=tree["charset"],
            attribute_names=list(tree["attribute_names"]),
        )


@dataclass
class CheckpointBundle:
    config: ModelConfig
    model_state: Dict[str, np.ndarray]
    n_unlabeled: int = 0
    optimizer_state: Optional[Dict[str, Any]] = None
    train_state: Dict[str, Any] = field(default_factory=dict)
    source_bank: Optional[SourceBank] = None
    format_version: int = FORMAT_VERSION


def save_checkpoint(
    path: str,
    model: TransferModel,
    optimizer_state: Optional[Dict[str, Any]] = None,
    train_state: Optional[Dict[str, Any]] = None,
    source_bank: Optional[SourceBank] = None,
) -> None:
    tree = {
        "format_version": FORMAT_VERSION,
        "config": model.cfg.to_dict(),
        "n_unlabeled": model.n_unlabeled,
        "model_state": _to_numpy_tree(dict(model.state_dict())),
        "optimizer_state": _to_numpy_tree(optimizer_state) if optimizer_state else None,
        "train_state": _to_numpy_tree(train_state or {}),
        "source_bank": source_bank.to_tree() if source_bank else None,
    }
    buf = io.BytesIO()
    pickle.dump(_canonical(tree), buf, protocol=4)
    payload = buf.getvalue()
    blob = MAGIC + hashlib.sha256(payload).digest() + payload

    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str) -> CheckpointBundle:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MAGIC):
        raise CorruptCheckpoint(f"{path}: bad magic")
    digest, payload = blob[len(MAGIC):len(MAGIC) + 32], blob[len(MAGIC) + 32:]
    if hashlib.sha256(payload).digest() != digest:
        raise CorruptCheckpoint(f"{path}: sha256 mismatch")
    try:
        tree = pickle.loads(payload)
    except Exception as exc:
        raise CorruptCheckpoint(f"{path}: cannot unpickle payload: {exc}") from exc
    if tree.get("format_version") != FORMAT_VERSION:
        raise CorruptCheckpoint(f"{path}: unsupported format_version {tree.get('format_version')!r}")
    bank = tree.get("source_bank")
    return CheckpointBundle(
        config=ModelConfig.from_dict(tree["config"]),
        model_state=tree["model_state"],
        n_unlabeled=int(tree["n_unlabeled"]),
        optimizer_state=tree.get("optimizer_state"),
        train_state=tree.get("train_state") or {},
        source_bank=SourceBank.from_tree(bank) if bank else None,
        format_version=int(tree["format_version"]),
    )


def load_into(model: TransferModel, bundle: CheckpointBundle) -> TransferModel:
    """Restore weights into an existing model; shape fields must agree."""
    if model.cfg.to_dict() != bundle.config.to_dict():
        raise ConfigMismatch(
            f"model config {model.cfg.to_dict()} differs from checkpoint {bundle.config.to_dict()}"
        )
    if model.n_unlabeled != bundle.n_unlabeled:
        raise ConfigMismatch(
            f"model holds {model.n_unlabeled} learnable attribute rows, checkpoint has {bundle.n_unlabeled}"
        )
    model.load_state_dict(_to_torch_tree(bundle.model_state))
    return model


def restore_model(bundle: CheckpointBundle) -> TransferModel:
    model = build_model(bundle.config, n_unlabeled=bundle.n_unlabeled)
    model.load_state_dict(_to_torch_tree(bundle.model_state))
    model.eval()
    return model
