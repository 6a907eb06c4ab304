"""Inference: synthesize charsets for arbitrary attribute targets from a
trained checkpoint and its source bank.

Generation is deliberately batch-1 per character so the same request always
produces the same bytes regardless of how characters are grouped.
"""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import torch

from .attributes import validate_attribute_vector
from .checkpoint import SourceBank, load_checkpoint, restore_model
from .data import from_float, to_float
from .errors import EmptySet, LambdaOutOfRange, ValueOutOfRange
from .model import TransferModel

EDIT_SWEEP = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def interpolate_attributes(alpha_a: np.ndarray, alpha_b: np.ndarray, lam: float) -> np.ndarray:
    """(1 - lam) * alpha_a + lam * alpha_b, lam in [0, 1]."""
    if not 0.0 <= lam <= 1.0:
        raise LambdaOutOfRange(f"interpolation weight {lam} outside [0, 1]")
    a = np.asarray(alpha_a, dtype=np.float64)
    b = np.asarray(alpha_b, dtype=np.float64)
    return (1.0 - lam) * a + lam * b


def edit_vector(base: np.ndarray, index: int, value: float) -> np.ndarray:
    """Copy of base with one component replaced; the rest stay untouched."""
    if not 0.0 <= value <= 1.0:
        raise ValueOutOfRange(f"attribute value {value} outside [0, 1]")
    out = np.asarray(base, dtype=np.float64).copy()
    if not 0 <= index < out.shape[0]:
        raise IndexError(f"attribute index {index} outside [0, {out.shape[0]})")
    out[index] = value
    return out


def random_attributes(rng: np.random.Generator, n_attr: int = 37) -> np.ndarray:
    """Uniform draw from the attribute cube [0, 1]^n."""
    return rng.random(n_attr)


def select_source_font(bank: SourceBank, target_attrs: np.ndarray,
                       font_id: Optional[str] = None) -> int:
    """Pick the source font index.

    With font_id given the choice is fixed; otherwise the font whose
    attribute vector is nearest in L2 wins, ties going to the
    lexicographically smallest font id.
    """
    if not bank.font_ids:
        raise EmptySet("source bank holds no fonts")
    if font_id is not None:
        try:
            return bank.font_ids.index(font_id)
        except ValueError:
            raise KeyError(f"unknown source font {font_id!r}") from None
    target = np.asarray(target_attrs, dtype=np.float64)
    dists = np.linalg.norm(bank.attributes - target[None, :], axis=1)
    best = dists.min()
    candidates = [i for i in range(len(bank.font_ids)) if dists[i] == best]
    return min(candidates, key=lambda i: bank.font_ids[i])


def style_ref_indices(char_index: int, m: int, n_chars: int) -> List[int]:
    """First m charset indices that are not the content character."""
    refs = [i for i in range(n_chars) if i != char_index][:m]
    if len(refs) < m:
        raise EmptySet(f"charset of {n_chars} chars cannot provide {m} references")
    return refs


class InferenceSession:
    """A restored model plus its source bank, ready to synthesize."""

    def __init__(self, model: TransferModel, bank: SourceBank):
        if bank is None:
            raise EmptySet("checkpoint carries no source bank; cannot run inference")
        self.model = model.eval()
        self.bank = bank
        self.cfg = model.cfg

    @classmethod
    def from_checkpoint(cls, path: str) -> "InferenceSession":
        bundle = load_checkpoint(path)
        return cls(restore_model(bundle), bundle.source_bank)

    @property
    def charset(self) -> str:
        return self.bank.charset

    @property
    def attribute_names(self) -> List[str]:
        return list(self.bank.attribute_names)

    def resolve_attrs(self, values: Sequence[float]) -> np.ndarray:
        return validate_attribute_vector(values, self.cfg.n_attr)

    @torch.no_grad()
    def synthesize_glyph(self, char_index: int, target_attrs: np.ndarray,
                         source_index: int) -> np.ndarray:
        """One glyph as (H, W) uint8, generated at batch size 1."""
        refs_idx = style_ref_indices(char_index, self.cfg.m, len(self.bank.charset))
        src = torch.as_tensor(to_float(self.bank.glyphs[source_index, char_index]))[None, None]
        refs = torch.as_tensor(to_float(self.bank.glyphs[source_index, refs_idx]))[None]
        alpha_a = torch.as_tensor(self.bank.attributes[source_index], dtype=torch.float32)[None]
        alpha_b = torch.as_tensor(np.asarray(target_attrs), dtype=torch.float32)[None]
        out = self.model.generator(src, refs, alpha_a, alpha_b)
        return from_float(out.image[0, 0].numpy())

    def synthesize_charset(self, target_attrs: Sequence[float],
                           source_font: Optional[str] = None,
                           chars: Optional[Sequence[int]] = None) -> Tuple[np.ndarray, str]:
        """Glyphs for the requested char indices (default: whole charset).

        Returns (stack of (n, H, W) uint8, source font id used).
        """
        attrs = self.resolve_attrs(target_attrs)
        si = select_source_font(self.bank, attrs, source_font)
        indices = list(chars) if chars is not None else list(range(len(self.bank.charset)))
        for k in indices:
            if not 0 <= k < len(self.bank.charset):
                raise IndexError(f"char index {k} outside charset of {len(self.bank.charset)}")
        stack = np.stack([self.synthesize_glyph(k, attrs, si) for k in indices])
        return stack, self.bank.font_ids[si]

    def interpolate(self, attrs_a: Sequence[float], attrs_b: Sequence[float],
                    lambdas: Union[int, Sequence[float]] = 11,
                    source_font: Optional[str] = None,
                    chars: Optional[Sequence[int]] = None):
        """Charset stacks along the straight line between two attribute
        vectors. Each step is generated exactly like a direct request for
        its interpolated vector, so endpoints match plain synthesis."""
        a = self.resolve_attrs(attrs_a)
        b = self.resolve_attrs(attrs_b)
        grid = np.linspace(0.0, 1.0, lambdas) if isinstance(lambdas, int) else np.asarray(lambdas, dtype=np.float64)
        steps = []
        for lam in grid:
            attrs = interpolate_attributes(a, b, float(lam))
            stack, fid = self.synthesize_charset(attrs, source_font, chars)
            steps.append({"lam": float(lam), "attributes": attrs, "glyphs": stack, "source_font": fid})
        return steps

    def edit(self, base_attrs: Sequence[float], attribute: Union[int, str],
             values: Sequence[float] = EDIT_SWEEP,
             source_font: Optional[str] = None,
             chars: Optional[Sequence[int]] = None):
        """Sweep a single attribute while the other components stay fixed."""
        base = self.resolve_attrs(base_attrs)
        if isinstance(attribute, str):
            try:
                index = self.bank.attribute_names.index(attribute)
            except ValueError:
                raise KeyError(f"unknown attribute {attribute!r}") from None
        else:
            index = int(attribute)
        steps = []
        for v in values:
            attrs = edit_vector(base, index, float(v))
            stack, fid = self.synthesize_charset(attrs, source_font, chars)
            steps.append({"value": float(v), "attributes": attrs, "glyphs": stack, "source_font": fid})
        return steps
