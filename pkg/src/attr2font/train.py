"""Training loop: alternating discriminator / generator updates with jointly
learned attribute values for unlabeled fonts.

The learnable attribute store sits in BOTH optimizers: the discrimination
step pulls its values toward what the attribute head reads off real glyphs,
the generation step pulls them toward values that make transfers work. Both
optimizers zero gradients with set_to_none so a batch without unlabeled
fonts leaves the store bit-identical (Adam skips parameters with no grad).
"""

import csv
import math
import os
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch.optim import Adam

from .checkpoint import (
    CheckpointBundle,
    SourceBank,
    _to_torch_tree,
    load_checkpoint,
    load_into,
    save_checkpoint,
)
from .config import ModelConfig, TrainConfig
from .data import FontDataset, collate_pairs, sample_training_pair
from .errors import NonFiniteLoss
from .losses import (
    adversarial_discriminator_loss,
    adversarial_generator_loss,
    attr_loss,
    char_loss,
    contextual_loss,
    generator_objective,
    pixel_loss,
)
from .model import TransferModel, build_model

LOSS_COLUMNS = ["l_G", "l_pixel", "l_char", "l_CX", "l_attr", "l_D", "l'_attr"]


def init_pseudo_attributes(model: TransferModel, seed: int) -> None:
    """Standard-normal logits; the sigmoid view starts spread over (0, 1)."""
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        model.pseudo.logits.copy_(
            torch.randn(model.pseudo.logits.shape, generator=gen)
        )


def resolve_attributes(model: TransferModel, dataset: FontDataset,
                       font_indices: Sequence[int]) -> torch.Tensor:
    """(B, n_attr) attribute rows; annotated fonts give constants, the rest
    come from the learnable store and carry gradient."""
    rows = []
    for fi in font_indices:
        rec = dataset.fonts[int(fi)]
        if rec.labeled:
            rows.append(torch.as_tensor(rec.attributes, dtype=torch.float32))
        else:
            rows.append(model.pseudo.view_tensor(dataset.unlabeled_row[int(fi)]))
    return torch.stack(rows)


def make_optimizers(model: TransferModel, tc: TrainConfig) -> Tuple[Adam, Adam]:
    g_params = list(model.generator.parameters()) + [model.pseudo.logits]
    d_params = list(model.discriminator.parameters()) + [model.pseudo.logits]
    opt_g = Adam(g_params, lr=tc.lr, betas=tc.betas)
    opt_d = Adam(d_params, lr=tc.lr, betas=tc.betas)
    return opt_g, opt_d


def train_step(model: TransferModel, dataset: FontDataset, batch: Dict[str, np.ndarray],
               opt_g: Adam, opt_d: Adam, weights) -> Dict[str, float]:
    """One discriminator update followed by one generator update."""
    source = torch.as_tensor(batch["source_glyph"])
    target = torch.as_tensor(batch["target_glyph"])
    refs = torch.as_tensor(batch["style_refs"])
    chars = torch.as_tensor(batch["char_index"])

    alpha_a = resolve_attributes(model, dataset, batch["source_font"])
    alpha_b = resolve_attributes(model, dataset, batch["target_font"])
    out = model.generator(source, refs, alpha_a, alpha_b)
    fake = out.image

    # discrimination step; attribute regression is supervised on real glyphs
    opt_d.zero_grad(set_to_none=True)
    alpha_b_d = resolve_attributes(model, dataset, batch["target_font"])
    p_real, attr_real = model.discriminator(target)
    p_fake_d, _ = model.discriminator(fake.detach())
    l_d = adversarial_discriminator_loss(p_real, p_fake_d)
    l_attr_real = attr_loss(attr_real, alpha_b_d)
    (l_d + l_attr_real).backward()
    opt_d.step()

    # generation step with the discriminator frozen
    opt_g.zero_grad(set_to_none=True)
    for p in model.discriminator.parameters():
        p.requires_grad_(False)
    p_fake_g, attr_fake = model.discriminator(fake)
    l_g = adversarial_generator_loss(p_fake_g)
    l_pix = pixel_loss(fake, target)
    l_ch = char_loss(out.char_logits, chars)
    l_cx = contextual_loss(fake, target)
    l_at = attr_loss(attr_fake, alpha_b)
    generator_objective(l_g, l_pix, l_ch, l_cx, l_at, weights).backward()
    for p in model.discriminator.parameters():
        p.requires_grad_(True)
    opt_g.step()

    losses = {
        "l_G": l_g.item(), "l_pixel": l_pix.item(), "l_char": l_ch.item(),
        "l_CX": l_cx.item(), "l_attr": l_at.item(),
        "l_D": l_d.item(), "l'_attr": l_attr_real.item(),
    }
    for name, value in losses.items():
        if not math.isfinite(value):
            raise NonFiniteLoss(f"{name} is {value}; aborting training")
    return losses


def build_source_bank(dataset: FontDataset) -> SourceBank:
    return SourceBank(
        font_ids=[dataset.fonts[i].font_id for i in dataset.labeled_indices],
        attributes=dataset.labeled_attribute_matrix(),
        glyphs=np.stack([dataset.fonts[i].glyphs for i in dataset.labeled_indices]),
        charset=dataset.charset,
        attribute_names=dataset.attribute_names,
    )


def validation_fonts(dataset: FontDataset, fraction: float = 0.2) -> List[int]:
    """Held-out labeled fonts: the trailing fraction of the labeled list."""
    n_val = int(len(dataset.labeled_indices) * fraction)
    return dataset.labeled_indices[len(dataset.labeled_indices) - n_val:] if n_val else []


@torch.no_grad()
def validate(model: TransferModel, dataset: FontDataset, val_fonts: List[int],
             m: int, max_chars: int = 8) -> float:
    """Mean pixel L1 transferring from the first labeled font to each
    held-out font over a fixed char slice."""
    model.eval()
    source_font = dataset.labeled_indices[0]
    chars = list(range(min(max_chars, dataset.n_chars)))
    refs = torch.as_tensor(dataset.glyph_stack(source_font, list(range(min(m, dataset.n_chars)))))[None]
    alpha_a = torch.as_tensor(dataset.fonts[source_font].attributes, dtype=torch.float32)[None]
    total, count = 0.0, 0
    for vf in val_fonts:
        alpha_b = torch.as_tensor(dataset.fonts[vf].attributes, dtype=torch.float32)[None]
        for k in chars:
            src = torch.as_tensor(dataset.glyph(source_font, k))[None]
            out = model.generator(src, refs, alpha_a, alpha_b)
            tgt = torch.as_tensor(dataset.glyph(vf, k))[None]
            total += float(pixel_loss(out.image, tgt))
            count += 1
    model.train()
    return total / max(count, 1)


def _capture_rng(rng: np.random.Generator) -> Dict:
    return {
        "np_rng": rng.bit_generator.state,
        "torch_rng": torch.get_rng_state().numpy(),
    }


def _restore_rng(state: Dict) -> np.random.Generator:
    rng = np.random.default_rng()
    rng.bit_generator.state = state["np_rng"]
    torch.set_rng_state(torch.as_tensor(np.asarray(state["torch_rng"]), dtype=torch.uint8))
    return rng


def train(
    dataset: FontDataset,
    model_cfg: Optional[ModelConfig] = None,
    train_cfg: Optional[TrainConfig] = None,
    out_dir: str = "runs",
    resume: Optional[str] = None,
    log_fn=print,
) -> str:
    """Run the full loop; returns the path of the final checkpoint."""
    tc = train_cfg or TrainConfig()
    mc = model_cfg or ModelConfig(n_chars=dataset.n_chars, resolution=dataset.resolution)
    os.makedirs(out_dir, exist_ok=True)
    ckpt_path = os.path.join(out_dir, "model.ckpt")
    losses_path = os.path.join(out_dir, "losses.csv")

    model = build_model(mc, n_unlabeled=len(dataset.unlabeled_indices), seed=tc.seed)
    init_pseudo_attributes(model, tc.seed)
    opt_g, opt_d = make_optimizers(model, tc)

    step, start_epoch = 0, 0
    rng = np.random.default_rng(tc.seed)
    if resume:
        bundle = load_checkpoint(resume)
        load_into(model, bundle)
        if bundle.optimizer_state:
            opt_g.load_state_dict(_to_torch_tree(bundle.optimizer_state["g"]))
            opt_d.load_state_dict(_to_torch_tree(bundle.optimizer_state["d"]))
        step = int(bundle.train_state.get("step", 0))
        start_epoch = int(bundle.train_state.get("epoch", 0))
        if "np_rng" in bundle.train_state:
            rng = _restore_rng(bundle.train_state)

    model.train()
    bank = build_source_bank(dataset)
    val_fonts = validation_fonts(dataset) if tc.validation else []
    steps_per_epoch = max(1, (len(dataset) * dataset.n_chars) // tc.batch_size)

    mode = "a" if resume and os.path.exists(losses_path) else "w"
    with open(losses_path, mode, newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if mode == "w":
            writer.writerow(["step", *LOSS_COLUMNS])
        for epoch in range(start_epoch, tc.epochs):
            for _ in range(steps_per_epoch):
                samples = [sample_training_pair(dataset, rng, mc.m) for _ in range(tc.batch_size)]
                batch = collate_pairs(dataset, samples)
                losses = train_step(model, dataset, batch, opt_g, opt_d, tc.lambdas)
                step += 1
                if step % tc.log_every == 0:
                    writer.writerow([step, *[f"{losses[c]:.6f}" for c in LOSS_COLUMNS]])
            if val_fonts:
                log_fn(f"epoch {epoch + 1}: val pixel L1 = {validate(model, dataset, val_fonts, mc.m):.4f}")
            if (epoch + 1) % tc.checkpoint_every == 0 or epoch + 1 == tc.epochs:
                save_checkpoint(
                    ckpt_path, model,
                    optimizer_state={"g": opt_g.state_dict(), "d": opt_d.state_dict()},
                    train_state={"step": step, "epoch": epoch + 1, **_capture_rng(rng)},
                    source_bank=bank,
                )
    return ckpt_path
