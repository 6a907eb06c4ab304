"""Acceptance gate: one test per release criterion.

Each test is self-contained and checks its criterion end to end at the
stated tolerance, so `pytest -v tests/test_acceptance.py` prints one
pass/fail line per criterion. Reference values come from independent
brute-force computations inside this file, not from the library code
under test.
"""

import math
import os

import numpy as np
import pytest
import torch
from fastapi.testclient import TestClient

from attr2font.attributes import (
    AttributeAttention,
    ChannelAttention,
    attribute_feature_difference,
    channel_attention,
    outer_product_maps,
    rescale_for_stage,
)
from attr2font.checkpoint import load_checkpoint, restore_model, save_checkpoint
from attr2font.config import ModelConfig, TrainConfig
from attr2font.data import (
    FontDataset,
    FontRecord,
    TransferSample,
    collate_pairs,
    parse_charset,
    render_font,
    sample_training_pair,
    to_float,
)
from attr2font.discriminator import Discriminator
from attr2font.errors import ShapeMismatch
from attr2font.evaluate import pca_projection, pearson_correlation
from attr2font.generator import GlyphGenerator
from attr2font.infer import (
    InferenceSession,
    edit_vector,
    interpolate_attributes,
    style_ref_indices,
)
from attr2font.losses import (
    adversarial_discriminator_loss,
    adversarial_generator_loss,
    attr_loss,
    char_loss,
    contextual_loss,
    generator_objective,
    pixel_loss,
    smooth_l1,
)
from attr2font.metrics import chamfer_distance, hausdorff_distance, pix_acc, ssim
from attr2font.model import build_model
from attr2font.service import create_app
from attr2font.style import StyleTransformer
from attr2font.train import (
    init_pseudo_attributes,
    make_optimizers,
    train,
    train_step,
)

from conftest import SANS, SERIF_BOLD, tiny_model_config


# ----------------------------------------------------------------- shared

@pytest.fixture(scope="module")
def overfit_run(tmp_path_factory):
    """Two real faces, ten characters, 300 epochs on a slim architecture.

    Deliberately the heaviest fixture in the suite (a few minutes of CPU);
    the memorization and service tests both read from it.
    """
    charset = parse_charset("a-j")
    rng = np.random.default_rng(7)
    fonts = [
        FontRecord("sans", render_font(SANS, charset, 64), rng.random(37)),
        FontRecord("serif-bold", render_font(SERIF_BOLD, charset, 64), rng.random(37)),
    ]
    dataset = FontDataset(fonts, charset, [f"a{i:02d}" for i in range(37)])
    mc = ModelConfig(n_chars=10, resolution=64, m=2, base_width=16, max_width=128,
                     style_dim=64, embed_dim=16, n_resblocks=2)
    tc = TrainConfig(epochs=300, batch_size=4, seed=0, validation=False,
                     checkpoint_every=300, log_every=10)
    out = str(tmp_path_factory.mktemp("overfit"))
    ckpt = train(dataset, mc, tc, out_dir=out)
    return {"ckpt": ckpt, "dataset": dataset, "mc": mc,
            "losses_csv": os.path.join(out, "losses.csv")}


def cx_reference(gen, tgt, size=5, stride=2, h=0.5, eps=1e-5):
    """Loop-level contextual loss: patches, cosine distances, affinities."""
    def feats(img):
        rows, cols = img.shape
        ps = [img[r:r + size, c:c + size].ravel().astype(np.float64)
              for r in range(0, rows - size + 1, stride)
              for c in range(0, cols - size + 1, stride)]
        ps = np.stack(ps)
        return ps - ps.mean(axis=0, keepdims=True)

    fg, ft = feats(np.asarray(gen, dtype=np.float64)), feats(np.asarray(tgt, dtype=np.float64))
    d = np.zeros((len(fg), len(ft)))
    for i in range(len(fg)):
        for j in range(len(ft)):
            den = (np.linalg.norm(fg[i]) + eps) * (np.linalg.norm(ft[j]) + eps)
            d[i, j] = 1.0 - float(fg[i] @ ft[j]) / den
    dn = d / (d.min(axis=1, keepdims=True) + eps)
    w = np.exp((1.0 - dn) / h)
    cx = w / w.sum(axis=1, keepdims=True)
    return -math.log(float(np.mean(cx.max(axis=0))))


# -------------------------------------------------------------- criteria

def test_01_loss_oracles():
    rng = np.random.default_rng(0)

    # pixel L1 against an explicit loop
    a, b = rng.uniform(-1, 1, (1, 9, 9)), rng.uniform(-1, 1, (1, 9, 9))
    manual = float(np.mean([abs(x - y) for x, y in zip(a.ravel(), b.ravel())]))
    assert float(pixel_loss(a, b)) == pytest.approx(manual, abs=1e-5)

    # uniform logits over 52 classes cost exactly ln 52
    assert float(char_loss(np.zeros(52), 7)) == pytest.approx(math.log(52), abs=1e-5)
    assert math.log(52) == pytest.approx(3.9512, abs=5e-5)

    # smooth-L1 anchor points: 0 -> 0, 1 -> 0.5, 2 -> 1.5
    for diff, expect in ((0.0, 0.0), (1.0, 0.5), (2.0, 1.5), (-2.0, 1.5)):
        assert float(smooth_l1(torch.tensor([diff]))) == pytest.approx(expect, abs=1e-5)

    # attribute term is smooth-L1 of the difference
    p, q = rng.random(37), rng.random(37)
    d = np.abs(p - q)
    manual = float(np.mean(np.where(d <= 1, 0.5 * d * d, d - 0.5)))
    assert float(attr_loss(p, q)) == pytest.approx(manual, abs=1e-5)

    # unit components under the default weights sum to 85
    one = torch.tensor(1.0)
    assert float(generator_objective(one, one, one, one, one)) == pytest.approx(85.0, abs=1e-5)

    # fifty-fifty discriminator probabilities cost 2 ln 2
    half = torch.tensor([0.5])
    assert float(adversarial_discriminator_loss(half, half)) == pytest.approx(2 * math.log(2), abs=1e-5)
    assert float(adversarial_generator_loss(half)) == pytest.approx(math.log(2), abs=1e-5)

    # contextual loss on two-patch fixtures (5x7 gives exactly 2 patches)
    for trial in range(3):
        g = rng.uniform(-1, 1, (5, 7))
        t = rng.uniform(-1, 1, (5, 7))
        assert float(contextual_loss(g, t)) == pytest.approx(cx_reference(g, t), abs=1e-5)

    # and on a denser grid for the general case
    g = rng.uniform(-1, 1, (9, 9))
    t = rng.uniform(-1, 1, (9, 9))
    assert float(contextual_loss(g, t)) == pytest.approx(cx_reference(g, t), abs=1e-5)


def test_02_finite_difference_gradients():
    torch.manual_seed(0)
    kw = dict(eps=1e-6, atol=1e-4, rtol=1e-3)

    # attribute attention path: difference embedding, outer products,
    # channel gates, stage rescale (3 attributes, 4-d embeddings)
    block = ChannelAttention(3, reduction=1).double()
    def attention_path(alpha_a, alpha_b, table):
        beta = attribute_feature_difference(alpha_a, alpha_b, table)
        gamma = outer_product_maps(beta)
        refined = channel_attention(gamma, block).refined
        return rescale_for_stage(refined, (3, 3))
    args = (torch.rand(2, 3, dtype=torch.double, requires_grad=True),
            torch.rand(2, 3, dtype=torch.double, requires_grad=True),
            torch.randn(3, 4, dtype=torch.double, requires_grad=True))
    assert torch.autograd.gradcheck(attention_path, args, **kw)

    # residual style transformer
    st_cfg = ModelConfig(n_attr=3, style_dim=6, n_resblocks=2, n_chars=10,
                         resolution=64, m=2, base_width=8, max_width=16, embed_dim=4)
    st = StyleTransformer(st_cfg).double()
    args = (torch.randn(2, 6, dtype=torch.double, requires_grad=True),
            torch.randn(2, 3, dtype=torch.double, requires_grad=True))
    assert torch.autograd.gradcheck(lambda s, d: st(s, d), args, **kw)

    # every loss term, on 8x8 images / small vectors
    img = lambda: torch.rand(1, 8, 8, dtype=torch.double, requires_grad=True) * 1.8 - 0.9
    assert torch.autograd.gradcheck(pixel_loss, (img(), img()), **kw)
    assert torch.autograd.gradcheck(contextual_loss, (img(), img()), **kw)
    logits = torch.randn(5, dtype=torch.double, requires_grad=True)
    assert torch.autograd.gradcheck(lambda z: char_loss(z, 2), (logits,), **kw)
    vec = lambda: torch.rand(3, dtype=torch.double, requires_grad=True)
    assert torch.autograd.gradcheck(lambda p, q: attr_loss(p, q), (vec(), vec()), **kw)
    probs = lambda: torch.rand(4, dtype=torch.double, requires_grad=True) * 0.8 + 0.1
    assert torch.autograd.gradcheck(adversarial_generator_loss, (probs(),), **kw)
    assert torch.autograd.gradcheck(adversarial_discriminator_loss, (probs(), probs()), **kw)


def test_03_shapes_and_invariants():
    torch.manual_seed(0)

    # outer-product slices are exactly symmetric
    beta = torch.randn(4, 37, 16)
    gamma = outer_product_maps(beta)
    assert torch.equal(gamma, gamma.transpose(-1, -2))

    # channel gates live strictly inside (0, 1)
    block = ChannelAttention(37, reduction=8)
    with torch.no_grad():
        gates = channel_attention(torch.randn(2, 37, 16, 16), block).channel_map
    assert gates.shape == (2, 37, 1, 1)
    assert float(gates.min()) > 0.0 and float(gates.max()) < 1.0

    # the full-size generator: 64x64 output in [-1, 1], five decoder stages,
    # attention maps consumed at every stage after the first
    cfg = ModelConfig()
    gen = GlyphGenerator(cfg)
    assert cfg.levels == 5
    assert len(gen.decoder.ups) == 5
    assert len(gen.attention.stage_blocks) == 4
    assert len(gen.stage_sizes()) == 4

    src = torch.rand(1, 1, 64, 64) * 2 - 1
    refs = torch.rand(1, cfg.m, 64, 64) * 2 - 1
    aa, ab = torch.rand(1, 37), torch.rand(1, 37)
    with torch.no_grad():
        out = gen(src, refs, aa, ab)
    assert out.image.shape == (1, 1, 64, 64)
    assert float(out.image.min()) >= -1.0 and float(out.image.max()) <= 1.0
    assert out.char_logits.shape == (1, cfg.n_chars)

    # a short map list must be rejected, not silently broadcast
    with torch.no_grad():
        feats, _ = gen.content(src)
        style = gen.style(refs, ab - aa)
        maps = gen.attention(aa, ab, gen.stage_sizes())
        with pytest.raises(ShapeMismatch):
            gen.decoder(feats, style, maps[:-1])

    # discriminator heads: probability per image, 37 attribute regressions
    disc = Discriminator(cfg)
    with torch.no_grad():
        p, attrs = disc(src)
    assert p.shape == (1,)
    assert 0.0 <= float(p[0]) <= 1.0
    assert attrs.shape == (1, 37)


def test_04_sampler_probabilities():
    n_labeled, n_unlabeled = 120, 968
    charset = "abcdefgh"
    glyphs = np.zeros((len(charset), 8, 8), dtype=np.uint8)
    rng = np.random.default_rng(1)
    fonts = [FontRecord(f"lab{i:03d}", glyphs, rng.random(37)) for i in range(n_labeled)]
    fonts += [FontRecord(f"unl{i:03d}", glyphs, None) for i in range(n_unlabeled)]
    ds = FontDataset(fonts, charset, [f"a{i}" for i in range(37)])

    draw_rng = np.random.default_rng(0)
    draws = 10_000
    src_labeled = tgt_labeled = 0
    for _ in range(draws):
        s = sample_training_pair(ds, draw_rng, m=2)
        src_labeled += ds.fonts[s.source].labeled
        tgt_labeled += ds.fonts[s.target].labeled
    p_src = src_labeled / draws
    p_tgt = tgt_labeled / draws
    assert abs(p_src - n_labeled / (n_labeled + n_unlabeled)) <= 0.02   # 0.1103
    assert abs(p_tgt - 0.5) <= 0.02


def test_05_learnable_attribute_mechanics(fixture_dataset):
    cfg = tiny_model_config()
    model = build_model(cfg, n_unlabeled=len(fixture_dataset.unlabeled_indices), seed=0)
    init_pseudo_attributes(model, seed=0)
    opt_g, opt_d = make_optimizers(model, TrainConfig(seed=0))
    lambdas = TrainConfig().lambdas

    # sigmoid view stays strictly inside the attribute cube
    views = model.pseudo.view_tensor(0).detach().numpy()
    assert np.all(views > 0.0) and np.all(views < 1.0)

    labeled = fixture_dataset.labeled_indices
    unlabeled = fixture_dataset.unlabeled_indices[0]

    def batch_of(pairs):
        samples = [TransferSample(a, b, k, ((k + 1) % 10, (k + 2) % 10))
                   for a, b, k in pairs]
        return collate_pairs(fixture_dataset, samples)

    # a step over labeled-only pairs must leave the store bit-identical
    before = model.pseudo.logits.detach().numpy().copy()
    train_step(model, fixture_dataset,
               batch_of([(labeled[0], labeled[1], 0), (labeled[1], labeled[0], 1)]),
               opt_g, opt_d, lambdas)
    after = model.pseudo.logits.detach().numpy().copy()
    assert before.tobytes() == after.tobytes()

    # a step with an unlabeled target moves that font's logits
    train_step(model, fixture_dataset,
               batch_of([(labeled[0], unlabeled, 2), (labeled[1], unlabeled, 3)]),
               opt_g, opt_d, lambdas)
    moved = model.pseudo.logits.detach().numpy().copy()
    assert moved.tobytes() != after.tobytes()
    assert np.all(np.isfinite(moved))

    # annotated vectors never drift, byte for byte, across 100 live steps
    snapshots = [fixture_dataset.fonts[i].attributes.tobytes() for i in labeled]
    rng = np.random.default_rng(3)
    for _ in range(100):
        samples = [sample_training_pair(fixture_dataset, rng, cfg.m) for _ in range(2)]
        train_step(model, fixture_dataset, collate_pairs(fixture_dataset, samples),
                   opt_g, opt_d, lambdas)
    for i, snap in zip(labeled, snapshots):
        assert fixture_dataset.fonts[i].attributes.tobytes() == snap


def test_06_two_font_overfit(overfit_run):
    dataset = overfit_run["dataset"]
    mc = overfit_run["mc"]
    model = restore_model(load_checkpoint(overfit_run["ckpt"]))

    l1s, accs = [], []
    with torch.no_grad():
        for fi in range(2):
            for fj in range(2):
                aa = torch.as_tensor(dataset.fonts[fi].attributes, dtype=torch.float32)[None]
                ab = torch.as_tensor(dataset.fonts[fj].attributes, dtype=torch.float32)[None]
                for k in range(dataset.n_chars):
                    refs_idx = style_ref_indices(k, mc.m, dataset.n_chars)
                    src = torch.as_tensor(to_float(dataset.fonts[fi].glyphs[k]))[None, None]
                    refs = torch.as_tensor(to_float(dataset.fonts[fi].glyphs[refs_idx]))[None]
                    out = model.generator(src, refs, aa, ab).image[0, 0].numpy()
                    tgt = to_float(dataset.fonts[fj].glyphs[k])
                    l1s.append(float(np.mean(np.abs(out - tgt))))
                    accs.append(pix_acc(out, tgt))

    assert len(l1s) == 40
    assert float(np.mean(l1s)) < 0.08
    assert float(np.mean(accs)) > 0.90

    rows = open(overfit_run["losses_csv"], encoding="utf-8").read().strip().splitlines()
    values = [float(v) for row in rows[1:] for v in row.split(",")[1:]]
    assert values and all(np.isfinite(values))


def test_07_metric_oracles():
    # single-point sets: hausdorff is the 3-4-5 hypotenuse, chamfer doubles it
    a, b = np.array([[0.0, 0.0]]), np.array([[3.0, 4.0]])
    assert hausdorff_distance(a, b) == pytest.approx(5.0, abs=1e-12)
    assert chamfer_distance(a, b) == pytest.approx(10.0, abs=1e-12)

    # random 50-point sets against O(n^2) loops
    rng = np.random.default_rng(2)
    pa, pb = rng.uniform(0, 32, (50, 2)), rng.uniform(0, 32, (50, 2))
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(-1))
    brute_haus = max(d.min(axis=1).max(), d.min(axis=0).max())
    brute_chamfer = d.min(axis=1).sum() + d.min(axis=0).sum()
    assert hausdorff_distance(pa, pb) == pytest.approx(brute_haus, abs=1e-9)
    assert chamfer_distance(pa, pb) == pytest.approx(brute_chamfer, abs=1e-9)

    # SSIM: perfect on self, reference-close on a glyph-like pair
    from scipy.ndimage import gaussian_filter
    from skimage.metrics import structural_similarity

    rng = np.random.default_rng(3)
    x = np.tanh(gaussian_filter(rng.normal(size=(64, 64)), 3.0) * 8.0)
    y = np.tanh(gaussian_filter(rng.normal(size=(64, 64)), 3.0) * 8.0)
    assert ssim(x, x) == pytest.approx(1.0, abs=1e-9)
    reference = structural_similarity(x, y, win_size=11, gaussian_weights=True,
                                      sigma=1.5, use_sample_covariance=False,
                                      data_range=2.0)
    assert ssim(x, y) == pytest.approx(float(reference), abs=1e-4)

    # correlation and projection against independent references
    s, t = rng.normal(size=25), rng.normal(size=25)
    assert pearson_correlation(s, t) == pytest.approx(np.corrcoef(s, t)[0, 1], abs=1e-9)

    attrs = rng.random((12, 6))
    coords, comps = pca_projection(attrs, k=2)
    centered = attrs - attrs.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    for c in range(2):
        v = vt[c]
        nz = np.nonzero(v)[0]
        if len(nz) and v[nz[0]] < 0:
            v = -v
        np.testing.assert_allclose(comps[c], v, atol=1e-9)
        np.testing.assert_allclose(coords[:, c], centered @ v, atol=1e-9)
    np.testing.assert_allclose(np.sort(coords.var(axis=0, ddof=1))[::-1],
                               (sv[:2] ** 2) / (len(attrs) - 1), atol=1e-9)


def test_08_inference_algebra_and_checkpoint_bytes(tmp_path, overfit_run):
    rng = np.random.default_rng(4)
    a, b = rng.random(37), rng.random(37)

    # interpolation endpoints are the inputs, bit for bit
    assert interpolate_attributes(a, b, 0.0).tobytes() == a.tobytes()
    assert interpolate_attributes(a, b, 1.0).tobytes() == b.tobytes()

    # the 11-step sweep hits 0.0, 0.1, ..., 1.0
    session = InferenceSession.from_checkpoint(overfit_run["ckpt"])
    steps = session.interpolate(a, b, lambdas=11, chars=[0])
    lams = [s["lam"] for s in steps]
    np.testing.assert_allclose(lams, [i / 10 for i in range(11)], atol=1e-12)
    assert lams[0] == 0.0 and lams[-1] == 1.0

    # sweep endpoints render exactly like direct requests
    direct_a, _ = session.synthesize_charset(a, chars=[0])
    direct_b, _ = session.synthesize_charset(b, chars=[0])
    assert steps[0]["glyphs"].tobytes() == direct_a.tobytes()
    assert steps[-1]["glyphs"].tobytes() == direct_b.tobytes()

    # editing changes exactly one coordinate and undoes itself exactly
    edited = edit_vector(a, 5, 0.9 if a[5] < 0.5 else 0.1)
    assert int(np.sum(edited != a)) == 1
    assert edit_vector(edited, 5, float(a[5])).tobytes() == a.tobytes()

    # save -> load -> save reproduces the file byte for byte
    model = build_model(tiny_model_config(), n_unlabeled=1, seed=0)
    p1, p2 = str(tmp_path / "one.ckpt"), str(tmp_path / "two.ckpt")
    save_checkpoint(p1, model, train_state={"step": 3})
    bundle = load_checkpoint(p1)
    save_checkpoint(p2, restore_model(bundle), train_state=bundle.train_state)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_09_service_contract(overfit_run):
    client = TestClient(create_app(checkpoint=overfit_run["ckpt"]))

    names = client.get("/api/attributes").json()["names"]
    assert len(names) == 37
    assert len(set(names)) == 37

    payload = {"attributes": {n: 0.5 for n in names}, "text": "ab"}
    r1 = client.post("/api/generate", json=payload)
    r2 = client.post("/api/generate", json=payload)
    assert r1.status_code == 200
    assert r1.content == r2.content
    assert [g["char"] for g in r1.json()["glyphs"]] == ["a", "b"]

    bad = {"attributes": {**{n: 0.5 for n in names}, "not_a_real_attribute": 1.0},
           "text": "a"}
    r = client.post("/api/generate", json=bad)
    assert r.status_code == 400
    assert r.json()["detail"]["offending"] == ["not_a_real_attribute"]

    out_of_range = {"attributes": {**{n: 0.5 for n in names}, names[3]: 1.7}, "text": "a"}
    r = client.post("/api/generate", json=out_of_range)
    assert r.status_code == 400
    assert r.json()["detail"]["offending"] == [names[3]]
