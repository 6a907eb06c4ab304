"""Glyph rendering, attribute annotations and the training dataset.

On-disk layout of an ingested dataset:

    <root>/charset.txt            charset spec, e.g. "a-zA-Z"
    <root>/attributes.csv         font_id,<name1>,...  raw scores in [0, 100]
    <root>/images/<font_id>/<char_index>.png

Images are stored as 8-bit grayscale, white background (255) and black ink
(0); the float view used by the networks lives in [-1, 1] with ink = -1.
Fonts present under images/ but absent from attributes.csv are the unlabeled
split.
"""

import csv
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .errors import (
    BadRowLength,
    DuplicateFontId,
    EmptyDataset,
    InconsistentCharset,
    MissingGlyph,
    NoFonts,
    OutOfRange,
    UnreadableFont,
    WrongResolution,
)

RENDER_SIZE = 128
FONT_EXTENSIONS = (".ttf", ".otf", ".ttc")


def parse_charset(spec: str) -> str:
    """Expand a charset spec into an ordered string of characters.

    "a-zA-Z" gives the 52 basic letters; a backslash escapes the next
    character so "\\-" is a literal hyphen. Duplicates keep first position.
    """
    chars: List[str] = []
    i = 0
    spec = spec.strip()
    while i < len(spec):
        ch = spec[i]
        if ch == "\\" and i + 1 < len(spec):
            chars.append(spec[i + 1])
            i += 2
            continue
        if i + 2 < len(spec) and spec[i + 1] == "-":
            lo, hi = ord(ch), ord(spec[i + 2])
            if lo > hi:
                raise ValueError(f"bad charset range {ch}-{spec[i + 2]}")
            chars.extend(chr(c) for c in range(lo, hi + 1))
            i += 3
            continue
        chars.append(ch)
        i += 1
    seen = set()
    out = []
    for c in chars:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return "".join(out)


def to_float(img: np.ndarray) -> np.ndarray:
    """uint8 glyph -> float32 in [-1, 1], ink = -1."""
    return (img.astype(np.float32) / 127.5) - 1.0


def from_float(img: np.ndarray) -> np.ndarray:
    """float glyph in [-1, 1] -> uint8, ink = 0."""
    arr = np.asarray(img, dtype=np.float64)
    return np.clip(np.rint((arr + 1.0) * 127.5), 0, 255).astype(np.uint8)


def _cmap_codepoints(font_path: str) -> set:
    from fontTools.ttLib import TTFont

    try:
        with TTFont(font_path, lazy=True, fontNumber=0) as tt:
            cmap = tt.getBestCmap()
    except Exception as exc:
        raise UnreadableFont(f"cannot parse {font_path}: {exc}") from exc
    if cmap is None:
        raise UnreadableFont(f"no usable cmap in {font_path}")
    return set(cmap.keys())


def render_glyph(font_path: str, char: str, out_size: int = 64) -> np.ndarray:
    """Rasterize one character to a (out_size, out_size) uint8 image.

    The glyph is drawn at 128 px on its em box, centered, then resampled
    down with a Lanczos filter so edges stay anti-aliased.
    """
    if ord(char) not in _cmap_codepoints(font_path):
        raise MissingGlyph(f"{char!r} not in cmap of {font_path}")
    try:
        font = ImageFont.truetype(font_path, RENDER_SIZE)
    except Exception as exc:
        raise UnreadableFont(f"cannot open {font_path}: {exc}") from exc

    ascent, descent = font.getmetrics()
    em_h = ascent + descent
    adv = int(round(font.getlength(char)))
    side = max(em_h, adv) * 2  # headroom for overshoot and negative bearings
    canvas = Image.new("L", (side, side), color=255)
    draw = ImageDraw.Draw(canvas)
    # default anchor puts (x, y) at the left edge, ascender line
    draw.text(((side - adv) // 2, (side - em_h) // 2), char, font=font, fill=0)
    # crop the em square centered on the em box
    cx, cy = side // 2, side // 2
    half = em_h // 2
    box = (cx - half, cy - half, cx - half + em_h, cy - half + em_h)
    glyph = canvas.crop(box).resize((out_size, out_size), Image.LANCZOS)
    return np.asarray(glyph, dtype=np.uint8)


def render_font(font_path: str, charset: str, out_size: int = 64) -> np.ndarray:
    """Rasterize every charset character; (n_chars, out_size, out_size)."""
    return np.stack([render_glyph(font_path, c, out_size) for c in charset])


def load_attribute_annotations(csv_path: str, attribute_names: Sequence[str]) -> Dict[str, np.ndarray]:
    """Read the annotation table and rescale raw scores from [0, 100] to [0, 1].

    Returns font_id -> float64 vector ordered like attribute_names.
    """
    names = list(attribute_names)
    out: Dict[str, np.ndarray] = {}
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != len(names) + 1:
            raise BadRowLength(f"header must be font_id plus {len(names)} attribute columns")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise BadRowLength(f"{csv_path}:{lineno}: expected {len(names) + 1} fields, got {len(row)}")
            font_id = row[0].strip()
            if font_id in out:
                raise DuplicateFontId(f"{csv_path}:{lineno}: duplicate font_id {font_id!r}")
            values = np.array([float(v) for v in row[1:]], dtype=np.float64)
            if (values < 0.0).any() or (values > 100.0).any():
                raise OutOfRange(f"{csv_path}:{lineno}: raw scores must lie in [0, 100]")
            out[font_id] = values / 100.0
    return out


@dataclass
class FontRecord:
    """One font: its rendered charset and, when annotated, its attributes."""

    font_id: str
    glyphs: np.ndarray                    # (n_chars, H, W) uint8
    attributes: Optional[np.ndarray] = None  # (n_attr,) in [0, 1] or None

    @property
    def labeled(self) -> bool:
        return self.attributes is not None


@dataclass
class TransferSample:
    """Index tuple for one training pair: content char k moves from the
    source font's style to the target font's attributes."""

    source: int            # index into dataset.fonts
    target: int
    char_index: int
    ref_indices: Tuple[int, ...]  # m distinct charset indices, drawn from the source font


class FontDataset:
    """In-memory glyph corpus with labeled / unlabeled splits."""

    def __init__(self, fonts: List[FontRecord], charset: str, attribute_names: Sequence[str]):
        if not fonts:
            raise EmptyDataset("dataset has no fonts")
        if not charset:
            raise EmptyDataset("dataset has an empty charset")
        self.fonts = fonts
        self.charset = charset
        self.attribute_names = list(attribute_names)
        res = fonts[0].glyphs.shape[1:]
        for f in fonts:
            if f.glyphs.shape != (len(charset), *res):
                raise InconsistentCharset(
                    f"font {f.font_id!r} has glyph stack {f.glyphs.shape}, expected {(len(charset), *res)}"
                )
            if f.attributes is not None and len(f.attributes) != len(self.attribute_names):
                raise BadRowLength(f"font {f.font_id!r} has {len(f.attributes)} attribute values")
        self.resolution = res[0]
        self.labeled_indices = [i for i, f in enumerate(fonts) if f.labeled]
        self.unlabeled_indices = [i for i, f in enumerate(fonts) if not f.labeled]
        # row of each unlabeled font inside the learnable attribute store
        self.unlabeled_row = {fi: row for row, fi in enumerate(self.unlabeled_indices)}

    def __len__(self) -> int:
        return len(self.fonts)

    @property
    def n_chars(self) -> int:
        return len(self.charset)

    def glyph(self, font_index: int, char_index: int) -> np.ndarray:
        """One glyph as float32 (1, H, W) in [-1, 1]."""
        return to_float(self.fonts[font_index].glyphs[char_index])[None]

    def glyph_stack(self, font_index: int, char_indices: Sequence[int]) -> np.ndarray:
        """(len(indices), H, W) float32 view of several glyphs of one font."""
        return to_float(self.fonts[font_index].glyphs[np.asarray(char_indices, dtype=np.int64)])

    def labeled_attribute_matrix(self) -> np.ndarray:
        """(n_labeled, n_attr) rows ordered like labeled_indices."""
        return np.stack([self.fonts[i].attributes for i in self.labeled_indices])


def sample_training_pair(dataset: FontDataset, rng: np.random.Generator, m: int) -> TransferSample:
    """Draw one source/target/char/style-ref tuple.

    The source font is uniform over every font, so it is labeled with
    probability n_labeled / n_fonts. The target is labeled with probability
    1/2 whenever unlabeled fonts exist (uniform inside the chosen split),
    otherwise uniform over the labeled fonts. source == target pairs are kept.
    """
    if len(dataset) == 0 or dataset.n_chars == 0:
        raise EmptyDataset("cannot sample from an empty dataset")
    if not dataset.labeled_indices:
        raise EmptyDataset("need at least one labeled font to sample targets")
    source = int(rng.integers(len(dataset)))
    if dataset.unlabeled_indices and rng.random() < 0.5:
        target = int(rng.choice(dataset.unlabeled_indices))
    else:
        target = int(rng.choice(dataset.labeled_indices))
    char_index = int(rng.integers(dataset.n_chars))
    refs = rng.choice(dataset.n_chars, size=min(m, dataset.n_chars), replace=False)
    return TransferSample(source, target, char_index, tuple(int(r) for r in refs))


def collate_pairs(dataset: FontDataset, samples: Sequence[TransferSample]) -> Dict[str, np.ndarray]:
    """Stack samples into batch arrays (attributes are resolved by the
    trainer, which owns the learnable store for unlabeled fonts)."""
    return {
        "source_glyph": np.stack([dataset.glyph(s.source, s.char_index) for s in samples]),
        "target_glyph": np.stack([dataset.glyph(s.target, s.char_index) for s in samples]),
        "style_refs": np.stack([dataset.glyph_stack(s.source, s.ref_indices) for s in samples]),
        "char_index": np.array([s.char_index for s in samples], dtype=np.int64),
        "source_font": np.array([s.source for s in samples], dtype=np.int64),
        "target_font": np.array([s.target for s in samples], dtype=np.int64),
    }


def _read_png(path: str, expect: Optional[int]) -> np.ndarray:
    img = Image.open(path).convert("L")
    arr = np.asarray(img, dtype=np.uint8)
    if expect is not None and arr.shape != (expect, expect):
        raise WrongResolution(f"{path}: got {arr.shape}, expected {(expect, expect)}")
    return arr


def load_dataset(root: str, attribute_names: Sequence[str]) -> FontDataset:
    """Load an ingested dataset from its canonical layout."""
    charset_path = os.path.join(root, "charset.txt")
    with open(charset_path, encoding="utf-8") as fh:
        charset = parse_charset(fh.read())
    annotations = {}
    csv_path = os.path.join(root, "attributes.csv")
    if os.path.exists(csv_path):
        annotations = load_attribute_annotations(csv_path, attribute_names)

    images_root = os.path.join(root, "images")
    if not os.path.isdir(images_root):
        raise NoFonts(f"no images/ directory under {root}")
    font_ids = sorted(d for d in os.listdir(images_root) if os.path.isdir(os.path.join(images_root, d)))
    if not font_ids:
        raise NoFonts(f"no font directories under {images_root}")

    fonts: List[FontRecord] = []
    expect: Optional[int] = None
    for font_id in font_ids:
        fdir = os.path.join(images_root, font_id)
        glyphs = []
        for idx in range(len(charset)):
            path = os.path.join(fdir, f"{idx}.png")
            if not os.path.exists(path):
                raise InconsistentCharset(f"font {font_id!r} is missing glyph {idx}")
            arr = _read_png(path, expect)
            expect = arr.shape[0]
            glyphs.append(arr)
        fonts.append(FontRecord(font_id, np.stack(glyphs), annotations.get(font_id)))
    return FontDataset(fonts, charset, attribute_names)


def build_dataset(
    fonts_dir: str,
    out_root: str,
    attribute_names: Sequence[str],
    charset_spec: str = "a-zA-Z",
    attributes_csv: Optional[str] = None,
    out_size: int = 64,
) -> FontDataset:
    """Render every font file under fonts_dir into the canonical layout.

    Fonts listed in attributes_csv become the labeled split; the rest are
    unlabeled. Font ids are the file stems.
    """
    charset = parse_charset(charset_spec)
    paths = sorted(
        os.path.join(fonts_dir, name)
        for name in os.listdir(fonts_dir)
        if name.lower().endswith(FONT_EXTENSIONS)
    )
    if not paths:
        raise NoFonts(f"no font files under {fonts_dir}")
    annotations = {}
    if attributes_csv:
        annotations = load_attribute_annotations(attributes_csv, attribute_names)

    os.makedirs(os.path.join(out_root, "images"), exist_ok=True)
    with open(os.path.join(out_root, "charset.txt"), "w", encoding="utf-8") as fh:
        fh.write(charset_spec + "\n")

    fonts: List[FontRecord] = []
    labeled_rows: List[Tuple[str, np.ndarray]] = []
    for path in paths:
        font_id = os.path.splitext(os.path.basename(path))[0]
        glyphs = render_font(path, charset, out_size)
        fdir = os.path.join(out_root, "images", font_id)
        os.makedirs(fdir, exist_ok=True)
        for idx in range(len(charset)):
            Image.fromarray(glyphs[idx]).save(os.path.join(fdir, f"{idx}.png"))
        attrs = annotations.get(font_id)
        if attrs is not None:
            labeled_rows.append((font_id, attrs))
        fonts.append(FontRecord(font_id, glyphs, attrs))

    if labeled_rows:
        with open(os.path.join(out_root, "attributes.csv"), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["font_id", *attribute_names])
            for font_id, attrs in labeled_rows:
                writer.writerow([font_id, *[f"{v * 100.0:.6g}" for v in attrs]])
    return FontDataset(fonts, charset, attribute_names)
