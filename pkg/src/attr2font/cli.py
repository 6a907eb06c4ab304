"""Command line interface.

    attr2font ingest      render font files into the dataset layout
    attr2font train       fit a model on an ingested dataset
    attr2font generate    synthesize a charset for an attribute vector
    attr2font interpolate sweep between two attribute vectors
    attr2font edit        sweep one attribute, others fixed
    attr2font eval        metric report for a checkpoint on a dataset
    attr2font serve       HTTP inference service
"""

import argparse
import json
import os
from typing import Dict, List, Optional, Sequence

import numpy as np
from PIL import Image

from .attributes import attribute_names
from .config import ModelConfig, TrainConfig
from .data import build_dataset, load_dataset
from .errors import Attr2FontError
from .evaluate import evaluate
from .infer import EDIT_SWEEP, InferenceSession, random_attributes


def _parse_attr_arg(arg: str, names: Sequence[str]) -> np.ndarray:
    """JSON attribute payload, inline or @file: a {name: value} map, a flat
    list, or the literal "random"."""
    if arg == "random":
        return random_attributes(np.random.default_rng(), len(names))
    text = arg
    if arg.startswith("@"):
        with open(arg[1:], encoding="utf-8") as fh:
            text = fh.read()
    data = json.loads(text)
    if isinstance(data, dict):
        unknown = sorted(k for k in data if k not in names)
        if unknown:
            raise SystemExit(f"unknown attribute names: {', '.join(unknown)}")
        return np.array([float(data.get(n, 0.5)) for n in names], dtype=np.float64)
    return np.asarray(data, dtype=np.float64)


def _write_stack(out_dir: str, charset: str, indices: List[int], stack: np.ndarray) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for pos, k in enumerate(indices):
        Image.fromarray(stack[pos]).save(os.path.join(out_dir, f"{k}.png"))
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump({"chars": {str(k): charset[k] for k in indices}}, fh, indent=2)


def _indices_for_text(session: InferenceSession, text: Optional[str]) -> List[int]:
    if text is None:
        return list(range(len(session.charset)))
    missing = sorted({c for c in text if c not in session.charset})
    if missing:
        raise SystemExit(f"characters outside the charset: {', '.join(missing)}")
    return [session.charset.index(c) for c in text]


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--base-width", type=int, default=64)
    p.add_argument("--max-width", type=int, default=512)
    p.add_argument("--style-dim", type=int, default=256)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--resblocks", type=int, default=16)
    p.add_argument("--refs", type=int, default=4, help="style reference glyphs per sample")


def _model_config(args, n_chars: int, resolution: int) -> ModelConfig:
    return ModelConfig(
        n_chars=n_chars, resolution=resolution, levels=args.levels,
        base_width=args.base_width, max_width=args.max_width,
        style_dim=args.style_dim, embed_dim=args.embed_dim,
        n_resblocks=args.resblocks, m=args.refs,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="attr2font", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="render fonts into the dataset layout")
    p.add_argument("--fonts", required=True, help="directory of .ttf/.otf files")
    p.add_argument("--out", required=True)
    p.add_argument("--attributes", help="CSV of raw scores in [0, 100]; omitted fonts are unlabeled")
    p.add_argument("--charset", default="a-zA-Z")
    p.add_argument("--size", type=int, default=64)

    p = sub.add_parser("train", help="train on an ingested dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="runs")
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resume")
    p.add_argument("--checkpoint-every", type=int, default=1)
    p.add_argument("--log-every", type=int, default=1)
    p.add_argument("--no-validation", action="store_true")
    _add_model_flags(p)

    p = sub.add_parser("generate", help="synthesize a charset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--attributes", required=True, help='JSON map/list, @file, or "random"')
    p.add_argument("--text")
    p.add_argument("--source-font")

    p = sub.add_parser("interpolate", help="sweep between two attribute vectors")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--attributes-a", required=True)
    p.add_argument("--attributes-b", required=True)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--text")
    p.add_argument("--source-font")

    p = sub.add_parser("edit", help="sweep one attribute")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--attributes", required=True)
    p.add_argument("--attribute", required=True, help="name of the attribute to sweep")
    p.add_argument("--values", default=",".join(str(v) for v in EDIT_SWEEP))
    p.add_argument("--text")
    p.add_argument("--source-font")

    p = sub.add_parser("eval", help="metric report on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-fonts", type=int)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except Attr2FontError as exc:
        raise SystemExit(f"error: {exc}")


def _dispatch(args) -> int:
    names = attribute_names()

    if args.command == "ingest":
        ds = build_dataset(args.fonts, args.out, names, charset_spec=args.charset,
                           attributes_csv=args.attributes, out_size=args.size)
        print(f"ingested {len(ds)} fonts ({len(ds.labeled_indices)} labeled) into {args.out}")
        return 0

    if args.command == "train":
        from .train import train

        dataset = load_dataset(args.data, names)
        mc = _model_config(args, dataset.n_chars, dataset.resolution)
        tc = TrainConfig(
            epochs=args.epochs, batch_size=args.batch_size, lr=args.lr, seed=args.seed,
            checkpoint_every=args.checkpoint_every, log_every=args.log_every,
            validation=not args.no_validation,
        )
        path = train(dataset, mc, tc, out_dir=args.out, resume=args.resume)
        print(f"checkpoint written to {path}")
        return 0

    if args.command == "serve":
        from .service import run_service

        run_service(args.checkpoint, host=args.host, port=args.port)
        return 0

    if args.command == "eval":
        session = InferenceSession.from_checkpoint(args.checkpoint)
        dataset = load_dataset(args.data, names)
        report = evaluate(session, dataset, args.out, max_fonts=args.max_fonts)
        rec = report["reconstruction"]
        print(f"pix_acc={rec['pix_acc']:.4f} ssim={rec['ssim']:.4f} over {rec['n_glyphs']} glyphs")
        print(f"report written to {os.path.join(args.out, 'report.json')}")
        return 0

    session = InferenceSession.from_checkpoint(args.checkpoint)
    indices = _indices_for_text(session, args.text)

    if args.command == "generate":
        attrs = _parse_attr_arg(args.attributes, session.attribute_names)
        stack, used = session.synthesize_charset(attrs, source_font=args.source_font, chars=indices)
        _write_stack(args.out, session.charset, indices, stack)
        print(f"wrote {len(indices)} glyphs to {args.out} (source font {used})")
        return 0

    if args.command == "interpolate":
        a = _parse_attr_arg(args.attributes_a, session.attribute_names)
        b = _parse_attr_arg(args.attributes_b, session.attribute_names)
        steps = session.interpolate(a, b, lambdas=args.steps,
                                    source_font=args.source_font, chars=indices)
        for i, step in enumerate(steps):
            _write_stack(os.path.join(args.out, f"step_{i:02d}"), session.charset, indices, step["glyphs"])
        print(f"wrote {len(steps)} interpolation steps to {args.out}")
        return 0

    if args.command == "edit":
        base = _parse_attr_arg(args.attributes, session.attribute_names)
        values = [float(v) for v in args.values.split(",")]
        steps = session.edit(base, args.attribute, values=values,
                             source_font=args.source_font, chars=indices)
        for step in steps:
            _write_stack(os.path.join(args.out, f"value_{step['value']:.2f}"),
                         session.charset, indices, step["glyphs"])
        print(f"wrote {len(steps)} sweep values to {args.out}")
        return 0

    raise SystemExit(f"unknown command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
