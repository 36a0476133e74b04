"""Command-line entry point.

Subcommands: simplify, tokenize, detokenize, render, curate, stats, fit,
sample, eval. Exit code 0 on success, 1 on any fatal error, 2 on bad
arguments (argparse default). All randomness flows from --seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench, curate, generate, metrics, raster, tokens
from .atomize import atomize, to_svg_text
from .errors import SvgAtomError
from .scene import parse_svg


def _load_atomic(path):
    with open(path) as fh:
        return atomize(parse_svg(fh.read()))


def cmd_simplify(args) -> int:
    with open(args.output, "w") as fh:
        fh.write(to_svg_text(_load_atomic(args.input)))
    return 0


def cmd_tokenize(args) -> int:
    seq = tokens.encode(_load_atomic(args.input))
    if args.binary:
        tokens.write_tokens_binary(seq, args.output)
    else:
        tokens.write_tokens_text(seq, args.output)
    return 0


def cmd_detokenize(args) -> int:
    svg = tokens.decode(tokens.read_tokens(args.input))
    with open(args.output, "w") as fh:
        fh.write(to_svg_text(svg))
    return 0


def cmd_render(args) -> int:
    opts = raster.RenderOptions(size=args.size, supersample=args.ss)
    raster.write_ppm(raster.rasterize(_load_atomic(args.input), opts), args.output)
    return 0


def cmd_curate(args) -> int:
    ratios = tuple(float(x) for x in args.split.split(","))
    if len(ratios) != 3:
        raise SvgAtomError("--split expects three comma-separated ratios")
    config = curate.CurationConfig(
        clip_min=args.clip_min, dedup_hamming=args.dedup_hamming,
        split_ratios=ratios, seed=args.seed)
    stats = curate.curate(args.input, args.out, config, args.manifest)
    sys.stdout.write(curate.format_stats(stats))
    return 0


def cmd_stats(args) -> int:
    lengths = []
    per_split: dict = {}
    with open(args.manifest) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            lengths.append(row.get("n_tokens", 0))
            split = row.get("split") or "unassigned"
            per_split[split] = per_split.get(split, 0) + 1
    if not lengths:
        raise SvgAtomError(f"{args.manifest}: empty manifest")
    import numpy as np
    report = curate.StatsReport(
        per_split=per_split,
        mean_tokens=float(np.mean(lengths)),
        median_tokens=float(np.median(lengths)),
        ingested=len(lengths), emitted=len(lengths))
    sys.stdout.write(curate.format_stats(report))
    return 0


def cmd_fit(args) -> int:
    corpus = []
    for dirpath, _dirs, files in sorted(os.walk(args.input)):
        for name in sorted(files):
            full = os.path.join(dirpath, name)
            if name.endswith(".svg"):
                corpus.append(tokens.encode(_load_atomic(full)))
            elif name.endswith(".txt"):
                corpus.append(tokens.read_tokens(full))
    model = generate.fit(corpus, order=args.order)
    generate.save_model(model, args.output)
    print(f"fit order-{args.order} model on {len(corpus)} sequences")
    return 0


def cmd_sample(args) -> int:
    model = generate.load_model(args.model)
    os.makedirs(args.output, exist_ok=True)
    for i in range(args.n):
        cfg = generate.SamplerConfig(top_k=args.top_k, top_p=args.top_p,
                                     seed=args.seed + i)
        seq = generate.sample(model, cfg)
        svg = tokens.decode(seq)
        stem = os.path.join(args.output, f"sample_{i:05d}")
        tokens.write_tokens_text(seq, stem + ".txt")
        with open(stem + ".svg", "w") as fh:
            fh.write(to_svg_text(svg))
    print(f"wrote {args.n} samples to {args.output}")
    return 0


def cmd_eval(args) -> int:
    pairs = bench.read_pairs(args.pairs)
    opts = raster.RenderOptions(size=args.size)
    rows = []
    with open(args.output, "w") as fh:
        for pair in pairs:
            report, wall_ms = bench.evaluate_pair(pair, opts, args.export_rasters)
            row = json.loads(report.to_json())
            row["wall_ms"] = wall_ms
            rows.append(row)
            fh.write(json.dumps(row) + "\n")
    summary = bench.aggregate(rows)
    with open(args.output + ".summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"evaluated {len(rows)} pairs; "
          f"mean ssim {summary['ssim']['mean']:.4f}, "
          f"mean mse {summary['mse']['mean']:.5f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svgatom",
        description="Normalize SVGs to atomic form, tokenize, render, curate.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simplify", help="normalize an SVG to atomic form")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("tokenize", help="encode an SVG as token ids")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--binary", action="store_true")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("detokenize", help="decode a token file back to SVG")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_detokenize)

    p = sub.add_parser("render", help="rasterize an SVG to PPM")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--ss", type=int, default=4)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("curate", help="run the dataset curation pipeline")
    p.add_argument("--input", required=True)
    p.add_argument("--manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--clip-min", type=float, default=30.0)
    p.add_argument("--dedup-hamming", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", default="0.90,0.05,0.05")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("stats", help="summarize an emitted manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fit", help="fit the n-gram model on a directory")
    p.add_argument("--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="sample grammar-valid sequences")
    p.add_argument("--model", required=True)
    p.add_argument("-n", type=int, default=1)
    p.add_argument("--top-k", type=int, default=50)
    p.add_argument("--top-p", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="evaluate reference/candidate pairs")
    p.add_argument("--pairs", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--export-rasters")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SvgAtomError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
