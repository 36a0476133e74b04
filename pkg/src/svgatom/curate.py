"""Batch dataset curation: ingest, simplify, dedup, filter, split, emit."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import metrics, raster, tokens
from .atomize import SimplificationReport, atomize, to_svg_text
from .errors import DuplicateId, EmptyGeometry, SvgAtomError
from .scene import parse_svg


@dataclass
class ManifestRecord:
    id: str
    file: str
    caption: str | None = None
    clip_score: float | None = None
    source: str | None = None
    split: str | None = None
    # filled in as the record moves through the pipeline
    svg_bytes: bytes = b""
    atomic: object = None
    seq: object = None
    render: object = None


@dataclass
class CurationConfig:
    clip_min: float = 30.0
    dedup_hamming: int = 0
    split_ratios: tuple = (0.90, 0.05, 0.05)
    seed: int = 0
    raster_size: int = 200


@dataclass
class StatsReport:
    per_split: dict = field(default_factory=dict)
    mean_tokens: float = 0.0
    median_tokens: float = 0.0
    command_histogram: dict = field(default_factory=dict)
    dropped: dict = field(default_factory=dict)
    ingested: int = 0
    emitted: int = 0

    def reconciled(self) -> bool:
        return self.ingested == self.emitted + sum(self.dropped.values())


SPLITS = ("train", "val", "test")


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------


def ingest(root_dir, manifest_path=None) -> tuple[list, list]:
    """Collect *.svg under root; join optional JSONL manifest rows by path.

    Returns (records, unmatched_manifest_rows).
    """
    records = []
    by_file = {}
    for dirpath, _dirs, files in sorted(os.walk(root_dir)):
        for name in sorted(files):
            if not name.lower().endswith(".svg"):
                continue
            full = os.path.join(dirpath, name)
            rel = os.path.relpath(full, root_dir).replace(os.sep, "/")
            rec = ManifestRecord(id=rel[:-4], file=rel)
            records.append(rec)
            by_file[rel] = rec
    unmatched = []
    if manifest_path:
        seen_ids = set()
        with open(manifest_path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                rid = row.get("id")
                if rid is not None:
                    if rid in seen_ids:
                        raise DuplicateId(f"duplicate manifest id {rid!r}")
                    seen_ids.add(rid)
                rec = by_file.get(row.get("file"))
                if rec is None:
                    unmatched.append(row)
                    continue
                if rid is not None:
                    rec.id = rid
                rec.caption = row.get("caption", rec.caption)
                rec.clip_score = row.get("clip_score", rec.clip_score)
                rec.source = row.get("source", rec.source)
                if row.get("split") in SPLITS:
                    rec.split = row["split"]
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise DuplicateId("record ids are not unique")
    return records, unmatched


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------


def simplify_records(records, root_dir, config: CurationConfig) -> tuple[list, dict]:
    """Parse + atomize + tokenize + render each record; drop failures."""
    kept = []
    dropped = {"parse-error": 0, "empty-geometry": 0}
    for rec in records:
        path = os.path.join(root_dir, rec.file)
        try:
            with open(path, "rb") as fh:
                rec.svg_bytes = fh.read()
            tree = parse_svg(rec.svg_bytes.decode("utf-8"))
            rec.atomic = atomize(tree, SimplificationReport())
        except EmptyGeometry:
            dropped["empty-geometry"] += 1
            continue
        except (SvgAtomError, UnicodeDecodeError):
            dropped["parse-error"] += 1
            continue
        rec.seq = tokens.encode(rec.atomic)
        rec.render = raster.rasterize(
            rec.atomic, raster.RenderOptions(size=config.raster_size))
        kept.append(rec)
    return kept, dropped


def dedup(records, dedup_hamming: int = 0) -> tuple[list, int]:
    """bytes -> token-sequence -> raster dHash passes; first occurrence wins."""
    kept = []
    n_dropped = 0
    seen_bytes = set()
    seen_tokens = set()
    hashes = []
    for rec in records:
        bh = hashlib.sha256(rec.svg_bytes).hexdigest()
        th = hashlib.sha256(" ".join(map(str, rec.seq.ids)).encode()).hexdigest()
        if bh in seen_bytes or th in seen_tokens:
            n_dropped += 1
            continue
        if dedup_hamming >= 0:
            dh = metrics.dhash(rec.render)
            if any(metrics.hamming(dh, h) <= dedup_hamming for h in hashes):
                n_dropped += 1
                continue
            hashes.append(dh)
        seen_bytes.add(bh)
        seen_tokens.add(th)
        kept.append(rec)
    return kept, n_dropped


def filter_blank(records, background=(255, 255, 255)) -> tuple[list, int]:
    """Drop records whose raster is entirely the background color."""
    kept = []
    n_dropped = 0
    for rec in records:
        if bool(np.all(rec.render.rgb() == np.array(background, np.uint8))):
            n_dropped += 1
        else:
            kept.append(rec)
    return kept, n_dropped


def filter_clip(records, clip_min: float = 30.0) -> tuple[list, int]:
    """Drop records whose clip_score is present and below the threshold."""
    kept = []
    n_dropped = 0
    for rec in records:
        if rec.clip_score is not None and rec.clip_score < clip_min:
            n_dropped += 1
        else:
            kept.append(rec)
    return kept, n_dropped


def _split_key(rid: str, seed: int) -> float:
    digest = hashlib.sha256(f"{seed}:{rid}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2.0 ** 64


def assign_splits(records, ratios=(0.90, 0.05, 0.05), seed: int = 0) -> list:
    """Deterministic keyed-hash split; manifest pre-assignments respected."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SvgAtomError(f"split ratios {ratios} do not sum to 1")
    c1 = ratios[0]
    c2 = ratios[0] + ratios[1]
    for rec in records:
        if rec.split in SPLITS:
            continue
        u = _split_key(rec.id, seed)
        rec.split = "train" if u < c1 else ("val" if u < c2 else "test")
    return records


# ---------------------------------------------------------------------------
# Emit
# ---------------------------------------------------------------------------


_CMD_LETTER = {"Move": "M", "Line": "L", "Cubic": "C", "Arc": "A", "Close": "Z"}


def _count_commands(atomic) -> dict:
    hist: dict = {}
    for path in atomic.paths:
        for cmd in path.commands:
            letter = _CMD_LETTER[type(cmd).__name__]
            hist[letter] = hist.get(letter, 0) + 1
    return hist


def emit(records, out_dir, stats: StatsReport) -> StatsReport:
    """Write svg/token/ppm files plus JSONL manifest and stats report."""
    os.makedirs(out_dir, exist_ok=True)
    for sub in ("svg", "tokens", "ppm"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)
    manifest_lines = []
    lengths = []
    for rec in records:
        safe = rec.id.replace("/", "__")
        svg_text = to_svg_text(rec.atomic)
        svg_path = os.path.join(out_dir, "svg", safe + ".svg")
        with open(svg_path, "w") as fh:
            fh.write(svg_text)
        tokens.write_tokens_text(rec.seq, os.path.join(out_dir, "tokens", safe + ".txt"))
        raster.write_ppm(rec.render, os.path.join(out_dir, "ppm", safe + ".ppm"))
        sha = hashlib.sha256(svg_text.encode()).hexdigest()
        manifest_lines.append(json.dumps({
            "id": rec.id,
            "file": f"svg/{safe}.svg",
            "split": rec.split,
            "caption": rec.caption,
            "clip_score": rec.clip_score,
            "source": rec.source,
            "n_tokens": len(rec.seq.ids),
            "n_paths": len(rec.atomic.paths),
            "sha256": sha,
        }))
        lengths.append(len(rec.seq.ids))
        stats.per_split[rec.split] = stats.per_split.get(rec.split, 0) + 1
        for k, v in _count_commands(rec.atomic).items():
            stats.command_histogram[k] = stats.command_histogram.get(k, 0) + v
    with open(os.path.join(out_dir, "manifest.jsonl"), "w") as fh:
        fh.write("\n".join(manifest_lines) + ("\n" if manifest_lines else ""))
    stats.emitted = len(records)
    if lengths:
        stats.mean_tokens = float(np.mean(lengths))
        stats.median_tokens = float(np.median(lengths))
    with open(os.path.join(out_dir, "stats.json"), "w") as fh:
        json.dump({
            "ingested": stats.ingested,
            "emitted": stats.emitted,
            "per_split": {k: stats.per_split[k] for k in sorted(stats.per_split)},
            "mean_tokens": stats.mean_tokens,
            "median_tokens": stats.median_tokens,
            "command_histogram": {k: stats.command_histogram[k]
                                  for k in sorted(stats.command_histogram)},
            "dropped": {k: stats.dropped[k] for k in sorted(stats.dropped)},
        }, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "stats.txt"), "w") as fh:
        fh.write(format_stats(stats))
    return stats


def format_stats(stats: StatsReport) -> str:
    rows = [("ingested", stats.ingested), ("emitted", stats.emitted)]
    rows += [(f"split {k}", v) for k, v in sorted(stats.per_split.items())]
    rows += [(f"dropped {k}", v) for k, v in sorted(stats.dropped.items())]
    rows += [("mean tokens", round(stats.mean_tokens, 2)),
             ("median tokens", round(stats.median_tokens, 2))]
    rows += [(f"commands {k}", v) for k, v in sorted(stats.command_histogram.items())]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows) + "\n"


def curate(root_dir, out_dir, config: CurationConfig | None = None,
           manifest_path=None) -> StatsReport:
    """Run the full pipeline and write the dataset to out_dir."""
    config = config or CurationConfig()
    stats = StatsReport()
    records, _unmatched = ingest(root_dir, manifest_path)
    stats.ingested = len(records)
    records, drops = simplify_records(records, root_dir, config)
    stats.dropped.update(drops)
    records, n = dedup(records, config.dedup_hamming)
    stats.dropped["duplicate"] = n
    records, n = filter_blank(records)
    stats.dropped["blank"] = n
    records, n = filter_clip(records, config.clip_min)
    stats.dropped["clip"] = n
    records = assign_splits(records, config.split_ratios, config.seed)
    return emit(records, out_dir, stats)
