"""Reproducible benchmark subset: per-pair pixel metrics and aggregates."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from . import metrics, raster, tokens
from .atomize import atomize
from .errors import EmptyInput
from .scene import parse_svg


@dataclass
class EvalPair:
    id: str
    reference: str  # path to SVG or PPM raster
    candidate: str  # path to SVG


def _load_reference(path, opts: raster.RenderOptions) -> raster.Raster:
    if str(path).lower().endswith(".ppm"):
        return raster.read_ppm(path)
    with open(path) as fh:
        tree = parse_svg(fh.read())
    return raster.rasterize(atomize(tree), opts)


def evaluate_pair(pair: EvalPair, opts: raster.RenderOptions | None = None,
                  export_dir=None) -> tuple[metrics.MetricReport, float]:
    """Render both sides, compute the metric report; returns (report, wall_ms)."""
    opts = opts or raster.RenderOptions()
    t0 = time.perf_counter()
    with open(pair.candidate) as fh:
        tree = parse_svg(fh.read())
    atomic = atomize(tree)
    seq = tokens.encode(atomic)
    cand = raster.rasterize(atomic, opts)
    ref = _load_reference(pair.reference, opts)
    n_commands = sum(len(p.commands) for p in atomic.paths)
    report = metrics.MetricReport(
        id=pair.id,
        mse=metrics.mse(ref, cand),
        ssim=metrics.ssim(ref, cand),
        n_tokens=metrics.token_length(seq),
        n_paths=len(atomic.paths),
        n_commands=n_commands,
    )
    wall_ms = (time.perf_counter() - t0) * 1000.0
    if export_dir:
        import os
        os.makedirs(export_dir, exist_ok=True)
        raster.write_ppm(cand, os.path.join(export_dir, f"{pair.id}.candidate.ppm"))
        raster.write_ppm(ref, os.path.join(export_dir, f"{pair.id}.reference.ppm"))
    return report, wall_ms


def aggregate(reports: list) -> dict:
    """Permutation-invariant mean/median/stddev per metric."""
    if not reports:
        raise EmptyInput("no reports to aggregate")
    out = {}
    for key in ("mse", "ssim", "n_tokens", "n_paths", "n_commands", "wall_ms"):
        vals = [r[key] if isinstance(r, dict) else getattr(r, key, None)
                for r in reports]
        vals = [v for v in vals if v is not None]
        if not vals:
            continue
        arr = np.asarray(vals, dtype=np.float64)
        out[key] = {
            "mean": float(arr.mean()),
            "median": float(np.median(arr)),
            "stddev": float(arr.std()),
        }
    out["count"] = len(reports)
    return out


def read_pairs(path) -> list:
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            pairs.append(EvalPair(id=row["id"], reference=row["reference"],
                                  candidate=row["candidate"]))
    return pairs
