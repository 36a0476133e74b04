"""Supersampled scanline rasterizer for the atomic form.

Paths are flattened to polygons, coverage is evaluated at subsample cell
centers with the path's winding rule, and the subsample buffer is box
filtered down to the output size. Fully deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atomize import GRID, Arc, AtomicPath, AtomicSVG, Close, Cubic, Line, Move, arc_to_cubics
from .errors import BadMagic


@dataclass
class Raster:
    width: int
    height: int
    pixels: np.ndarray  # (h, w, 4) uint8, row-major RGBA

    def rgb(self) -> np.ndarray:
        return self.pixels[:, :, :3]


@dataclass
class RenderOptions:
    size: int = 200
    supersample: int = 4
    flatten_tolerance: float = 0.1  # viewbox units
    background: tuple = (255, 255, 255, 255)


# ---------------------------------------------------------------------------
# Curve flattening
# ---------------------------------------------------------------------------


def _flat_enough(p0, c1, c2, p3, tol) -> bool:
    dx = p3[0] - p0[0]
    dy = p3[1] - p0[1]
    norm = math.hypot(dx, dy)
    if norm < 1e-12:
        d1 = math.hypot(c1[0] - p0[0], c1[1] - p0[1])
        d2 = math.hypot(c2[0] - p0[0], c2[1] - p0[1])
        return max(d1, d2) <= tol
    d1 = abs(dx * (p0[1] - c1[1]) - dy * (p0[0] - c1[0])) / norm
    d2 = abs(dx * (p0[1] - c2[1]) - dy * (p0[0] - c2[0])) / norm
    return max(d1, d2) <= tol


def _flatten_cubic(p0, c1, c2, p3, tol, out, depth=0):
    if depth >= 24 or _flat_enough(p0, c1, c2, p3, tol):
        out.append(p3)
        return
    # de Casteljau split at t = 0.5
    ab = ((p0[0] + c1[0]) / 2, (p0[1] + c1[1]) / 2)
    bc = ((c1[0] + c2[0]) / 2, (c1[1] + c2[1]) / 2)
    cd = ((c2[0] + p3[0]) / 2, (c2[1] + p3[1]) / 2)
    abc = ((ab[0] + bc[0]) / 2, (ab[1] + bc[1]) / 2)
    bcd = ((bc[0] + cd[0]) / 2, (bc[1] + cd[1]) / 2)
    mid = ((abc[0] + bcd[0]) / 2, (abc[1] + bcd[1]) / 2)
    _flatten_cubic(p0, ab, abc, mid, tol, out, depth + 1)
    _flatten_cubic(mid, bcd, cd, p3, tol, out, depth + 1)


def flatten_path(path: AtomicPath, tolerance: float = 0.1) -> list:
    """Closed polygons (vertex lists) covering the path's subpaths."""
    polys = []
    verts: list = []
    cur = (0.0, 0.0)

    def finish():
        nonlocal verts
        if len(verts) >= 3:
            polys.append(verts)
        verts = []

    for cmd in path.commands:
        if isinstance(cmd, Move):
            finish()
            cur = cmd.p
            verts = [cur]
        elif isinstance(cmd, Line):
            cur = cmd.p
            verts.append(cur)
        elif isinstance(cmd, Cubic):
            _flatten_cubic(cur, cmd.c1, cmd.c2, cmd.p, tolerance, verts)
            cur = cmd.p
        elif isinstance(cmd, Arc):
            if cmd.rx <= 0 or cmd.ry <= 0 or cmd.p == cur:
                verts.append(cmd.p)  # degenerate arc draws as a line
            else:
                for cub in arc_to_cubics(cmd, cur):
                    _flatten_cubic(cur, cub.c1, cub.c2, cub.p, tolerance, verts)
                    cur = cub.p
            cur = cmd.p
        elif isinstance(cmd, Close):
            finish()  # polygons are filled closed either way
    finish()
    return polys


# ---------------------------------------------------------------------------
# Scanline fill
# ---------------------------------------------------------------------------


def _winding_grid(polys, xs, ys, rule: str) -> np.ndarray:
    n = len(ys)
    acc = np.zeros((n, len(xs)), np.int32)
    for poly in polys:
        m = len(poly)
        for i in range(m):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % m]
            if y1 == y2:
                continue
            sign = 1 if y2 > y1 else -1
            ylo, yhi = (y1, y2) if y2 > y1 else (y2, y1)
            i0 = np.searchsorted(ys, ylo, side="left")
            i1 = np.searchsorted(ys, yhi, side="left")
            if i0 >= i1:
                continue
            t = (ys[i0:i1] - y1) / (y2 - y1)
            xint = x1 + t * (x2 - x1)
            hit = xs[None, :] < xint[:, None]
            if rule == "evenodd":
                acc[i0:i1] += hit
            else:
                acc[i0:i1] += sign * hit
    if rule == "evenodd":
        return (acc & 1).astype(bool)
    return acc != 0


def rasterize(svg, opts: RenderOptions | None = None) -> Raster:
    """Render an AtomicSVG (or a list of AtomicPath) to RGBA pixels."""
    opts = opts or RenderOptions()
    paths = svg.paths if isinstance(svg, AtomicSVG) else list(svg)
    size = opts.size
    ss = opts.supersample
    n = size * ss
    bg = opts.background
    buf = np.empty((n, n, 4), np.uint16)
    buf[:, :] = bg
    # subsample centers in viewbox units
    coords = (np.arange(n) + 0.5) * (GRID / n)
    for path in paths:
        polys = flatten_path(path, opts.flatten_tolerance)
        if not polys:
            continue
        mask = _winding_grid(polys, coords, coords, path.fill_rule)
        buf[mask] = (*path.fill, 255)
    # box filter down with round-half-away (integer arithmetic, exact)
    sums = buf.reshape(size, ss, size, ss, 4).sum(axis=(1, 3), dtype=np.uint32)
    ss2 = ss * ss
    px = ((2 * sums + ss2) // (2 * ss2)).astype(np.uint8)
    return Raster(width=size, height=size, pixels=px)


# ---------------------------------------------------------------------------
# PPM I/O
# ---------------------------------------------------------------------------


def write_ppm(raster: Raster, path) -> None:
    """Binary PPM P6; alpha composited over opaque white."""
    rgb = raster.pixels[:, :, :3].astype(np.uint32)
    alpha = raster.pixels[:, :, 3:4].astype(np.uint32)
    out = (rgb * alpha + 255 * (255 - alpha) + 127) // 255
    with open(path, "wb") as fh:
        fh.write(f"P6\n{raster.width} {raster.height}\n255\n".encode())
        fh.write(out.astype(np.uint8).tobytes())


def read_ppm(path) -> Raster:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P6"):
        raise BadMagic(f"{path}: not a binary PPM")
    # header: magic, width, height, maxval, single whitespace, then pixels
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise BadMagic(f"{path}: truncated PPM header")
        fields.append(int(data[start:pos]))
    pos += 1  # the single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise BadMagic(f"{path}: unsupported maxval {maxval}")
    need = width * height * 3
    body = data[pos:pos + need]
    if len(body) != need:
        raise BadMagic(f"{path}: truncated PPM body")
    rgb = np.frombuffer(body, np.uint8).reshape(height, width, 3)
    px = np.empty((height, width, 4), np.uint8)
    px[:, :, :3] = rgb
    px[:, :, 3] = 255
    return Raster(width=width, height=height, pixels=px)
