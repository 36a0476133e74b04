"""Pixel- and sequence-space measurements: MSE, SSIM, token stats, dHash."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import DimensionMismatch, TooSmall
from .raster import Raster
from .tokens import PAD, TokenSeq


@dataclass
class MetricReport:
    id: str
    mse: float
    ssim: float
    n_tokens: int
    n_paths: int
    n_commands: int
    command_histogram: dict | None = None

    def to_json(self) -> str:
        obj = {"id": self.id, "mse": self.mse, "ssim": self.ssim,
               "n_tokens": self.n_tokens, "n_paths": self.n_paths,
               "n_commands": self.n_commands}
        return json.dumps(obj)


def _check_dims(a: Raster, b: Raster):
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"{a.width}x{a.height} vs {b.width}x{b.height}")


def mse(a: Raster, b: Raster) -> float:
    """Mean squared RGB difference on the [0,1] scale."""
    _check_dims(a, b)
    da = a.rgb().astype(np.float64) / 255.0
    db = b.rgb().astype(np.float64) / 255.0
    return float(np.mean((da - db) ** 2))


def _luma(r: Raster) -> np.ndarray:
    rgb = r.rgb().astype(np.float64)
    return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


_WINDOW = _gaussian_window()
_C1 = (0.01 * 255) ** 2
_C2 = (0.03 * 255) ** 2


def ssim(a: Raster, b: Raster) -> float:
    """Mean local SSIM on luma, 11x11 Gaussian window, valid positions only."""
    _check_dims(a, b)
    if a.width < 11 or a.height < 11:
        raise TooSmall(f"SSIM needs at least 11x11, got {a.width}x{a.height}")
    x = _luma(a)
    y = _luma(b)
    w = _WINDOW
    mu_x = convolve2d(x, w, mode="valid")
    mu_y = convolve2d(y, w, mode="valid")
    mu_xx = mu_x * mu_x
    mu_yy = mu_y * mu_y
    mu_xy = mu_x * mu_y
    sig_xx = convolve2d(x * x, w, mode="valid") - mu_xx
    sig_yy = convolve2d(y * y, w, mode="valid") - mu_yy
    sig_xy = convolve2d(x * y, w, mode="valid") - mu_xy
    num = (2 * mu_xy + _C1) * (2 * sig_xy + _C2)
    den = (mu_xx + mu_yy + _C1) * (sig_xx + sig_yy + _C2)
    return float(np.mean(num / den))


def token_length(seq: TokenSeq | list) -> int:
    ids = seq.ids if isinstance(seq, TokenSeq) else seq
    return sum(1 for t in ids if t != PAD)


# ---------------------------------------------------------------------------
# Perceptual hash
# ---------------------------------------------------------------------------


def _block_reduce(img: np.ndarray, rows: int, cols: int) -> np.ndarray:
    h, w = img.shape
    r_edges = np.linspace(0, h, rows + 1).round().astype(int)
    c_edges = np.linspace(0, w, cols + 1).round().astype(int)
    out = np.empty((rows, cols))
    for i in range(rows):
        for j in range(cols):
            block = img[r_edges[i]:r_edges[i + 1], c_edges[j]:c_edges[j + 1]]
            out[i, j] = block.mean() if block.size else 0.0
    return out


def dhash(r: Raster) -> int:
    """64-bit difference hash: horizontal gradient signs of a 9x8 downsample."""
    small = _block_reduce(_luma(r), 8, 9)
    h = 0
    bit = 0
    for row in range(8):
        for col in range(8):
            if small[row, col] < small[row, col + 1]:
                h |= 1 << bit
            bit += 1
    return h


def hamming(h1: int, h2: int) -> int:
    return bin(h1 ^ h2).count("1")
