"""svgatom: SVG normalization, tokenization, rasterization and curation."""

from .atomize import AtomicPath, AtomicSVG, atomize, to_svg_text
from .scene import SceneTree, parse_svg
from .tokens import TokenSeq, decode, encode

__all__ = [
    "AtomicPath", "AtomicSVG", "SceneTree", "TokenSeq",
    "atomize", "decode", "encode", "parse_svg", "to_svg_text",
]

__version__ = "0.1.0"
