"""SVG XML -> typed scene tree.

Parses a restricted but practical subset of SVG 1.1: nested groups with
transforms, the six basic shapes, path data, solid-color fills, and
use/defs resolved by structural copy. Strokes, gradients, text, filters
and friends are recorded as warnings or Unsupported paints, never
silently altered.
"""
from __future__ import annotations

import math
import re
import xml.etree.ElementTree as etree
from dataclasses import dataclass, field

from .colors import NAMED_COLORS
from .errors import (
    ArityError,
    CyclicReference,
    MalformedXml,
    NoSvgRoot,
    UnknownCommandLetter,
    UnknownTransformTerm,
)

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Affine:
    """2x3 affine matrix in SVG order: (x,y) -> (a*x + c*y + e, b*x + d*y + f)."""

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 1.0
    e: float = 0.0
    f: float = 0.0

    @staticmethod
    def identity() -> "Affine":
        return Affine()

    def multiply(self, other: "Affine") -> "Affine":
        """Matrix product self * other: apply `other` first, then `self`."""
        return Affine(
            a=self.a * other.a + self.c * other.b,
            b=self.b * other.a + self.d * other.b,
            c=self.a * other.c + self.c * other.d,
            d=self.b * other.c + self.d * other.d,
            e=self.a * other.e + self.c * other.f + self.e,
            f=self.b * other.e + self.d * other.f + self.f,
        )

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x + self.c * y + self.e, self.b * x + self.d * y + self.f)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def is_identity(self) -> bool:
        return self == Affine()


@dataclass(frozen=True)
class Solid:
    r: int
    g: int
    b: int


@dataclass(frozen=True)
class NoPaint:
    pass


@dataclass(frozen=True)
class Unsupported:
    description: str


Paint = Solid | NoPaint | Unsupported

BLACK = Solid(0, 0, 0)


@dataclass(frozen=True)
class RawCommand:
    """One expanded path command: single letter + args at its exact arity."""

    letter: str
    args: tuple[float, ...]


@dataclass
class Shape:
    kind: str  # rect|circle|ellipse|line|polyline|polygon
    params: dict
    transform: Affine = field(default_factory=Affine)
    paint: Paint = BLACK
    fill_rule: str = "nonzero"


@dataclass
class PathNode:
    commands: list
    transform: Affine = field(default_factory=Affine)
    paint: Paint = BLACK
    fill_rule: str = "nonzero"


@dataclass
class Group:
    transform: Affine = field(default_factory=Affine)
    children: list = field(default_factory=list)


SceneNode = Group | Shape | PathNode


@dataclass
class SceneTree:
    root: Group
    width_hint: float | None = None
    height_hint: float | None = None
    viewbox: tuple[float, float, float, float] | None = None
    warnings: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Path data
# ---------------------------------------------------------------------------

_ARITY = {
    "M": 2, "L": 2, "T": 2, "H": 1, "V": 1,
    "S": 4, "Q": 4, "C": 6, "A": 7, "Z": 0,
}

_NUM_RE = re.compile(r"[-+]?(?:\d*\.\d+|\d+\.?)(?:[eE][-+]?\d+)?")
_WSP_RE = re.compile(r"[\s,]*")


class _PathScanner:
    def __init__(self, d: str):
        self.d = d
        self.pos = 0

    def skip_sep(self):
        self.pos = _WSP_RE.match(self.d, self.pos).end()

    def at_end(self) -> bool:
        self.skip_sep()
        return self.pos >= len(self.d)

    def peek_letter(self) -> str | None:
        self.skip_sep()
        if self.pos < len(self.d) and self.d[self.pos].isalpha():
            return self.d[self.pos]
        return None

    def number(self) -> float:
        self.skip_sep()
        m = _NUM_RE.match(self.d, self.pos)
        if not m:
            raise ArityError(f"expected number at offset {self.pos} in path data")
        self.pos = m.end()
        return float(m.group())

    def flag(self) -> float:
        # Arc flags may be unseparated digits: "A 1 1 0 01 2 3".
        self.skip_sep()
        if self.pos < len(self.d) and self.d[self.pos] in "01":
            ch = self.d[self.pos]
            self.pos += 1
            return float(ch)
        raise ArityError(f"expected arc flag at offset {self.pos} in path data")


def parse_path_data(d: str) -> list[RawCommand]:
    """Parse an SVG `d` string into expanded single-arity commands.

    Repeated argument groups become separate commands and the implicit
    lineto after moveto is made explicit (as L/l).
    """
    scanner = _PathScanner(d)
    out: list[RawCommand] = []
    letter = None
    while not scanner.at_end():
        ch = scanner.peek_letter()
        if ch is not None:
            if ch.upper() not in _ARITY:
                raise UnknownCommandLetter(f"unknown path command {ch!r}")
            scanner.pos += 1
            letter = ch
        elif letter is None:
            raise ArityError("path data does not start with a command letter")
        elif letter in "Mm":
            # implicit lineto continuation
            letter = "L" if letter == "M" else "l"
        elif letter in "Zz":
            raise ArityError("numbers after Z without a command letter")
        arity = _ARITY[letter.upper()]
        if arity == 0:
            out.append(RawCommand(letter, ()))
            continue
        if letter.upper() == "A":
            args = (
                scanner.number(), scanner.number(), scanner.number(),
                scanner.flag(), scanner.flag(),
                scanner.number(), scanner.number(),
            )
        else:
            args = tuple(scanner.number() for _ in range(arity))
        out.append(RawCommand(letter, args))
    return out


def serialize_path_data(cmds: list[RawCommand]) -> str:
    parts = []
    for cmd in cmds:
        parts.append(cmd.letter)
        parts.extend(repr(a) if a != int(a) else str(int(a)) for a in cmd.args)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"\s*([a-zA-Z]+)\s*\(([^)]*)\)\s*,?")


def parse_transform(attr: str) -> Affine:
    """Compose a transform-list attribute into a single matrix."""
    result = Affine.identity()
    pos = 0
    attr = attr.strip()
    while pos < len(attr):
        m = _TERM_RE.match(attr, pos)
        if not m:
            raise UnknownTransformTerm(f"cannot parse transform at offset {pos}: {attr[pos:]!r}")
        name = m.group(1)
        args = [float(x) for x in _NUM_RE.findall(m.group(2))]
        result = result.multiply(_transform_term(name, args))
        pos = m.end()
    return result


def _transform_term(name: str, args: list[float]) -> Affine:
    def need(*counts):
        if len(args) not in counts:
            raise ArityError(f"{name} takes {counts} args, got {len(args)}")

    if name == "matrix":
        need(6)
        return Affine(*args)
    if name == "translate":
        need(1, 2)
        tx = args[0]
        ty = args[1] if len(args) == 2 else 0.0
        return Affine(e=tx, f=ty)
    if name == "scale":
        need(1, 2)
        sx = args[0]
        sy = args[1] if len(args) == 2 else sx
        return Affine(a=sx, d=sy)
    if name == "rotate":
        need(1, 3)
        th = math.radians(args[0])
        rot = Affine(a=math.cos(th), b=math.sin(th), c=-math.sin(th), d=math.cos(th))
        if len(args) == 3:
            cx, cy = args[1], args[2]
            return Affine(e=cx, f=cy).multiply(rot).multiply(Affine(e=-cx, f=-cy))
        return rot
    if name == "skewX":
        need(1)
        return Affine(c=math.tan(math.radians(args[0])))
    if name == "skewY":
        need(1)
        return Affine(b=math.tan(math.radians(args[0])))
    raise UnknownTransformTerm(f"unknown transform term {name!r}")


# ---------------------------------------------------------------------------
# Colors
# ---------------------------------------------------------------------------

_HEX6_RE = re.compile(r"^#([0-9a-fA-F]{6})$")
_HEX3_RE = re.compile(r"^#([0-9a-fA-F]{3})$")
_RGB_RE = re.compile(r"^rgb\(\s*([^)]*)\)$", re.IGNORECASE)


def parse_color(attr: str) -> Paint:
    """Total function from a fill/color attribute value onto Paint."""
    s = attr.strip()
    low = s.lower()
    if low == "none":
        return NoPaint()
    m = _HEX6_RE.match(s)
    if m:
        v = m.group(1)
        return Solid(int(v[0:2], 16), int(v[2:4], 16), int(v[4:6], 16))
    m = _HEX3_RE.match(s)
    if m:
        v = m.group(1)
        return Solid(int(v[0] * 2, 16), int(v[1] * 2, 16), int(v[2] * 2, 16))
    m = _RGB_RE.match(s)
    if m:
        fields = [f.strip() for f in m.group(1).split(",")]
        if len(fields) == 3:
            try:
                vals = []
                for f in fields:
                    if f.endswith("%"):
                        vals.append(round(float(f[:-1]) * 255.0 / 100.0))
                    else:
                        vals.append(round(float(f)))
                if all(0 <= v <= 255 for v in vals):
                    return Solid(*vals)
            except ValueError:
                pass
        return Unsupported(f"bad rgb() value {s!r}")
    if low in NAMED_COLORS:
        return Solid(*NAMED_COLORS[low])
    return Unsupported(f"unrecognized color {s!r}")


# ---------------------------------------------------------------------------
# Document parsing
# ---------------------------------------------------------------------------

_SHAPE_PARAMS = {
    "rect": ("x", "y", "width", "height"),
    "circle": ("cx", "cy", "r"),
    "ellipse": ("cx", "cy", "rx", "ry"),
    "line": ("x1", "y1", "x2", "y2"),
}

_HORIZONTAL = {"x", "cx", "width", "rx", "x1", "x2"}

_IGNORED_TAGS = {
    "title", "desc", "metadata", "style", "script",
    "text", "tspan", "image", "filter", "marker", "mask", "clipPath",
    "linearGradient", "radialGradient", "pattern", "symbol", "switch",
}


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


class _DocParser:
    def __init__(self, root: etree.Element):
        self.svg = root
        self.warnings: list[str] = []
        self.by_id: dict[str, etree.Element] = {}
        for el in root.iter():
            eid = el.get("id")
            if eid is not None and eid not in self.by_id:
                self.by_id[eid] = el
        self.viewbox = self._parse_viewbox(root.get("viewBox"))
        if self.viewbox:
            self.ref_w, self.ref_h = self.viewbox[2], self.viewbox[3]
        else:
            self.ref_w = self.ref_h = 200.0

    def _parse_viewbox(self, s):
        if s is None:
            return None
        vals = [float(x) for x in _NUM_RE.findall(s)]
        if len(vals) != 4 or vals[2] <= 0 or vals[3] <= 0:
            self.warnings.append(f"ignoring bad viewBox {s!r}")
            return None
        return tuple(vals)

    def length(self, el: etree.Element, name: str, default: float = 0.0) -> float:
        raw = el.get(name)
        if raw is None:
            return default
        raw = raw.strip()
        try:
            if raw.endswith("%"):
                ref = self.ref_w if name in _HORIZONTAL else self.ref_h
                return float(raw[:-1]) * ref / 100.0
            for unit in ("px", "pt", "mm", "cm", "in", "em"):
                if raw.endswith(unit):
                    if unit != "px":
                        self.warnings.append(f"treating {name}={raw!r} as user units")
                    raw = raw[: -len(unit)]
                    break
            return float(raw)
        except ValueError:
            self.warnings.append(f"bad length {name}={raw!r}, using {default}")
            return default

    def parse(self) -> SceneTree:
        root = Group()
        for child in self.svg:
            node = self.element(child, inherited_fill=None, inherited_rule=None, stack=())
            if node is not None:
                root.children.append(node)
        tree = SceneTree(root=root, viewbox=self.viewbox, warnings=self.warnings)
        w = self.svg.get("width")
        h = self.svg.get("height")
        if w is not None:
            tree.width_hint = self.length(self.svg, "width", 0.0) or None
        if h is not None:
            tree.height_hint = self.length(self.svg, "height", 0.0) or None
        return tree

    def element(self, el, inherited_fill, inherited_rule, stack):
        tag = _localname(el.tag)
        if tag in _IGNORED_TAGS:
            self.warnings.append(f"skipped <{tag}> element")
            return None
        if tag == "defs":
            return None  # referenced content only
        transform = self.transform_of(el)
        fill, rule = self.paint_of(el, inherited_fill, inherited_rule)
        if tag in ("g", "svg", "a"):
            grp = Group(transform=transform)
            for child in el:
                node = self.element(child, fill, rule, stack)
                if node is not None:
                    grp.children.append(node)
            return grp
        if tag == "use":
            return self.use(el, transform, fill, rule, stack)
        eff_fill = fill if fill is not None else BLACK
        eff_rule = rule if rule is not None else "nonzero"
        if tag == "path":
            d = el.get("d", "")
            cmds = parse_path_data(d)
            return PathNode(commands=cmds, transform=transform, paint=eff_fill, fill_rule=eff_rule)
        if tag in _SHAPE_PARAMS:
            params = {k: self.length(el, k) for k in _SHAPE_PARAMS[tag]}
            if tag == "rect":
                # rounded corners unsupported; drop radii with a warning
                if el.get("rx") or el.get("ry"):
                    self.warnings.append("rect corner radii ignored")
            return Shape(kind=tag, params=params, transform=transform,
                         paint=eff_fill, fill_rule=eff_rule)
        if tag in ("polyline", "polygon"):
            pts = [float(x) for x in _NUM_RE.findall(el.get("points", ""))]
            if len(pts) % 2 == 1:
                pts = pts[:-1]
                self.warnings.append(f"odd point count in <{tag}>, dropping last value")
            if len(pts) < 4:
                self.warnings.append(f"degenerate <{tag}> skipped")
                return None
            return Shape(kind=tag, params={"points": pts}, transform=transform,
                         paint=eff_fill, fill_rule=eff_rule)
        self.warnings.append(f"skipped unrecognized <{tag}> element")
        return None

    def use(self, el, transform, fill, rule, stack):
        href = el.get("href") or el.get("{http://www.w3.org/1999/xlink}href")
        if not href or not href.startswith("#"):
            self.warnings.append("use without local href skipped")
            return None
        ref = href[1:]
        if ref in stack:
            raise CyclicReference(f"cyclic use reference to #{ref}")
        target = self.by_id.get(ref)
        if target is None:
            self.warnings.append(f"use references missing #{ref}")
            return None
        node = self.element(target, fill, rule, stack + (ref,))
        if node is None:
            return None
        x = self.length(el, "x")
        y = self.length(el, "y")
        shift = transform.multiply(Affine(e=x, f=y))
        return Group(transform=shift, children=[node])

    def transform_of(self, el) -> Affine:
        raw = el.get("transform")
        return parse_transform(raw) if raw else Affine.identity()

    def paint_of(self, el, inherited_fill, inherited_rule):
        fill = inherited_fill
        rule = inherited_rule
        style = el.get("style")
        attrs = dict(el.attrib)
        if style:
            for decl in style.split(";"):
                if ":" in decl:
                    k, v = decl.split(":", 1)
                    attrs[k.strip()] = v.strip()
        raw = attrs.get("fill")
        if raw is not None:
            raw = raw.strip()
            if raw.startswith("url("):
                fill = Unsupported(f"paint server {raw!r}")
            else:
                fill = parse_color(raw)
        raw_rule = attrs.get("fill-rule")
        if raw_rule in ("nonzero", "evenodd"):
            rule = raw_rule
        for ignored in ("stroke", "stroke-width", "opacity", "fill-opacity"):
            if attrs.get(ignored) not in (None, "none", "1", "1.0"):
                self.warnings.append(f"{ignored} attribute ignored on <{_localname(el.tag)}>")
        return fill, rule


def parse_svg(text: str) -> SceneTree:
    """Parse SVG document text into a SceneTree."""
    try:
        root = etree.fromstring(text)
    except etree.ParseError as exc:
        raise MalformedXml(str(exc)) from exc
    if _localname(root.tag) != "svg":
        raise NoSvgRoot(f"document root is <{_localname(root.tag)}>, not <svg>")
    return _DocParser(root).parse()
