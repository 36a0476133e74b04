"""Scene tree -> canonical atomic form.

Reduces any parsed document to a flat list of filled paths using only
absolute M/L/C/A/Z commands on a 200x200 integer grid: shapes become
paths, relative and shorthand commands become absolute canonical ones,
transforms are applied, groups flattened, geometry fit and quantized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EmptyGeometry, PathStartsWithoutMove, SvgAtomError
from .scene import (
    Affine,
    Group,
    NoPaint,
    PathNode,
    RawCommand,
    SceneTree,
    Shape,
    Solid,
    Unsupported,
)

GRID = 200  # coordinates live on [0, GRID-1] after quantization

# cubic approximation constant for a quarter circle
CIRCLE_K = 4.0 / 3.0 * (math.sqrt(2.0) - 1.0)


class SingularTransform(SvgAtomError):
    pass


# ---------------------------------------------------------------------------
# Atomic command variants
# ---------------------------------------------------------------------------

Point = tuple[float, float]


@dataclass(frozen=True)
class Move:
    p: Point


@dataclass(frozen=True)
class Line:
    p: Point


@dataclass(frozen=True)
class Cubic:
    c1: Point
    c2: Point
    p: Point


@dataclass(frozen=True)
class Arc:
    rx: float
    ry: float
    rot: float  # degrees
    large: bool
    sweep: bool
    p: Point


@dataclass(frozen=True)
class Close:
    pass


AtomicCommand = Move | Line | Cubic | Arc | Close


@dataclass
class AtomicPath:
    fill: tuple[int, int, int]
    commands: list
    fill_rule: str = "nonzero"


@dataclass
class AtomicSVG:
    paths: list  # of AtomicPath, painter's order


@dataclass
class SimplificationReport:
    dropped_paths: list = field(default_factory=list)
    converted_arcs: int = 0
    warnings: list = field(default_factory=list)

    def drop(self, reason: str):
        self.dropped_paths.append(reason)


# ---------------------------------------------------------------------------
# Shapes -> raw path commands
# ---------------------------------------------------------------------------


def shape_to_path(shape: Shape) -> list[RawCommand]:
    """Convert a basic shape to absolute raw commands; [] if degenerate."""
    p = shape.params
    kind = shape.kind
    if kind == "rect":
        x, y, w, h = p["x"], p["y"], p["width"], p["height"]
        if w <= 0 or h <= 0:
            return []
        return [
            RawCommand("M", (x, y)),
            RawCommand("L", (x + w, y)),
            RawCommand("L", (x + w, y + h)),
            RawCommand("L", (x, y + h)),
            RawCommand("Z", ()),
        ]
    if kind == "circle":
        return _ellipse_cmds(p["cx"], p["cy"], p["r"], p["r"])
    if kind == "ellipse":
        return _ellipse_cmds(p["cx"], p["cy"], p["rx"], p["ry"])
    if kind == "line":
        return [RawCommand("M", (p["x1"], p["y1"])), RawCommand("L", (p["x2"], p["y2"]))]
    if kind in ("polyline", "polygon"):
        pts = p["points"]
        cmds = [RawCommand("M", (pts[0], pts[1]))]
        for i in range(2, len(pts), 2):
            cmds.append(RawCommand("L", (pts[i], pts[i + 1])))
        if kind == "polygon":
            cmds.append(RawCommand("Z", ()))
        return cmds
    raise SvgAtomError(f"unknown shape kind {kind!r}")


def _ellipse_cmds(cx, cy, rx, ry) -> list[RawCommand]:
    if rx <= 0 or ry <= 0:
        return []
    kx = CIRCLE_K * rx
    ky = CIRCLE_K * ry
    return [
        RawCommand("M", (cx + rx, cy)),
        RawCommand("C", (cx + rx, cy + ky, cx + kx, cy + ry, cx, cy + ry)),
        RawCommand("C", (cx - kx, cy + ry, cx - rx, cy + ky, cx - rx, cy)),
        RawCommand("C", (cx - rx, cy - ky, cx - kx, cy - ry, cx, cy - ry)),
        RawCommand("C", (cx + kx, cy - ry, cx + rx, cy - ky, cx + rx, cy)),
        RawCommand("Z", ()),
    ]


# ---------------------------------------------------------------------------
# Raw commands -> absolute atomic commands (float)
# ---------------------------------------------------------------------------


def normalize_commands(cmds: list[RawCommand]) -> list[AtomicCommand]:
    """Absolute M/L/C/A/Z from any raw command stream.

    H/V become L, Q/S/T become C (degree elevation / control reflection),
    degenerate arcs become lines or are dropped.
    """
    if not cmds:
        return []
    if cmds[0].letter not in ("M", "m"):
        raise PathStartsWithoutMove(f"path begins with {cmds[0].letter!r}")
    out: list[AtomicCommand] = []
    cur = (0.0, 0.0)
    start = (0.0, 0.0)
    prev_cubic_c2: Point | None = None
    prev_quad_c: Point | None = None
    for cmd in cmds:
        letter = cmd.letter
        upper = letter.upper()
        rel = letter.islower()
        a = cmd.args
        ox, oy = (cur if rel else (0.0, 0.0))
        new_cubic = None
        new_quad = None
        if upper == "M":
            cur = (a[0] + ox, a[1] + oy)
            start = cur
            out.append(Move(cur))
        elif upper == "L":
            cur = (a[0] + ox, a[1] + oy)
            out.append(Line(cur))
        elif upper == "H":
            cur = (a[0] + (cur[0] if rel else 0.0), cur[1])
            out.append(Line(cur))
        elif upper == "V":
            cur = (cur[0], a[0] + (cur[1] if rel else 0.0))
            out.append(Line(cur))
        elif upper == "C":
            c1 = (a[0] + ox, a[1] + oy)
            c2 = (a[2] + ox, a[3] + oy)
            p = (a[4] + ox, a[5] + oy)
            out.append(Cubic(c1, c2, p))
            cur = p
            new_cubic = c2
        elif upper == "S":
            if prev_cubic_c2 is not None:
                c1 = (2 * cur[0] - prev_cubic_c2[0], 2 * cur[1] - prev_cubic_c2[1])
            else:
                c1 = cur
            c2 = (a[0] + ox, a[1] + oy)
            p = (a[2] + ox, a[3] + oy)
            out.append(Cubic(c1, c2, p))
            cur = p
            new_cubic = c2
        elif upper == "Q":
            q = (a[0] + ox, a[1] + oy)
            p = (a[2] + ox, a[3] + oy)
            out.append(_elevate_quadratic(cur, q, p))
            cur = p
            new_quad = q
        elif upper == "T":
            if prev_quad_c is not None:
                q = (2 * cur[0] - prev_quad_c[0], 2 * cur[1] - prev_quad_c[1])
            else:
                q = cur
            p = (a[0] + ox, a[1] + oy)
            out.append(_elevate_quadratic(cur, q, p))
            cur = p
            new_quad = q
        elif upper == "A":
            rx, ry, rot, large, sweep, ex, ey = a
            end = (ex + ox, ey + oy)
            if end == cur:
                pass  # zero-length arc renders nothing
            elif rx == 0 or ry == 0:
                out.append(Line(end))
            else:
                rx, ry = _correct_radii(abs(rx), abs(ry), rot, cur, end)
                out.append(Arc(rx, ry, rot, bool(large), bool(sweep), end))
            cur = end
        elif upper == "Z":
            out.append(Close())
            cur = start
        prev_cubic_c2 = new_cubic
        prev_quad_c = new_quad
    return out


def _elevate_quadratic(p0: Point, q: Point, p: Point) -> Cubic:
    c1 = (p0[0] + 2.0 / 3.0 * (q[0] - p0[0]), p0[1] + 2.0 / 3.0 * (q[1] - p0[1]))
    c2 = (p[0] + 2.0 / 3.0 * (q[0] - p[0]), p[1] + 2.0 / 3.0 * (q[1] - p[1]))
    return Cubic(c1, c2, p)


def _correct_radii(rx, ry, rot_deg, start, end) -> tuple[float, float]:
    # scale radii up when no arc can reach the endpoints (SVG F.6.6)
    phi = math.radians(rot_deg)
    dx2 = (start[0] - end[0]) / 2.0
    dy2 = (start[1] - end[1]) / 2.0
    x1p = math.cos(phi) * dx2 + math.sin(phi) * dy2
    y1p = -math.sin(phi) * dx2 + math.cos(phi) * dy2
    lam = (x1p / rx) ** 2 + (y1p / ry) ** 2
    if lam > 1.0:
        s = math.sqrt(lam)
        rx *= s
        ry *= s
    return rx, ry


# ---------------------------------------------------------------------------
# Arcs -> cubics
# ---------------------------------------------------------------------------


def arc_to_cubics(arc: Arc, start: Point) -> list[Cubic]:
    """Approximate an endpoint-parameterized arc with <=90-degree cubics."""
    rx, ry = arc.rx, arc.ry
    phi = math.radians(arc.rot)
    cphi, sphi = math.cos(phi), math.sin(phi)
    x1, y1 = start
    x2, y2 = arc.p
    dx2 = (x1 - x2) / 2.0
    dy2 = (y1 - y2) / 2.0
    x1p = cphi * dx2 + sphi * dy2
    y1p = -sphi * dx2 + cphi * dy2
    rx, ry = _correct_radii(rx, ry, arc.rot, start, arc.p)
    num = rx * rx * ry * ry - rx * rx * y1p * y1p - ry * ry * x1p * x1p
    den = rx * rx * y1p * y1p + ry * ry * x1p * x1p
    radicand = max(0.0, num / den)
    coef = math.sqrt(radicand)
    if arc.large == arc.sweep:
        coef = -coef
    cxp = coef * rx * y1p / ry
    cyp = -coef * ry * x1p / rx
    cx = cphi * cxp - sphi * cyp + (x1 + x2) / 2.0
    cy = sphi * cxp + cphi * cyp + (y1 + y2) / 2.0

    def angle(ux, uy, vx, vy):
        dot = ux * vx + uy * vy
        norm = math.hypot(ux, uy) * math.hypot(vx, vy)
        a = math.acos(max(-1.0, min(1.0, dot / norm)))
        if ux * vy - uy * vx < 0:
            a = -a
        return a

    theta1 = angle(1.0, 0.0, (x1p - cxp) / rx, (y1p - cyp) / ry)
    dtheta = angle((x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry)
    if not arc.sweep and dtheta > 0:
        dtheta -= 2 * math.pi
    elif arc.sweep and dtheta < 0:
        dtheta += 2 * math.pi

    n = max(1, math.ceil(abs(dtheta) / (math.pi / 2.0) - 1e-6))
    delta = dtheta / n
    alpha = 4.0 / 3.0 * math.tan(delta / 4.0)

    def eval_point(th):
        return (cx + rx * math.cos(th) * cphi - ry * math.sin(th) * sphi,
                cy + rx * math.cos(th) * sphi + ry * math.sin(th) * cphi)

    def eval_deriv(th):
        return (-rx * math.sin(th) * cphi - ry * math.cos(th) * sphi,
                -rx * math.sin(th) * sphi + ry * math.cos(th) * cphi)

    cubics = []
    th = theta1
    p0 = eval_point(th)
    for _ in range(n):
        th2 = th + delta
        p3 = eval_point(th2)
        d0 = eval_deriv(th)
        d3 = eval_deriv(th2)
        c1 = (p0[0] + alpha * d0[0], p0[1] + alpha * d0[1])
        c2 = (p3[0] - alpha * d3[0], p3[1] - alpha * d3[1])
        cubics.append(Cubic(c1, c2, p3))
        th = th2
        p0 = p3
    # land exactly on the stated endpoint
    last = cubics[-1]
    cubics[-1] = Cubic(last.c1, last.c2, (x2, y2))
    return cubics


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

_CONFORMAL_EPS = 1e-9


def _conformal_parts(t: Affine):
    """(scale, rotation_rad, mirrored) if t is conformal, else None."""
    scale = math.hypot(t.a, t.b)
    if scale < _CONFORMAL_EPS:
        return None
    tol = _CONFORMAL_EPS * max(1.0, scale)
    if abs(t.a - t.d) <= tol and abs(t.b + t.c) <= tol:
        return scale, math.atan2(t.b, t.a), False
    if abs(t.a + t.d) <= tol and abs(t.b - t.c) <= tol:
        return scale, math.atan2(t.b, t.a), True
    return None


def apply_transform(cmds: list[AtomicCommand], t: Affine) -> list[AtomicCommand]:
    """Map atomic commands through an affine transform.

    Arcs survive conformal transforms with adjusted radii/rotation/sweep;
    under shear or non-uniform scale they are converted to cubics first.
    """
    if abs(t.det()) < 1e-12:
        raise SingularTransform(f"transform {t} is singular")
    conf = _conformal_parts(t)
    out: list[AtomicCommand] = []
    cur = (0.0, 0.0)
    for cmd in cmds:
        if isinstance(cmd, Move):
            cur = cmd.p
            out.append(Move(t.apply(*cmd.p)))
        elif isinstance(cmd, Line):
            cur = cmd.p
            out.append(Line(t.apply(*cmd.p)))
        elif isinstance(cmd, Cubic):
            cur = cmd.p
            out.append(Cubic(t.apply(*cmd.c1), t.apply(*cmd.c2), t.apply(*cmd.p)))
        elif isinstance(cmd, Arc):
            if conf is not None:
                scale, angle, mirrored = conf
                if mirrored:
                    rot = math.degrees(angle) - cmd.rot
                    sweep = not cmd.sweep
                else:
                    rot = cmd.rot + math.degrees(angle)
                    sweep = cmd.sweep
                out.append(Arc(cmd.rx * scale, cmd.ry * scale, rot % 360.0,
                               cmd.large, sweep, t.apply(*cmd.p)))
            else:
                for cub in arc_to_cubics(cmd, cur):
                    out.append(Cubic(t.apply(*cub.c1), t.apply(*cub.c2), t.apply(*cub.p)))
            cur = cmd.p
        elif isinstance(cmd, Close):
            out.append(Close())
    return out


# ---------------------------------------------------------------------------
# Flatten / fit / quantize
# ---------------------------------------------------------------------------


def flatten(tree: SceneTree, report: SimplificationReport | None = None) -> list[AtomicPath]:
    """Depth-first reduce to atomic paths in painter's order (float coords)."""
    report = report if report is not None else SimplificationReport()
    paths: list[AtomicPath] = []

    def visit(node, ctm: Affine):
        if isinstance(node, Group):
            total = ctm.multiply(node.transform)
            for child in node.children:
                visit(child, total)
            return
        total = ctm.multiply(node.transform)
        if isinstance(node.paint, NoPaint):
            report.drop("paint none")
            return
        if isinstance(node.paint, Unsupported):
            report.drop(f"unsupported paint: {node.paint.description}")
            return
        if isinstance(node, Shape):
            raw = shape_to_path(node)
            if not raw:
                report.drop(f"degenerate {node.kind}")
                return
        elif isinstance(node, PathNode):
            raw = node.commands
            if not raw:
                report.drop("empty path data")
                return
        else:
            return
        try:
            cmds = apply_transform(normalize_commands(raw), total)
        except SingularTransform:
            report.drop("singular transform")
            return
        if not cmds:
            report.drop("no drawable commands")
            return
        fill = (node.paint.r, node.paint.g, node.paint.b)
        paths.append(AtomicPath(fill=fill, commands=cmds, fill_rule=node.fill_rule))

    visit(tree.root, Affine.identity())
    return paths


def geometry_bounds(paths: list[AtomicPath]) -> tuple[float, float, float, float] | None:
    """Tight (x, y, w, h) over all command points, control points included."""
    xs: list[float] = []
    ys: list[float] = []
    for path in paths:
        cur = (0.0, 0.0)
        for cmd in path.commands:
            if isinstance(cmd, (Move, Line)):
                cur = cmd.p
                xs.append(cmd.p[0]); ys.append(cmd.p[1])
            elif isinstance(cmd, Cubic):
                for pt in (cmd.c1, cmd.c2, cmd.p):
                    xs.append(pt[0]); ys.append(pt[1])
                cur = cmd.p
            elif isinstance(cmd, Arc):
                for cub in arc_to_cubics(cmd, cur):
                    for pt in (cub.c1, cub.c2, cub.p):
                        xs.append(pt[0]); ys.append(pt[1])
                cur = cmd.p
    if not xs:
        return None
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    return (x0, y0, x1 - x0, y1 - y0)


def fit_viewbox(paths: list[AtomicPath],
                source_box: tuple[float, float, float, float]) -> list[AtomicPath]:
    """Uniformly scale + center the source box into [0, 200]^2."""
    x, y, w, h = source_box
    if not paths or w <= 0 or h <= 0:
        raise EmptyGeometry(f"cannot fit box {source_box}")
    s = GRID / max(w, h)
    tx = (GRID - w * s) / 2.0 - x * s
    ty = (GRID - h * s) / 2.0 - y * s
    t = Affine(a=s, d=s, e=tx, f=ty)
    return [AtomicPath(fill=p.fill, fill_rule=p.fill_rule,
                       commands=apply_transform(p.commands, t))
            for p in paths]


def _round_half_away(v: float) -> int:
    return math.floor(v + 0.5) if v >= 0 else math.ceil(v - 0.5)


def _qc(v: float) -> int:
    return min(GRID - 1, max(0, _round_half_away(v)))


def _qpt(p: Point) -> tuple[int, int]:
    return (_qc(p[0]), _qc(p[1]))


def _q_channel(ch: int) -> int:
    # snap fill channels to the 17-step grid the color tokens can express
    return min(15, max(0, _round_half_away(ch / 17.0))) * 17


def quantize(paths: list[AtomicPath], report: SimplificationReport | None = None) -> AtomicSVG:
    """Snap fitted float paths onto the integer grid."""
    report = report if report is not None else SimplificationReport()
    out_paths = []
    for path in paths:
        cmds: list[AtomicCommand] = []
        cur = (0.0, 0.0)
        for cmd in path.commands:
            if isinstance(cmd, Arc) and (cmd.rx >= GRID - 0.5 or cmd.ry >= GRID - 0.5):
                # radii unrepresentable on the grid: approximate with cubics
                cmds.extend(arc_to_cubics(cmd, cur))
                report.converted_arcs += 1
                cur = cmd.p
            else:
                cmds.append(cmd)
                if not isinstance(cmd, Close):
                    cur = cmd.p
        qcmds: list[AtomicCommand] = []
        qcur = None
        for cmd in cmds:
            if isinstance(cmd, Move):
                qcmds.append(Move(_qpt(cmd.p)))
                qcur = _qpt(cmd.p)
            elif isinstance(cmd, Line):
                qp = _qpt(cmd.p)
                if qp == qcur:
                    continue  # zero-length after quantization
                qcmds.append(Line(qp))
                qcur = qp
            elif isinstance(cmd, Cubic):
                qp = _qpt(cmd.p)
                qcmds.append(Cubic(_qpt(cmd.c1), _qpt(cmd.c2), qp))
                qcur = qp
            elif isinstance(cmd, Arc):
                rx = min(GRID - 1, max(1, _round_half_away(cmd.rx)))
                ry = min(GRID - 1, max(1, _round_half_away(cmd.ry)))
                rot = _round_half_away(cmd.rot) % 360
                qp = _qpt(cmd.p)
                qcmds.append(Arc(rx, ry, rot, cmd.large, cmd.sweep, qp))
                qcur = qp
            elif isinstance(cmd, Close):
                qcmds.append(Close())
        qcmds = _prune_lone_moves(qcmds)
        if not qcmds:
            report.drop("path empty after quantization")
            continue
        fill = tuple(_q_channel(c) for c in path.fill)
        out_paths.append(AtomicPath(fill=fill, commands=qcmds, fill_rule=path.fill_rule))
    return AtomicSVG(paths=out_paths)


def _prune_lone_moves(cmds: list[AtomicCommand]) -> list[AtomicCommand]:
    # drop subpaths that carry no drawing commands (a lone M, or M + Z)
    out: list[AtomicCommand] = []
    sub: list[AtomicCommand] = []

    def emit():
        if any(isinstance(c, (Line, Cubic, Arc)) for c in sub):
            out.extend(sub)
        sub.clear()

    for cmd in cmds:
        if isinstance(cmd, Move):
            emit()
        sub.append(cmd)
    emit()
    return out


def fit_scene(tree: SceneTree, report: SimplificationReport | None = None) -> list[AtomicPath]:
    """Flatten and fit into the 200 grid, keeping float coordinates."""
    report = report if report is not None else SimplificationReport()
    paths = flatten(tree, report)
    if not paths:
        raise EmptyGeometry("document has no drawable geometry")
    box = tree.viewbox
    if box is None:
        box = geometry_bounds(paths)
        if box[2] <= 0 or box[3] <= 0:
            # zero-extent geometry (e.g. a single line); pad the box
            box = (box[0] - 0.5, box[1] - 0.5, max(box[2], 1.0), max(box[3], 1.0))
    return fit_viewbox(paths, box)


def atomize(tree: SceneTree, report: SimplificationReport | None = None) -> AtomicSVG:
    """Full pipeline: flatten -> fit into the 200 grid -> quantize."""
    report = report if report is not None else SimplificationReport()
    report.warnings.extend(tree.warnings)
    fitted = fit_scene(tree, report)
    svg = quantize(fitted, report)
    if not svg.paths:
        raise EmptyGeometry("all paths degenerate after quantization")
    return svg


# ---------------------------------------------------------------------------
# Serialization back to minimal SVG text
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def path_data(cmds: list[AtomicCommand]) -> str:
    parts = []
    for cmd in cmds:
        if isinstance(cmd, Move):
            parts += ["M", _fmt(cmd.p[0]), _fmt(cmd.p[1])]
        elif isinstance(cmd, Line):
            parts += ["L", _fmt(cmd.p[0]), _fmt(cmd.p[1])]
        elif isinstance(cmd, Cubic):
            parts += ["C", _fmt(cmd.c1[0]), _fmt(cmd.c1[1]),
                      _fmt(cmd.c2[0]), _fmt(cmd.c2[1]), _fmt(cmd.p[0]), _fmt(cmd.p[1])]
        elif isinstance(cmd, Arc):
            parts += ["A", _fmt(cmd.rx), _fmt(cmd.ry), _fmt(cmd.rot),
                      "1" if cmd.large else "0", "1" if cmd.sweep else "0",
                      _fmt(cmd.p[0]), _fmt(cmd.p[1])]
        elif isinstance(cmd, Close):
            parts.append("Z")
    return " ".join(parts)


def to_svg_text(svg: AtomicSVG) -> str:
    """Minimal bit-exact SVG serialization of the atomic form."""
    lines = ['<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">']
    for path in svg.paths:
        fill = "#{:02x}{:02x}{:02x}".format(*path.fill)
        rule = ' fill-rule="evenodd"' if path.fill_rule == "evenodd" else ""
        lines.append(f'<path d="{path_data(path.commands)}" fill="{fill}"{rule}/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
