"""Discrete token encoding of the atomic form.

Fixed vocabulary layout (bit-exact, 44476 ids):

    0..7      PAD SOS EOS CMD_M CMD_L CMD_C CMD_A CMD_Z
    8         CMD_FILL
    9..15     reserved
    16..40015 coordinate pairs, id = 16 + x*200 + y
    40016..44111 colors, id = 40016 + r4*256 + g4*16 + b4 (4 bits/channel)
    44112..44471 arc rotation degrees 0..359
    44472..44475 arc flag pairs, id = 44472 + 2*large + sweep

A small DFA validates sequences and exposes the set of legal next token
classes for constrained decoding.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum

from .atomize import GRID, Arc, AtomicPath, AtomicSVG, Close, Cubic, Line, Move
from .errors import BadMagic, GrammarError, InvariantViolation, TruncatedSequence

PAD = 0
SOS = 1
EOS = 2
CMD_M = 3
CMD_L = 4
CMD_C = 5
CMD_A = 6
CMD_Z = 7
CMD_FILL = 8

COORD_BASE = 16
COORD_END = COORD_BASE + GRID * GRID          # 40016 (exclusive)
COLOR_BASE = COORD_END                        # 40016
COLOR_END = COLOR_BASE + 16 * 16 * 16         # 44112
ANGLE_BASE = COLOR_END                        # 44112
ANGLE_END = ANGLE_BASE + 360                  # 44472
FLAGS_BASE = ANGLE_END                        # 44472
FLAGS_END = FLAGS_BASE + 4                    # 44476
VOCAB_SIZE = FLAGS_END


class TokenClass(Enum):
    PAD = "pad"
    SOS = "sos"
    EOS = "eos"
    CMD_M = "cmd_m"
    CMD_L = "cmd_l"
    CMD_C = "cmd_c"
    CMD_A = "cmd_a"
    CMD_Z = "cmd_z"
    CMD_FILL = "cmd_fill"
    RESERVED = "reserved"
    COORD = "coord"
    COLOR = "color"
    ANGLE = "angle"
    FLAGS = "flags"


_SPECIALS = {
    PAD: TokenClass.PAD, SOS: TokenClass.SOS, EOS: TokenClass.EOS,
    CMD_M: TokenClass.CMD_M, CMD_L: TokenClass.CMD_L, CMD_C: TokenClass.CMD_C,
    CMD_A: TokenClass.CMD_A, CMD_Z: TokenClass.CMD_Z, CMD_FILL: TokenClass.CMD_FILL,
}


def token_class(tid: int) -> TokenClass:
    """O(1) class of a token id; raises for ids outside the vocabulary."""
    if tid < 0 or tid >= VOCAB_SIZE:
        raise InvariantViolation(f"token id {tid} outside vocabulary")
    if tid < COORD_BASE:
        return _SPECIALS.get(tid, TokenClass.RESERVED)
    if tid < COORD_END:
        return TokenClass.COORD
    if tid < COLOR_END:
        return TokenClass.COLOR
    if tid < ANGLE_END:
        return TokenClass.ANGLE
    return TokenClass.FLAGS


def coord_token(x: int, y: int) -> int:
    if not (0 <= x < GRID and 0 <= y < GRID):
        raise InvariantViolation(f"coordinate ({x},{y}) off grid")
    return COORD_BASE + x * GRID + y


def coord_of(tid: int) -> tuple[int, int]:
    v = tid - COORD_BASE
    return (v // GRID, v % GRID)


def color_token(r: int, g: int, b: int) -> int:
    r4 = min(15, max(0, round(r / 17.0)))
    g4 = min(15, max(0, round(g / 17.0)))
    b4 = min(15, max(0, round(b / 17.0)))
    return COLOR_BASE + r4 * 256 + g4 * 16 + b4


def color_of(tid: int) -> tuple[int, int, int]:
    v = tid - COLOR_BASE
    return ((v >> 8) * 17, ((v >> 4) & 0xF) * 17, (v & 0xF) * 17)


def angle_token(deg: int) -> int:
    return ANGLE_BASE + (int(deg) % 360)


def flags_token(large: bool, sweep: bool) -> int:
    return FLAGS_BASE + 2 * int(large) + int(sweep)


# ---------------------------------------------------------------------------
# Grammar DFA
# ---------------------------------------------------------------------------


class G(Enum):
    EXPECT_SOS = "ExpectSOS"
    EXPECT_FILL = "ExpectFill"
    EXPECT_COLOR = "ExpectColor"
    EXPECT_M = "ExpectM"
    EXPECT_M_COORD = "ExpectMCoord"
    IN_SUBPATH = "InSubpath"
    EXPECT_L_COORD = "ExpectLCoord"
    EXPECT_C_COORD1 = "ExpectCCoord1"
    EXPECT_C_COORD2 = "ExpectCCoord2"
    EXPECT_C_COORD3 = "ExpectCCoord3"
    EXPECT_A_RADII = "ExpectARadii"
    EXPECT_A_ANGLE = "ExpectAAngle"
    EXPECT_A_FLAGS = "ExpectAFlags"
    EXPECT_A_COORD = "ExpectACoord"
    AFTER_Z = "AfterZ"
    DONE = "Done"


_TRANSITIONS: dict[G, dict[TokenClass, G]] = {
    G.EXPECT_SOS: {TokenClass.SOS: G.EXPECT_FILL},
    G.EXPECT_FILL: {TokenClass.CMD_FILL: G.EXPECT_COLOR},
    G.EXPECT_COLOR: {TokenClass.COLOR: G.EXPECT_M},
    G.EXPECT_M: {TokenClass.CMD_M: G.EXPECT_M_COORD},
    G.EXPECT_M_COORD: {TokenClass.COORD: G.IN_SUBPATH},
    G.IN_SUBPATH: {
        TokenClass.CMD_L: G.EXPECT_L_COORD,
        TokenClass.CMD_C: G.EXPECT_C_COORD1,
        TokenClass.CMD_A: G.EXPECT_A_RADII,
        TokenClass.CMD_Z: G.AFTER_Z,
        TokenClass.CMD_M: G.EXPECT_M_COORD,
        TokenClass.CMD_FILL: G.EXPECT_COLOR,
        TokenClass.EOS: G.DONE,
    },
    G.EXPECT_L_COORD: {TokenClass.COORD: G.IN_SUBPATH},
    G.EXPECT_C_COORD1: {TokenClass.COORD: G.EXPECT_C_COORD2},
    G.EXPECT_C_COORD2: {TokenClass.COORD: G.EXPECT_C_COORD3},
    G.EXPECT_C_COORD3: {TokenClass.COORD: G.IN_SUBPATH},
    G.EXPECT_A_RADII: {TokenClass.COORD: G.EXPECT_A_ANGLE},
    G.EXPECT_A_ANGLE: {TokenClass.ANGLE: G.EXPECT_A_FLAGS},
    G.EXPECT_A_FLAGS: {TokenClass.FLAGS: G.EXPECT_A_COORD},
    G.EXPECT_A_COORD: {TokenClass.COORD: G.IN_SUBPATH},
    G.AFTER_Z: {
        TokenClass.CMD_M: G.EXPECT_M_COORD,
        TokenClass.CMD_FILL: G.EXPECT_COLOR,
        TokenClass.EOS: G.DONE,
    },
    G.DONE: {},
}

_CLASS_RANGES = {
    TokenClass.SOS: (SOS, SOS + 1),
    TokenClass.EOS: (EOS, EOS + 1),
    TokenClass.CMD_M: (CMD_M, CMD_M + 1),
    TokenClass.CMD_L: (CMD_L, CMD_L + 1),
    TokenClass.CMD_C: (CMD_C, CMD_C + 1),
    TokenClass.CMD_A: (CMD_A, CMD_A + 1),
    TokenClass.CMD_Z: (CMD_Z, CMD_Z + 1),
    TokenClass.CMD_FILL: (CMD_FILL, CMD_FILL + 1),
    TokenClass.COORD: (COORD_BASE, COORD_END),
    TokenClass.COLOR: (COLOR_BASE, COLOR_END),
    TokenClass.ANGLE: (ANGLE_BASE, ANGLE_END),
    TokenClass.FLAGS: (FLAGS_BASE, FLAGS_END),
}


def legal_next(state: G) -> set[TokenClass]:
    """Token classes with a defined transition out of `state`."""
    return set(_TRANSITIONS[state].keys())


def legal_id_ranges(state: G) -> list[tuple[int, int]]:
    """Legal next ids as sorted half-open ranges."""
    ranges = [_CLASS_RANGES[cls] for cls in _TRANSITIONS[state]]
    return sorted(ranges)


def advance(state: G, tid: int, position: int = -1) -> G:
    cls = token_class(tid)
    nxt = _TRANSITIONS[state].get(cls)
    if nxt is None:
        raise GrammarError(position, state.value, tid)
    return nxt


# ---------------------------------------------------------------------------
# Encode / decode
# ---------------------------------------------------------------------------


@dataclass
class TokenSeq:
    ids: list
    fill_rules: tuple = ()  # sidecar, one per path; empty = all nonzero

    def __iter__(self):
        return iter(self.ids)

    def __len__(self):
        return len(self.ids)


def encode(svg: AtomicSVG) -> TokenSeq:
    """AtomicSVG -> validated token ids (fill rules ride in the sidecar)."""
    if not svg.paths:
        raise InvariantViolation("cannot encode an AtomicSVG with no paths")
    ids = [SOS]
    rules = []
    for path in svg.paths:
        if not path.commands or not isinstance(path.commands[0], Move):
            raise InvariantViolation("path does not begin with M")
        ids.append(CMD_FILL)
        ids.append(color_token(*path.fill))
        rules.append(path.fill_rule)
        for cmd in path.commands:
            if isinstance(cmd, Move):
                ids += [CMD_M, coord_token(int(cmd.p[0]), int(cmd.p[1]))]
            elif isinstance(cmd, Line):
                ids += [CMD_L, coord_token(int(cmd.p[0]), int(cmd.p[1]))]
            elif isinstance(cmd, Cubic):
                ids += [CMD_C,
                        coord_token(int(cmd.c1[0]), int(cmd.c1[1])),
                        coord_token(int(cmd.c2[0]), int(cmd.c2[1])),
                        coord_token(int(cmd.p[0]), int(cmd.p[1]))]
            elif isinstance(cmd, Arc):
                ids += [CMD_A,
                        coord_token(int(cmd.rx), int(cmd.ry)),
                        angle_token(cmd.rot),
                        flags_token(cmd.large, cmd.sweep),
                        coord_token(int(cmd.p[0]), int(cmd.p[1]))]
            elif isinstance(cmd, Close):
                ids.append(CMD_Z)
    ids.append(EOS)
    return TokenSeq(ids=ids, fill_rules=tuple(rules))


def decode(seq: TokenSeq | list) -> AtomicSVG:
    """Validating inverse of encode; total over arbitrary id lists."""
    ids = list(seq.ids) if isinstance(seq, TokenSeq) else list(seq)
    rules = tuple(seq.fill_rules) if isinstance(seq, TokenSeq) else ()
    state = G.EXPECT_SOS
    paths: list[AtomicPath] = []
    cmds: list = []
    fill = (0, 0, 0)
    pend: list = []  # coordinate buffer for the current multi-arg command
    pend_kind = None

    def close_path():
        nonlocal cmds
        if cmds:
            rule = rules[len(paths)] if len(paths) < len(rules) else "nonzero"
            paths.append(AtomicPath(fill=fill, commands=cmds, fill_rule=rule))
            cmds = []

    for pos, tid in enumerate(ids):
        cls = token_class(tid)
        prev = state
        state = advance(state, tid, pos)
        if cls is TokenClass.CMD_FILL and prev is not G.EXPECT_FILL:
            close_path()
        if cls is TokenClass.COLOR:
            fill = color_of(tid)
        elif cls is TokenClass.CMD_C:
            pend, pend_kind = [], "C"
        elif cls is TokenClass.CMD_A:
            pend, pend_kind = [], "A"
        elif cls is TokenClass.CMD_Z:
            cmds.append(Close())
        elif cls is TokenClass.COORD:
            if prev is G.EXPECT_M_COORD:
                cmds.append(Move(coord_of(tid)))
            elif prev is G.EXPECT_L_COORD:
                cmds.append(Line(coord_of(tid)))
            elif prev in (G.EXPECT_C_COORD1, G.EXPECT_C_COORD2):
                pend.append(coord_of(tid))
            elif prev is G.EXPECT_C_COORD3:
                pend.append(coord_of(tid))
                cmds.append(Cubic(pend[0], pend[1], pend[2]))
            elif prev is G.EXPECT_A_RADII:
                # zero radii are representable in the token space; such arcs
                # render as straight lines rather than being clamped, so
                # re-encoding reproduces the exact ids
                rx, ry = coord_of(tid)
                pend = [rx, ry]
            elif prev is G.EXPECT_A_COORD:
                rx, ry, rot, large, sweep = pend
                cmds.append(Arc(rx, ry, rot, large, sweep, coord_of(tid)))
        elif cls is TokenClass.ANGLE:
            pend.append(tid - ANGLE_BASE)
        elif cls is TokenClass.FLAGS:
            v = tid - FLAGS_BASE
            pend += [bool(v >> 1), bool(v & 1)]
        elif cls is TokenClass.EOS:
            close_path()
            break
    if state is not G.DONE:
        raise TruncatedSequence(f"sequence ended in state {state.value} without EOS")
    return AtomicSVG(paths=paths)


# ---------------------------------------------------------------------------
# Digit baseline
# ---------------------------------------------------------------------------


def _number_cost(n: int) -> int:
    return len(str(int(n))) + 1  # digits + delimiter


def digit_baseline_len(svg: AtomicSVG) -> int:
    """Token count under the per-digit scheme the single-token ids replace."""
    total = 2  # SOS/EOS
    for path in svg.paths:
        total += 7  # color: 6 hex digits + delimiter
        for cmd in path.commands:
            total += 1  # command letter
            if isinstance(cmd, (Move, Line)):
                total += _number_cost(cmd.p[0]) + _number_cost(cmd.p[1])
            elif isinstance(cmd, Cubic):
                for pt in (cmd.c1, cmd.c2, cmd.p):
                    total += _number_cost(pt[0]) + _number_cost(pt[1])
            elif isinstance(cmd, Arc):
                total += _number_cost(cmd.rx) + _number_cost(cmd.ry)
                total += _number_cost(cmd.rot)
                total += _number_cost(int(cmd.large)) + _number_cost(int(cmd.sweep))
                total += _number_cost(cmd.p[0]) + _number_cost(cmd.p[1])
    return total


# ---------------------------------------------------------------------------
# Token file I/O
# ---------------------------------------------------------------------------

_MAGIC = b"SVGT"
_RULE_BITS = {"nonzero": 0, "evenodd": 1}


def write_tokens_text(seq: TokenSeq, path) -> None:
    with open(path, "w") as fh:
        fh.write(" ".join(str(i) for i in seq.ids) + "\n")


def read_tokens_text(path) -> TokenSeq:
    with open(path) as fh:
        ids = [int(tok) for tok in fh.read().split()]
    return TokenSeq(ids=ids)


def write_tokens_binary(seq: TokenSeq, path) -> None:
    has_rules = 1 if any(r == "evenodd" for r in seq.fill_rules) else 0
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BBI", 1, has_rules, len(seq.ids)))
        fh.write(struct.pack(f"<{len(seq.ids)}I", *seq.ids))
        if has_rules:
            bits = bytearray((len(seq.fill_rules) + 7) // 8)
            for i, rule in enumerate(seq.fill_rules):
                if _RULE_BITS[rule]:
                    bits[i // 8] |= 1 << (i % 8)
            fh.write(struct.pack("<I", len(seq.fill_rules)))
            fh.write(bytes(bits))


def read_tokens_binary(path) -> TokenSeq:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise BadMagic(f"{path}: not a token file")
    try:
        version, has_rules, count = struct.unpack_from("<BBI", data, 4)
        if version != 1:
            raise BadMagic(f"{path}: unsupported version {version}")
        ids = list(struct.unpack_from(f"<{count}I", data, 10))
        rules: tuple = ()
        if has_rules:
            off = 10 + 4 * count
            (n_paths,) = struct.unpack_from("<I", data, off)
            bits = data[off + 4: off + 4 + (n_paths + 7) // 8]
            rules = tuple(
                "evenodd" if bits[i // 8] >> (i % 8) & 1 else "nonzero"
                for i in range(n_paths)
            )
    except struct.error as exc:
        raise BadMagic(f"{path}: truncated token file") from exc
    return TokenSeq(ids=ids, fill_rules=rules)


def read_tokens(path) -> TokenSeq:
    """Auto-detect text vs binary token files."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == _MAGIC:
        return read_tokens_binary(path)
    return read_tokens_text(path)
