import random

import pytest

from svgatom import tokens as tk
from svgatom.atomize import Arc, AtomicPath, AtomicSVG, Close, Cubic, Line, Move
from svgatom.errors import GrammarError, InvariantViolation, TruncatedSequence
from svgatom.scene import parse_svg
from svgatom.atomize import atomize

from conftest import random_atomic_svg


class TestVocab:
    def test_layout_constants(self):
        assert tk.COORD_BASE == 16
        assert tk.COLOR_BASE == 40016
        assert tk.ANGLE_BASE == 44112
        assert tk.FLAGS_BASE == 44472
        assert tk.VOCAB_SIZE == 44476

    def test_coord_formula(self):
        assert tk.coord_token(0, 0) == 16
        assert tk.coord_token(123, 45) == 24661
        assert tk.coord_of(24661) == (123, 45)

    def test_color_roundtrip(self):
        assert tk.color_of(42200) == (136, 136, 136)
        assert tk.color_token(255, 136, 0) == tk.COLOR_BASE + 15 * 256 + 8 * 16
        assert tk.color_of(tk.color_token(255, 0, 0)) == (255, 0, 0)

    def test_partition_total_and_disjoint(self):
        counts = {}
        for tid in range(tk.VOCAB_SIZE):
            cls = tk.token_class(tid)
            counts[cls] = counts.get(cls, 0) + 1
        assert counts[tk.TokenClass.COORD] == 40000
        assert counts[tk.TokenClass.COLOR] == 4096
        assert counts[tk.TokenClass.ANGLE] == 360
        assert counts[tk.TokenClass.FLAGS] == 4
        assert counts[tk.TokenClass.RESERVED] == 7
        assert sum(counts.values()) == tk.VOCAB_SIZE

    def test_out_of_range_rejected(self):
        with pytest.raises(InvariantViolation):
            tk.token_class(tk.VOCAB_SIZE)


class TestEncode:
    def test_red_triangle_exact_ids(self):
        svg = AtomicSVG(paths=[AtomicPath(fill=(255, 0, 0), commands=[
            Move((10, 10)), Line((100, 10)), Line((100, 100)), Close()])])
        seq = tk.encode(svg)
        assert seq.ids == [1, 8, 43856, 3, 2026, 4, 20026, 4, 20116, 7, 2]

    def test_empty_svg_rejected(self):
        with pytest.raises(InvariantViolation):
            tk.encode(AtomicSVG(paths=[]))

    def test_arc_encoding(self):
        svg = AtomicSVG(paths=[AtomicPath(fill=(0, 0, 0), commands=[
            Move((0, 0)), Arc(50, 30, 45, True, False, (10, 20))])])
        seq = tk.encode(svg)
        assert seq.ids == [1, 8, tk.COLOR_BASE, 3, 16,
                           6, tk.coord_token(50, 30), tk.ANGLE_BASE + 45,
                           tk.FLAGS_BASE + 2, tk.coord_token(10, 20), 2]


class TestDecode:
    def test_roundtrip_corpus(self, corpus_files):
        for f in corpus_files:
            with open(f) as fh:
                svg = atomize(parse_svg(fh.read()))
            seq = tk.encode(svg)
            back = tk.decode(seq)
            assert back.paths == svg.paths, f

    def test_roundtrip_random(self):
        rng = random.Random(42)
        for _ in range(200):
            svg = random_atomic_svg(rng)
            seq = tk.encode(svg)
            assert tk.decode(seq).paths == svg.paths
            assert tk.encode(tk.decode(seq)).ids == seq.ids

    def test_eos_before_path_rejected(self):
        with pytest.raises(GrammarError) as err:
            tk.decode([1, 2])
        assert err.value.position == 1

    def test_truncated_sequence(self):
        with pytest.raises(TruncatedSequence):
            tk.decode([1, 8, tk.COLOR_BASE, 3, 16])

    def test_color_reconstruction(self):
        svg = tk.decode([1, 8, 42200, 3, 16, 4, 17, 2])
        assert svg.paths[0].fill == (136, 136, 136)

    def test_fill_rules_sidecar(self):
        svg = AtomicSVG(paths=[AtomicPath(fill=(0, 0, 0), fill_rule="evenodd",
                                          commands=[Move((0, 0)), Line((5, 5))])])
        seq = tk.encode(svg)
        assert seq.fill_rules == ("evenodd",)
        assert tk.decode(seq).paths[0].fill_rule == "evenodd"


class TestGrammar:
    def test_legal_next_examples(self):
        assert tk.legal_next(tk.G.EXPECT_SOS) == {tk.TokenClass.SOS}
        assert tk.legal_next(tk.G.EXPECT_COLOR) == {tk.TokenClass.COLOR}
        assert tk.legal_next(tk.G.EXPECT_A_FLAGS) == {tk.TokenClass.FLAGS}
        assert tk.legal_next(tk.G.IN_SUBPATH) == {
            tk.TokenClass.CMD_L, tk.TokenClass.CMD_C, tk.TokenClass.CMD_A,
            tk.TokenClass.CMD_Z, tk.TokenClass.CMD_M, tk.TokenClass.CMD_FILL,
            tk.TokenClass.EOS}
        assert tk.legal_next(tk.G.AFTER_Z) == {
            tk.TokenClass.CMD_M, tk.TokenClass.CMD_FILL, tk.TokenClass.EOS}

    def test_advance_chain(self):
        state = tk.advance(tk.G.EXPECT_FILL, tk.CMD_FILL)
        assert state == tk.G.EXPECT_COLOR
        state = tk.G.IN_SUBPATH
        for tid, expected in [(tk.CMD_C, tk.G.EXPECT_C_COORD1),
                              (16, tk.G.EXPECT_C_COORD2),
                              (17, tk.G.EXPECT_C_COORD3),
                              (18, tk.G.IN_SUBPATH)]:
            state = tk.advance(state, tid)
            assert state == expected

    def test_illegal_transition(self):
        with pytest.raises(GrammarError):
            tk.advance(tk.G.EXPECT_M_COORD, tk.CMD_L)

    def test_encode_output_accepted(self):
        rng = random.Random(1)
        for _ in range(50):
            seq = tk.encode(random_atomic_svg(rng))
            state = tk.G.EXPECT_SOS
            for tid in seq.ids:
                state = tk.advance(state, tid)
            assert state == tk.G.DONE

    def test_legal_id_ranges_cover_classes(self):
        for state in tk.G:
            if state is tk.G.DONE:
                continue
            ranges = tk.legal_id_ranges(state)
            classes = tk.legal_next(state)
            assert len(ranges) == len(classes)
            for lo, hi in ranges:
                assert {tk.token_class(t) for t in (lo, hi - 1)} <= classes


class TestDigitBaseline:
    def test_coordinate_pair_cost(self):
        assert tk._number_cost(123) + tk._number_cost(45) == 7
        assert tk._number_cost(123) + tk._number_cost(456) == 8

    def test_lone_move(self):
        svg = AtomicSVG(paths=[AtomicPath(fill=(0, 0, 0), commands=[
            Move((5, 5)), Line((6, 6))])])
        # M letter + two 1-digit numbers with delimiters = 5
        base = tk.digit_baseline_len(svg)
        # total: SOS/EOS 2 + color 7 + M 5 + L 5
        assert base == 19

    def test_parameterized_shorter(self):
        rng = random.Random(9)
        for _ in range(50):
            svg = random_atomic_svg(rng)
            assert len(tk.encode(svg).ids) < tk.digit_baseline_len(svg)


class TestTokenFiles:
    def test_text_roundtrip(self, tmp_path):
        seq = tk.TokenSeq(ids=[1, 8, 43856, 3, 2026, 7, 2])
        p = tmp_path / "t.txt"
        tk.write_tokens_text(seq, p)
        assert tk.read_tokens(p).ids == seq.ids
        assert p.read_text() == "1 8 43856 3 2026 7 2\n"

    def test_binary_roundtrip_with_rules(self, tmp_path):
        seq = tk.TokenSeq(ids=[1, 8, 43856, 3, 2026, 7, 2],
                          fill_rules=("evenodd", "nonzero", "evenodd"))
        p = tmp_path / "t.bin"
        tk.write_tokens_binary(seq, p)
        back = tk.read_tokens(p)
        assert back.ids == seq.ids
        assert back.fill_rules == seq.fill_rules
        assert p.read_bytes()[:4] == b"SVGT"

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.bin"
        p.write_bytes(b"SVGTxx")
        with pytest.raises(Exception):
            tk.read_tokens_binary(p)
