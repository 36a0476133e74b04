import json
import os

import pytest

from svgatom.cli import main

RECT = ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">'
        '<rect x="40" y="40" width="80" height="80" fill="#c30"/></svg>')


@pytest.fixture
def rect_svg(tmp_path):
    p = tmp_path / "rect.svg"
    p.write_text(RECT)
    return str(p)


class TestRoundtripCommands:
    def test_simplify(self, rect_svg, tmp_path):
        out = tmp_path / "atomic.svg"
        assert main(["simplify", rect_svg, "-o", str(out)]) == 0
        text = out.read_text()
        assert text.startswith('<svg xmlns="http://www.w3.org/2000/svg" '
                               'viewBox="0 0 200 200">')
        assert 'fill="#cc3300"' in text

    def test_simplify_idempotent(self, rect_svg, tmp_path):
        out1 = tmp_path / "a1.svg"
        out2 = tmp_path / "a2.svg"
        main(["simplify", rect_svg, "-o", str(out1)])
        main(["simplify", str(out1), "-o", str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_tokenize_detokenize(self, rect_svg, tmp_path):
        tok = tmp_path / "t.txt"
        back = tmp_path / "back.svg"
        atomic = tmp_path / "atomic.svg"
        assert main(["tokenize", rect_svg, "-o", str(tok)]) == 0
        assert main(["detokenize", str(tok), "-o", str(back)]) == 0
        main(["simplify", rect_svg, "-o", str(atomic)])
        assert back.read_text() == atomic.read_text()

    def test_tokenize_binary(self, rect_svg, tmp_path):
        tok = tmp_path / "t.bin"
        back = tmp_path / "back.svg"
        assert main(["tokenize", rect_svg, "--binary", "-o", str(tok)]) == 0
        assert tok.read_bytes()[:4] == b"SVGT"
        assert main(["detokenize", str(tok), "-o", str(back)]) == 0

    def test_render(self, rect_svg, tmp_path):
        out = tmp_path / "r.ppm"
        assert main(["render", rect_svg, "-o", str(out), "--size", "64"]) == 0
        data = out.read_bytes()
        assert data.startswith(b"P6\n64 64\n255\n")
        assert len(data) == len(b"P6\n64 64\n255\n") + 64 * 64 * 3


class TestPipelineCommands:
    def test_curate_fit_sample_eval(self, tmp_path, capsys):
        indir = tmp_path / "in"
        indir.mkdir()
        for i in range(4):
            (indir / f"s{i}.svg").write_text(
                '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">'
                f'<rect x="{10 + 10 * i}" y="20" width="60" height="60" '
                'fill="#036"/></svg>')
        out = tmp_path / "data"
        assert main(["curate", "--input", str(indir), "--out", str(out),
                     "--seed", "7"]) == 0
        assert (out / "manifest.jsonl").exists()

        model = tmp_path / "model.bin"
        assert main(["fit", "--input", str(out / "svg"), "-o", str(model),
                     "--order", "2"]) == 0

        samples = tmp_path / "samples"
        assert main(["sample", "--model", str(model), "-n", "3",
                     "--seed", "11", "-o", str(samples)]) == 0
        svgs = sorted(samples.glob("*.svg"))
        assert len(svgs) == 3

        pairs = tmp_path / "pairs.jsonl"
        with open(pairs, "w") as fh:
            for row in (out / "manifest.jsonl").read_text().splitlines():
                rec = json.loads(row)
                full = str(out / rec["file"])
                fh.write(json.dumps({"id": rec["id"], "reference": full,
                                     "candidate": full}) + "\n")
        results = tmp_path / "eval.jsonl"
        assert main(["eval", "--pairs", str(pairs), "-o", str(results)]) == 0
        summary = json.loads((tmp_path / "eval.jsonl.summary.json").read_text())
        assert summary["ssim"]["mean"] == 1.0
        assert summary["mse"]["mean"] == 0.0

    def test_stats(self, tmp_path, capsys):
        mf = tmp_path / "m.jsonl"
        mf.write_text(json.dumps({"id": "a", "n_tokens": 10, "split": "train"}) + "\n" +
                      json.dumps({"id": "b", "n_tokens": 20, "split": "val"}) + "\n")
        assert main(["stats", str(mf)]) == 0
        text = capsys.readouterr().out
        assert "train" in text and "val" in text


class TestExitCodes:
    def test_missing_file_is_one(self, tmp_path, capsys):
        assert main(["simplify", str(tmp_path / "nope.svg"),
                     "-o", str(tmp_path / "o.svg")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_malformed_svg_is_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.svg"
        bad.write_text("<svg <<<")
        assert main(["simplify", str(bad), "-o", str(tmp_path / "o.svg")]) == 1

    def test_bad_args_is_two(self):
        with pytest.raises(SystemExit) as err:
            main(["simplify"])  # missing required -o
        assert err.value.code == 2

    def test_unknown_subcommand_is_two(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2
