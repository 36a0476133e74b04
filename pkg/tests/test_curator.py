import hashlib
import json
import os
import shutil

import pytest

from svgatom.curate import (
    CurationConfig,
    ManifestRecord,
    StatsReport,
    assign_splits,
    curate,
    dedup,
    filter_blank,
    filter_clip,
    ingest,
    simplify_records,
)
from svgatom.errors import DuplicateId

RECT = ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">'
        '<rect x="10" y="10" width="100" height="100" fill="#c30"/></svg>')
CIRCLE = ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">'
          '<circle cx="100" cy="100" r="60" fill="#06c"/></svg>')
RECT_PERMUTED = ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">'
                 '<rect fill="#c30" width="100" height="100" y="10" x="10"/></svg>')
WHITE = ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 200 200">'
         '<rect x="0" y="0" width="200" height="200" fill="#fff"/></svg>')


def _write(dirpath, name, text):
    with open(os.path.join(dirpath, name), "w") as fh:
        fh.write(text)


@pytest.fixture
def svg_dir(tmp_path):
    d = tmp_path / "in"
    d.mkdir()
    _write(d, "a.svg", RECT)
    _write(d, "b.svg", CIRCLE)
    _write(d, "c.svg", RECT)           # byte duplicate of a
    _write(d, "d.svg", RECT_PERMUTED)  # same geometry, attrs permuted
    _write(d, "e.svg", WHITE)          # blank after render
    return str(d)


class TestIngest:
    def test_plain_directory(self, svg_dir):
        records, unmatched = ingest(svg_dir)
        assert [r.id for r in records] == ["a", "b", "c", "d", "e"]
        assert all(r.caption is None for r in records)
        assert unmatched == []

    def test_manifest_join(self, svg_dir, tmp_path):
        mf = tmp_path / "m.jsonl"
        mf.write_text(json.dumps({"id": "a", "file": "a.svg", "caption": "a rect",
                                  "clip_score": 31.5}) + "\n" +
                      json.dumps({"id": "zz", "file": "missing.svg"}) + "\n")
        records, unmatched = ingest(svg_dir, str(mf))
        rec = next(r for r in records if r.id == "a")
        assert rec.caption == "a rect"
        assert rec.clip_score == 31.5
        assert len(unmatched) == 1

    def test_duplicate_manifest_id(self, svg_dir, tmp_path):
        mf = tmp_path / "m.jsonl"
        mf.write_text(json.dumps({"id": "x", "file": "a.svg"}) + "\n" +
                      json.dumps({"id": "x", "file": "b.svg"}) + "\n")
        with pytest.raises(DuplicateId):
            ingest(svg_dir, str(mf))


class TestDedup:
    def test_byte_and_token_duplicates_collapse(self, svg_dir):
        records, _ = ingest(svg_dir)
        records, _ = simplify_records(records, svg_dir, CurationConfig())
        kept, n = dedup(records)
        assert [r.id for r in kept] == ["a", "b", "e"]
        assert n == 2

    def test_idempotent(self, svg_dir):
        records, _ = ingest(svg_dir)
        records, _ = simplify_records(records, svg_dir, CurationConfig())
        kept, _ = dedup(records)
        again, n = dedup(kept)
        assert n == 0
        assert [r.id for r in again] == [r.id for r in kept]

    def test_raster_pass_disabled(self, svg_dir):
        records, _ = ingest(svg_dir)
        records, _ = simplify_records(records, svg_dir, CurationConfig())
        kept, _ = dedup(records, dedup_hamming=-1)
        assert [r.id for r in kept] == ["a", "b", "e"]


class TestFilters:
    def test_blank_dropped(self, svg_dir):
        records, _ = ingest(svg_dir)
        records, _ = simplify_records(records, svg_dir, CurationConfig())
        kept, n = filter_blank(records)
        assert "e" not in [r.id for r in kept]
        assert n == 1

    def test_clip_threshold_boundary(self):
        recs = [ManifestRecord(id="lo", file="x", clip_score=29.9),
                ManifestRecord(id="hi", file="y", clip_score=30.0),
                ManifestRecord(id="na", file="z")]
        kept, n = filter_clip(recs, 30.0)
        assert [r.id for r in kept] == ["hi", "na"]
        assert n == 1


class TestSplits:
    def test_all_train(self):
        recs = [ManifestRecord(id=str(i), file="") for i in range(50)]
        assign_splits(recs, (1.0, 0.0, 0.0), seed=1)
        assert all(r.split == "train" for r in recs)

    def test_deterministic(self):
        a = [ManifestRecord(id=str(i), file="") for i in range(100)]
        b = [ManifestRecord(id=str(i), file="") for i in range(100)]
        assign_splits(a, seed=5)
        assign_splits(b, seed=5)
        assert [r.split for r in a] == [r.split for r in b]

    def test_uniformity_10k(self):
        recs = [ManifestRecord(id=f"id{i}", file="") for i in range(10000)]
        assign_splits(recs, (0.9, 0.05, 0.05), seed=0)
        counts = {"train": 0, "val": 0, "test": 0}
        for r in recs:
            counts[r.split] += 1
        assert abs(counts["train"] / 10000 - 0.90) <= 0.02
        assert abs(counts["val"] / 10000 - 0.05) <= 0.02
        assert abs(counts["test"] / 10000 - 0.05) <= 0.02

    def test_preassigned_respected(self):
        recs = [ManifestRecord(id="x", file="", split="test")]
        assign_splits(recs, (1.0, 0.0, 0.0), seed=0)
        assert recs[0].split == "test"


class TestCurateEndToEnd:
    def test_outputs_and_reconciliation(self, svg_dir, tmp_path):
        out = tmp_path / "out"
        stats = curate(svg_dir, str(out), CurationConfig(seed=3))
        assert stats.ingested == 5
        assert stats.reconciled()
        manifest = (out / "manifest.jsonl").read_text().strip().splitlines()
        assert len(manifest) == stats.emitted
        row = json.loads(manifest[0])
        assert list(row.keys()) == ["id", "file", "split", "caption", "clip_score",
                                    "source", "n_tokens", "n_paths", "sha256"]
        # per-record files exist
        for row in map(json.loads, manifest):
            assert (out / row["file"]).exists()
            stem = row["file"].split("/")[-1][:-4]
            assert (out / "tokens" / f"{stem}.txt").exists()
            assert (out / "ppm" / f"{stem}.ppm").exists()

    def test_rerun_byte_identical(self, svg_dir, tmp_path):
        out1 = tmp_path / "o1"
        out2 = tmp_path / "o2"
        curate(svg_dir, str(out1), CurationConfig(seed=9))
        curate(svg_dir, str(out2), CurationConfig(seed=9))
        files1 = sorted(p.relative_to(out1) for p in out1.rglob("*") if p.is_file())
        files2 = sorted(p.relative_to(out2) for p in out2.rglob("*") if p.is_file())
        assert files1 == files2
        for rel in files1:
            assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel

    def test_clip_filter_applied(self, svg_dir, tmp_path):
        mf = tmp_path / "m.jsonl"
        mf.write_text(json.dumps({"id": "a", "file": "a.svg", "clip_score": 10.0}) + "\n")
        out = tmp_path / "out"
        stats = curate(svg_dir, str(out), CurationConfig(), str(mf))
        assert stats.dropped["clip"] == 1
        assert stats.reconciled()
