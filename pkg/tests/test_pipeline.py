import filecmp
import json
import os

import numpy as np
import pytest

from ctrkit import imageio
from ctrkit.errors import DuplicateCaseIdError, MalformedManifestError
from ctrkit.evaluation import NEGATIVE, POSITIVE
from ctrkit.pipeline import (
    STATUS_MEASURED,
    STATUS_UNMEASURABLE,
    CaseResult,
    PipelineConfig,
    emit_report,
    parse_manifest,
    run_pipeline,
    summarize,
)
from ctrkit.synthetic import _render_case, generate_synthetic_dataset


def write_manifest(path, rows):
    with open(path, "w") as fh:
        fh.write("case_id,image,heart_mask,lung_mask,label\n")
        for row in rows:
            fh.write(row + "\n")


class TestManifest:
    def test_minimal_row(self, tmp_path):
        path = tmp_path / "m.csv"
        write_manifest(path, ["c1,img/c1.pgm,,,pos"])
        records = parse_manifest(path)
        assert len(records) == 1
        rec = records[0]
        assert rec.case_id == "c1"
        assert rec.image_path == str(tmp_path / "img" / "c1.pgm")
        assert rec.heart_mask_path is None
        assert rec.lung_mask_path is None
        assert rec.dataset_label == POSITIVE

    def test_duplicate_case_id_reports_line(self, tmp_path):
        path = tmp_path / "m.csv"
        write_manifest(path, [
            "c1,a.pgm,,,pos",
            "c2,b.pgm,,,neg",
            "c3,c.pgm,,,unknown",
            "c1,d.pgm,,,pos",
        ])
        with pytest.raises(DuplicateCaseIdError) as err:
            parse_manifest(path)
        assert err.value.line == 5

    def test_three_rows_in_file_order(self, tmp_path):
        path = tmp_path / "m.csv"
        write_manifest(path, [
            "b,imgs/b.pgm,masks/bh.pgm,masks/bl.pgm,neg",
            "a,imgs/a.pgm,,masks/al.pgm,unknown",
            "c,imgs/c.pgm,masks/ch.pgm,,pos",
        ])
        records = parse_manifest(path)
        assert [r.case_id for r in records] == ["b", "a", "c"]
        assert records[0].heart_mask_path.endswith("bh.pgm")
        assert records[1].heart_mask_path is None
        assert records[2].lung_mask_path is None

    @pytest.mark.parametrize("content,line", [
        ("wrong,header,row,here,now\nc1,a.pgm,,,pos\n", 1),
        ("case_id,image,heart_mask,lung_mask,label\nc1,a.pgm,,pos\n", 2),
        ("case_id,image,heart_mask,lung_mask,label\nc1,a.pgm,,,bogus\n", 2),
        ("case_id,image,heart_mask,lung_mask,label\n,a.pgm,,,pos\n", 2),
        ("case_id,image,heart_mask,lung_mask,label\nc1,,,,pos\n", 2),
        ("", 1),
    ])
    def test_malformed(self, tmp_path, content, line):
        path = tmp_path / "m.csv"
        path.write_text(content)
        with pytest.raises(MalformedManifestError) as err:
            parse_manifest(path)
        assert err.value.line == line


class TestGenerator:
    def test_deterministic_bytes(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_synthetic_dataset(4, 64, seed=9, out_dir=a)
        generate_synthetic_dataset(4, 64, seed=9, out_dir=b)
        for sub in ("images", "masks"):
            names = sorted(os.listdir(a / sub))
            assert names == sorted(os.listdir(b / sub))
            for name in names:
                assert filecmp.cmp(a / sub / name, b / sub / name, shallow=False)
        assert (a / "manifest.csv").read_text() == (b / "manifest.csv").read_text()
        assert (a / "truth.json").read_text() == (b / "truth.json").read_text()

    def test_file_counts(self, tmp_path):
        cases = generate_synthetic_dataset(20, 64, seed=1, out_dir=tmp_path)
        assert len(cases) == 20
        n_files = len(os.listdir(tmp_path / "images")) + len(os.listdir(tmp_path / "masks"))
        assert n_files == 60

    def test_ratio_060_at_512_measured_within_0004(self, tmp_path):
        rng = np.random.default_rng(2)
        img, heart, lungs = _render_case(512, 0.60, rng)
        hp = tmp_path / "h.pgm"
        lp = tmp_path / "l.pgm"
        ip = tmp_path / "i.pgm"
        imageio.write_image(ip, img)
        imageio.write_mask(hp, heart)
        imageio.write_mask(lp, lungs)
        write_manifest(tmp_path / "m.csv", [f"c1,i.pgm,h.pgm,l.pgm,pos"])
        cfg = PipelineConfig(out_dir=str(tmp_path / "out"), overlays=False)
        results = run_pipeline(cfg, parse_manifest(tmp_path / "m.csv"))
        assert results[0].status == STATUS_MEASURED
        assert abs(results[0].measurement.ctr - 0.60) <= 0.004

    def test_labels_match_ratio_rule(self, tmp_path):
        cases = generate_synthetic_dataset(10, 64, seed=3, out_dir=tmp_path)
        for c in cases:
            assert c.label == ("pos" if c.ratio >= 0.5 else "neg")

    def test_parameter_validation(self, tmp_path):
        with pytest.raises(ValueError):
            generate_synthetic_dataset(0, 64, 0, tmp_path)
        with pytest.raises(ValueError):
            generate_synthetic_dataset(1, 16, 0, tmp_path)


def strip_timestamp(path):
    with open(path) as fh:
        obj = json.load(fh)
    obj.pop("generated_at", None)
    return json.dumps(obj, sort_keys=True)


class TestRunPipeline:
    def test_synthetic_end_to_end(self, tmp_path):
        data = tmp_path / "data"
        cases = generate_synthetic_dataset(6, 128, seed=4, out_dir=data)
        records = parse_manifest(data / "manifest.csv")
        cfg = PipelineConfig(out_dir=str(tmp_path / "out"))
        results = run_pipeline(cfg, records)
        assert all(r.status == STATUS_MEASURED for r in results)
        truth = json.loads((data / "truth.json").read_text())
        for r in results:
            t = truth[r.case_id]
            assert abs(r.measurement.ctr - t["ratio"]) <= 2.0 / 128
            assert r.measurement.detection == (t["label"] == "pos")
        # per-case artifacts exist
        for c in cases:
            assert (tmp_path / "out" / "cases" / f"{c.case_id}.json").exists()
            assert (tmp_path / "out" / "overlays" / f"{c.case_id}.png").exists()

    def test_single_blob_lung_is_unmeasurable(self, tmp_path):
        size = 64
        img = np.full((size, size), 120, dtype=np.uint8)
        heart = np.zeros((size, size), dtype=np.uint8)
        heart[24:40, 24:40] = 255
        lung = np.zeros((size, size), dtype=np.uint8)
        lung[10:50, 8:28] = 255  # one blob only
        imageio.write_pgm(tmp_path / "i.pgm", img)
        imageio.write_pgm(tmp_path / "h.pgm", heart)
        imageio.write_pgm(tmp_path / "l.pgm", lung)
        write_manifest(tmp_path / "m.csv", ["c1,i.pgm,h.pgm,l.pgm,pos"])
        cfg = PipelineConfig(out_dir=str(tmp_path / "out"))
        results = run_pipeline(cfg, parse_manifest(tmp_path / "m.csv"))
        assert results[0].status == STATUS_UNMEASURABLE
        assert results[0].reason == "TooFewComponents"
        obj = json.loads((tmp_path / "out" / "cases" / "c1.json").read_text())
        assert obj["status"] == "unmeasurable"
        assert obj["reason"] == "TooFewComponents"
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["cases"] == {"total": 1, "measured": 0, "unmeasurable": 1}

    def test_rerun_byte_identical(self, tmp_path):
        data = tmp_path / "data"
        generate_synthetic_dataset(4, 96, seed=5, out_dir=data)
        records = parse_manifest(data / "manifest.csv")
        out_a = tmp_path / "out_a"
        out_b = tmp_path / "out_b"
        run_pipeline(PipelineConfig(out_dir=str(out_a)), records)
        run_pipeline(PipelineConfig(out_dir=str(out_b)), records)
        for name in sorted(os.listdir(out_a / "cases")):
            assert (out_a / "cases" / name).read_bytes() == (out_b / "cases" / name).read_bytes()
        assert strip_timestamp(out_a / "summary.json") == strip_timestamp(out_b / "summary.json")
        for name in ("summary.csv", "distribution.csv", "mismatch.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_parallel_matches_serial(self, tmp_path):
        data = tmp_path / "data"
        generate_synthetic_dataset(5, 96, seed=6, out_dir=data)
        records = parse_manifest(data / "manifest.csv")
        out_a = tmp_path / "serial"
        out_b = tmp_path / "parallel"
        run_pipeline(PipelineConfig(out_dir=str(out_a), overlays=False), records)
        run_pipeline(PipelineConfig(out_dir=str(out_b), overlays=False, parallelism=4), records)
        for name in sorted(os.listdir(out_a / "cases")):
            assert (out_a / "cases" / name).read_bytes() == (out_b / "cases" / name).read_bytes()

    def test_measurable_plus_unmeasurable_equals_total(self, tmp_path):
        data = tmp_path / "data"
        generate_synthetic_dataset(3, 64, seed=7, out_dir=data)
        records = parse_manifest(data / "manifest.csv")
        cfg = PipelineConfig(out_dir=str(tmp_path / "out"), overlays=False)
        results = run_pipeline(cfg, records)
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        c = summary["cases"]
        assert c["measured"] + c["unmeasurable"] == c["total"] == len(records)


def measured_result(case_id, ctr, label):
    from ctrkit.core import Point, Segment
    from ctrkit.ctr import Measurement, classify

    category, detection = classify(ctr)
    seg = Segment(Point(0, 0), Point(1, 0))
    m = Measurement(
        mrd=seg, mld=seg, id=seg,
        mrd_len=ctr / 2, mld_len=ctr / 2, id_len=1.0,
        midline_x=0.5, ctr=ctr, category=category, detection=detection,
        flags=frozenset(),
    )
    return CaseResult(case_id, STATUS_MEASURED, label, measurement=m)


class TestReports:
    def test_empty_results(self, tmp_path):
        paths = emit_report([], tmp_path)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["cases"] == {"total": 0, "measured": 0, "unmeasurable": 0}
        assert summary["detection"] is None
        assert summary["mismatch"]["rows"] == []
        assert os.path.exists(paths["summary_csv"])

    def test_published_mismatch_fixture(self, tmp_path):
        results = []
        idx = 0
        for ctr, label, count in [
            (0.4, POSITIVE, 19), (0.6, POSITIVE, 194),
            (0.4, NEGATIVE, 172), (0.6, NEGATIVE, 40),
        ]:
            for _ in range(count):
                results.append(measured_result(f"c{idx}", ctr, label))
                idx += 1
        summary = summarize(results)
        rows = {r["label"]: r for r in summary["mismatch"]["rows"]}
        assert rows["pos"]["errors_pct"] == 8.9
        assert rows["neg"]["errors_pct"] == 18.9
        assert summary["mismatch"]["average_pct"] == 13.9

    def test_golden_summary_fixture(self, tmp_path):
        # frozen from the first implementation: a fixed mix of results
        results = [
            measured_result("c1", 0.43, POSITIVE),
            measured_result("c2", 0.58, POSITIVE),
            measured_result("c3", 0.47, NEGATIVE),
            measured_result("c4", 0.52, NEGATIVE),
            measured_result("c5", 0.61, "unknown"),
            CaseResult("c6", STATUS_UNMEASURABLE, NEGATIVE, reason="TooFewComponents"),
        ]
        emit_report(results, tmp_path)
        got = strip_timestamp(tmp_path / "summary.json")
        golden = os.path.join(os.path.dirname(__file__), "data", "golden_summary.json")
        expect = json.dumps(json.loads(open(golden).read()), sort_keys=True)
        assert got == expect
