import json
from pathlib import Path

import numpy as np
import pytest

from editverify.annotate import AnnotationStore, export_labels, write_labels_file
from editverify.cli import main
from editverify.core import AccuracyLevel, ArtifactLevel
from editverify.geometry import rle_encode
from tests.test_annotate import record as annotation_record


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


def read_jsonl(path):
    return [json.loads(l) for l in Path(path).read_text().splitlines() if l.strip()]


def triplet(action, source, target):
    return {"action": action, "source": source, "target": target}


def test_unknown_subcommand_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0


def test_metrics_worked_example(tmp_path, capsys):
    human = tmp_path / "human.jsonl"
    model = tmp_path / "model.jsonl"
    write_jsonl(
        human,
        [
            {
                "id": "fig1",
                "triplets": [
                    triplet("replace", "carpet floor", "wooden floor"),
                    triplet("add", None, "door"),
                    triplet("change", "fridge bottom", "extended fridge bottom"),
                    triplet("change", "yellow box", "extended yellow box"),
                    triplet("remove", "yellow box text", None),
                    triplet("replace", "text", "image"),
                ],
            }
        ],
    )
    write_jsonl(
        model,
        [{"id": "fig1", "triplets": [triplet("replace", "carpet floor", "wooden floor")]}],
    )
    out = tmp_path / "out"
    rc = main(
        ["metrics", "--human", str(human), "--model", str(model), "--out", str(out)]
    )
    assert rc == 0
    report = json.loads((out / "metrics_report.json").read_text())
    assert report["mp"] == pytest.approx(100 / 6, abs=0.01)
    assert report["hr"] == 0.0
    assert report["run_meta"]
    table = (out / "metrics_table.txt").read_text()
    assert "16.67%" in table
    per_edit = read_jsonl(out / "per_edit_metrics.jsonl")
    assert per_edit[0]["id"] == "fig1" and per_edit[0]["matched"] == 1


def test_metrics_caption_inputs_via_scripted_provider(tmp_path):
    human = tmp_path / "human.jsonl"
    model = tmp_path / "model.jsonl"
    write_jsonl(human, [{"id": "e1", "caption": "A squirrel was added to the image."}])
    write_jsonl(model, [{"id": "e1", "caption": "A squirrel was added next to the vase."}])
    out = tmp_path / "m_out"
    rc = main(
        [
            "metrics",
            "--human", str(human),
            "--model", str(model),
            "--provider", "scripted",
            "--mode", "live",
            "--out", str(out),
        ]
    )
    assert rc == 0
    report = json.loads((out / "metrics_report.json").read_text())
    assert report["mp"] == 100.0 and report["hr"] == 0.0


def _block_mask(size, boxes):
    w, h = size
    m = np.zeros((h, w), dtype=bool)
    for x, y, bw, bh in boxes:
        m[y : y + bh, x : x + bw] = True
    return m


def _export(image_id, size, objects):
    entries = []
    for label, score, boxes in objects:
        mask = _block_mask(size, boxes)
        ys, xs = np.nonzero(mask)
        entries.append(
            {
                "label": label,
                "score": score,
                "bbox": [int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1)],
                "mask_rle": rle_encode(mask),
            }
        )
    return {"image_id": image_id, "resolution": list(size), "objects": entries}


@pytest.fixture
def artifact_inputs(edit_dir_factory, tmp_path):
    # One 100x100 edit whose mask partially covers a truck (ratio 0.2).
    manifest = edit_dir_factory(
        [{"id": "e1", "size": (100, 100), "mask_boxes": [(20, 20, 8, 40)]}],
        name="artifact_edits",
    )
    truck = [(20, 20, 40, 40)]
    src = tmp_path / "src_exports.jsonl"
    tgt = tmp_path / "tgt_exports.jsonl"
    write_jsonl(src, [_export("e1", (100, 100), [("truck", 0.95, truck)])])
    write_jsonl(tgt, [_export("e1", (100, 100), [("truck", 0.80, truck)])])
    return manifest, src, tgt


def test_artifacts_cli_and_threshold_monotonicity(artifact_inputs, tmp_path):
    manifest, src, tgt = artifact_inputs

    def run(thresholds, name):
        out = tmp_path / name
        rc = main(
            [
                "artifacts",
                "--manifest", str(manifest),
                "--detections-source", str(src),
                "--detections-edited", str(tgt),
                "--out", str(out),
            ]
            + (["--thresholds", thresholds] if thresholds else [])
        )
        assert rc == 0
        return read_jsonl(out / "artifact_findings.jsonl")

    default = run(None, "a_default")
    assert default[0]["verdict"] is True
    assert default[0]["findings"][0]["class_label"] == "truck"
    loose = run('{"score_drop_threshold": 0.10}', "a_loose")
    assert len(loose[0]["findings"]) <= len(default[0]["findings"])
    assert loose[0]["verdict"] is True  # 0.15 drop still exceeds 0.10
    strict = run('{"score_drop_threshold": 0.20}', "a_strict")
    assert strict[0]["verdict"] is False


def test_pipeline_cli_record_then_replay_deterministic(edit_dir_factory, tmp_path):
    manifest = edit_dir_factory(
        [
            {"id": f"e{i}", "size": (64, 64), "mask_boxes": [(16, 16, 12, 12)],
             "instruction": f"add a pig near the fence {i}"}
            for i in range(3)
        ],
        name="pipe_edits",
    )
    cassettes = tmp_path / "cassettes"

    def run(mode, name):
        out = tmp_path / name
        rc = main(
            [
                "pipeline",
                "--manifest", str(manifest),
                "--provider", "scripted",
                "--cassettes", str(cassettes),
                "--mode", mode,
                "--out", str(out),
            ]
        )
        assert rc == 0
        return out

    first = run("record", "p0")
    outs = [run("replay", f"p{i}") for i in (1, 2, 3)]
    files = ["pipeline_records.jsonl", "edit_type_distribution.json", "edit_type_distribution.txt", "run_meta.json"]
    for f in files:
        blobs = {(_dir / f).read_bytes() for _dir in outs}
        assert len(blobs) == 1, f"{f} differs across replay runs"
    records = read_jsonl(first / "pipeline_records.jsonl")
    assert len(records) == 3
    assert all(r["short_caption"] for r in records)
    dist = json.loads((first / "edit_type_distribution.json").read_text())
    assert sum(dist["action_shares"].values()) == pytest.approx(100.0, abs=0.5)


def make_labels_file(tmp_path, edit_ids):
    store = AnnotationStore(tmp_path / "ann.jsonl")
    for i, e in enumerate(edit_ids):
        accurate = i % 2 == 0
        for a in ("a1", "a2", "a3"):
            store.submit(
                annotation_record(
                    edit_id=e,
                    annotator=a,
                    accuracy=AccuracyLevel.ACCURATE if accurate else AccuracyLevel.INACCURATE,
                    feedback="" if accurate else "does not match",
                    artifact=ArtifactLevel.SIGNIFICANT if accurate else ArtifactLevel.MILD,
                )
            )
    labels_path = tmp_path / "labels.jsonl"
    write_labels_file(export_labels(store), labels_path)
    store.close()
    return labels_path


def test_inspect_cli_replay_deterministic(edit_dir_factory, tmp_path):
    edit_ids = [f"e{i}" for i in range(4)]
    manifest = edit_dir_factory(
        [{"id": e, "instruction": f"change the wall color {i}"} for i, e in enumerate(edit_ids)],
        name="inspect_edits",
    )
    labels = make_labels_file(tmp_path, edit_ids)
    cassettes = tmp_path / "icassettes"

    def run(mode, name):
        out = tmp_path / name
        rc = main(
            [
                "inspect",
                "--manifest", str(manifest),
                "--labels", str(labels),
                "--provider", "scripted",
                "--cassettes", str(cassettes),
                "--mode", mode,
                "--questions", "Accuracy,Artifacts",
                "--out", str(out),
            ]
        )
        assert rc == 0
        return out

    run("record", "i0")
    outs = [run("replay", f"i{k}") for k in (1, 2, 3)]
    for f in ("predictions.jsonl", "score_report.json", "score_table.txt", "run_meta.json"):
        blobs = {(d / f).read_bytes() for d in outs}
        assert len(blobs) == 1
    report = json.loads((outs[0] / "score_report.json").read_text())
    assert set(report["per_question"]) == {"Accuracy", "Artifacts"}
    for q in report["per_question"].values():
        assert 0.0 <= q["balanced_accuracy"] <= 100.0


def test_augment_cli(edit_dir_factory, tmp_path):
    manifest = edit_dir_factory(
        [{"id": "e1", "instruction": "remove the bench"}], name="aug_edits"
    )
    records = tmp_path / "pipeline_records.jsonl"
    write_jsonl(
        records,
        [
            {
                "id": "e1",
                "action": "Remove",
                "source_object": "bench",
                "target_object": None,
                "short_caption": "The bench was removed.",
            }
        ],
    )
    detections = tmp_path / "aug_src.jsonl"
    write_jsonl(
        detections,
        [
            _export(
                "e1",
                (64, 48),
                [("bench", 0.9, [(4, 4, 16, 16)]), ("table", 0.8, [(30, 20, 17, 15)])],
            )
        ],
    )
    out = tmp_path / "aug_out"
    rc = main(
        [
            "augment",
            "--manifest", str(manifest),
            "--pipeline-records", str(records),
            "--detections-source", str(detections),
            "--provider", "scripted",
            "--out", str(out),
        ]
    )
    assert rc == 0
    rows = read_jsonl(out / "training_manifest.jsonl")
    assert len(rows) == 4
    assert {r["lineage"] for r in rows} == {"original", "reversed", "negative", "reversed_negative"}
    report = json.loads((out / "augment_report.json").read_text())
    assert report["counts"]["reversed_negative"] == 1 and not report["failures"]


def test_report_distribution_cli(tmp_path, capsys):
    labels = make_labels_file(tmp_path, ["e1", "e2", "e3", "e4"])
    out = tmp_path / "dist"
    rc = main(["report", "distribution", "--labels", str(labels), "--out", str(out)])
    assert rc == 0
    dist = json.loads((out / "distribution.json").read_text())
    acc = dist["categories"]["Accuracy Level"]["percentages"]
    assert acc["Accurate"] == 50.0 and acc["Inaccurate"] == 50.0
    assert dist["categories"]["Artifacts Level"]["percentages"]["Significant"] == 50.0
    text = (out / "distribution.txt").read_text()
    assert "Accuracy Level" in text and "50.0%" in text


def test_report_comparison_cli(tmp_path):
    score = tmp_path / "score.json"
    metrics = tmp_path / "metrics.json"
    score.write_text(
        json.dumps(
            {
                "per_question": {
                    "Accuracy": {"balanced_accuracy": 70.25},
                    "Artifacts": {"balanced_accuracy": 58.5},
                }
            }
        )
    )
    metrics.write_text(
        json.dumps(
            {"mp": 100 / 6, "mp_soft": 100 / 6, "hr": 0.0, "hr_soft": 0.0,
             "avg_diffs_per_edit": 1.0, "no_diff_rate": 0.0}
        )
    )
    out = tmp_path / "cmp"
    rc = main(
        [
            "report", "comparison",
            "--column", f"demo={score},{metrics}",
            "--out", str(out),
        ]
    )
    assert rc == 0
    text = (out / "comparison.txt").read_text()
    assert "70.2%" in text or "70.3%" in text
    assert "16.67%" in text  # MP formatted to two decimals
    comp = json.loads((out / "comparison.json").read_text())
    assert comp["models"]["demo"]["questions"]["Accuracy"] == 70.25


def test_metrics_missing_input_is_error(tmp_path, capsys):
    rc = main(
        ["metrics", "--human", str(tmp_path / "x.jsonl"), "--model", str(tmp_path / "y.jsonl"),
         "--out", str(tmp_path / "o")]
    )
    assert rc == 1
    assert "error" in capsys.readouterr().err
