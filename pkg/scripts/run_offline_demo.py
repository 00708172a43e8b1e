"""End-to-end offline demo against the synthetic fixture.

Runs every workflow with the deterministic scripted provider: the caption
pipeline (recorded, then replayed), MP/HR metrics on the fixture's triplet
files, artifact detection over the detection exports, and the augmentation
expansion. No network access is used anywhere.

Usage:
    python scripts/make_demo_fixture.py --out demo_workspace
    python scripts/run_offline_demo.py --workspace demo_workspace
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from editverify.annotate import AnnotationStore, export_labels, write_labels_file
from editverify.cli import main as cli
from editverify.core import AccuracyLevel, ArtifactLevel, load_manifest
from editverify.annotate import AnnotationRecord


def run(name, argv):
    print(f"\n=== {name}: editverify {' '.join(argv)}")
    rc = cli(argv)
    if rc != 0:
        print(f"{name} failed with exit code {rc}", file=sys.stderr)
        sys.exit(rc)


def simulate_annotations(manifest: Path, store_path: Path, labels_path: Path) -> None:
    """Three scripted annotators label every edit; export majority labels."""
    edit_set = load_manifest(manifest)
    store = AnnotationStore(store_path)
    accuracy_cycle = [
        AccuracyLevel.ACCURATE,
        AccuracyLevel.ACCURATE_BUT_UNEXPECTED,
        AccuracyLevel.INACCURATE,
    ]
    artifact_cycle = [ArtifactLevel.SIGNIFICANT, ArtifactLevel.MILD, ArtifactLevel.NO_ARTIFACT]
    for i, rec in enumerate(edit_set.records):
        level = accuracy_cycle[i % 3]
        for k, annotator in enumerate(("ann-1", "ann-2", "ann-3")):
            store.submit(
                AnnotationRecord(
                    edit_id=rec.id,
                    annotator_id=annotator,
                    accuracy_level=level,
                    contextual_feedback="" if level is AccuracyLevel.ACCURATE else "scripted note",
                    technical_ok=(i + k) % 2 == 0,
                    technical_feedback="",
                    artifact_level=artifact_cycle[(i + (k > 1)) % 3],
                    caption_verdict="accepted" if i % 2 == 0 else "corrected",
                    final_caption=f"Scripted difference caption for {rec.id}.",
                    submitted_at=float(1_700_000_000 + i * 10 + k),
                )
            )
    write_labels_file(export_labels(store), labels_path)
    store.close()
    print(f"\n=== annotations: simulated 3 annotators -> {labels_path}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workspace", type=Path, default=Path("demo_workspace"))
    args = ap.parse_args()
    ws: Path = args.workspace
    manifest = ws / "edits/manifest.jsonl"
    if not manifest.is_file():
        sys.exit(f"no fixture at {ws}; run scripts/make_demo_fixture.py first")
    cassettes = str(ws / "cassettes")

    run(
        "pipeline (record)",
        ["pipeline", "--manifest", str(manifest), "--provider", "scripted",
         "--cassettes", cassettes, "--mode", "record", "--out", str(ws / "out/pipeline")],
    )
    run(
        "pipeline (replay)",
        ["pipeline", "--manifest", str(manifest), "--provider", "scripted",
         "--cassettes", cassettes, "--mode", "replay", "--out", str(ws / "out/pipeline_replay")],
    )
    a = (ws / "out/pipeline/pipeline_records.jsonl").read_bytes()
    b = (ws / "out/pipeline_replay/pipeline_records.jsonl").read_bytes()
    print(f"replay byte-identical records: {a == b}")

    run(
        "metrics",
        ["metrics", "--human", str(ws / "human_triplets.jsonl"),
         "--model", str(ws / "model_triplets.jsonl"),
         "--judge", "lexical", "--out", str(ws / "out/metrics")],
    )
    run(
        "artifacts",
        ["artifacts", "--manifest", str(manifest),
         "--detections-source", str(ws / "detections_source.jsonl"),
         "--detections-edited", str(ws / "detections_edited.jsonl"),
         "--pipeline-records", str(ws / "out/pipeline/pipeline_records.jsonl"),
         "--out", str(ws / "out/artifacts")],
    )
    run(
        "augment",
        ["augment", "--manifest", str(manifest),
         "--pipeline-records", str(ws / "out/pipeline/pipeline_records.jsonl"),
         "--detections-source", str(ws / "detections_source.jsonl"),
         "--provider", "scripted", "--cassettes", cassettes, "--mode", "record",
         "--out", str(ws / "out/augment")],
    )

    labels = ws / "labels.jsonl"
    simulate_annotations(manifest, ws / "annotations.jsonl", labels)
    run(
        "inspect",
        ["inspect", "--manifest", str(manifest), "--labels", str(labels),
         "--captions", str(ws / "out/pipeline/pipeline_records.jsonl"),
         "--slices", "action,consistency",
         "--pipeline-records", str(ws / "out/pipeline/pipeline_records.jsonl"),
         "--provider", "scripted", "--cassettes", cassettes, "--mode", "record",
         "--out", str(ws / "out/inspect")],
    )
    run(
        "report distribution",
        ["report", "distribution", "--labels", str(labels), "--out", str(ws / "out/distribution")],
    )
    run(
        "report comparison",
        ["report", "comparison",
         "--column",
         f"scripted={ws}/out/inspect/score_report.json,{ws}/out/metrics/metrics_report.json",
         "--out", str(ws / "out/comparison")],
    )
    print(f"\nall outputs under {ws}/out/")
    print("serve the annotation UI with:")
    print(f"  editverify serve --manifest {manifest} --store {ws}/annotations.jsonl "
          f"--captions {ws}/out/pipeline/pipeline_records.jsonl --ui frontend/dist")


if __name__ == "__main__":
    main()
