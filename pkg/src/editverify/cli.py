"""Command-line entry point for all workflows.

Subcommands: metrics, artifacts, pipeline, inspect, augment, serve, report.
Every run writes a run_meta.json (package version, prompt digests,
thresholds, lexicon version, config) into the output directory, and every
JSON report embeds that record's digest, so outputs are self-describing.
Replay-mode runs with fixed cassettes and fixtures are byte-deterministic.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .artifacts import (
    ArtifactConfig,
    artifact_verdict,
    detect_score_drop,
    detect_secondary_changes,
    load_detection_export,
)
from .augment import SceneObject, TrainingInstance, expand, instance_to_dict
from .core import ActionType, DifferenceTriplet, load_manifest, parse_action
from .geometry import bboxes_from_mask, load_mask, scale_box
from .harness import (
    QUESTION_KINDS,
    ask_question,
    binarize,
    load_questions,
    question_digests,
    score,
)
from .lexicon import lexical_similar, load_lexicon
from .pipeline import run_pipeline
from .providers import (
    LexicalJudge,
    LlmJudge,
    Provider,
    ProviderConfig,
    build_provider,
    prompt_digest,
)
from .reports import (
    digest_of,
    emit_comparison,
    emit_distribution,
    render_comparison,
    render_distribution,
    render_table,
)
from .triplets import TripletSet, aggregate, evaluate_edit, extract_triplets
from .annotate import AnnotationStore, read_labels_file

_PROMPT_FILES = (
    "describe_region.txt",
    "metadata_oneshot.txt",
    "extract_triplets.txt",
    "judge_object_similarity.txt",
    "judge_feedback_overlap.txt",
    "judge_main_difference.txt",
    "question_accuracy.txt",
    "question_contextual_consistency.txt",
    "question_technical_precision.txt",
    "question_artifacts.txt",
    "question_diff_caption.txt",
    "task_all_differences.txt",
    "task_main_difference.txt",
    "augment_reverse.txt",
    "augment_negative_object.txt",
    "augment_negative_attribute.txt",
    "augment_negative_rewrite.txt",
)


class CliError(Exception):
    pass


def load_provider_config(spec: str) -> ProviderConfig:
    if spec == "scripted":
        return ProviderConfig(provider_id="scripted", model_name="scripted-1")
    path = Path(spec)
    if not path.is_file():
        raise CliError(f"provider config not found: {spec}")
    obj = json.loads(path.read_text())
    try:
        return ProviderConfig(**obj)
    except TypeError as exc:
        raise CliError(f"bad provider config {spec}: {exc}") from exc


def make_provider(args) -> Provider:
    if not args.provider:
        raise CliError("this subcommand needs --provider")
    cfg = load_provider_config(args.provider)
    if args.mode in ("record", "replay") and not args.cassettes:
        raise CliError(f"--mode {args.mode} requires --cassettes")
    return build_provider(cfg, cassette_dir=args.cassettes, mode=args.mode)


def make_judge(args, lex, provider_factory):
    if args.judge == "lexical":
        return LexicalJudge(lex)
    return LlmJudge(provider_factory())


def load_thresholds(spec: str | None) -> ArtifactConfig:
    if not spec:
        return ArtifactConfig()
    path = Path(spec)
    obj = json.loads(path.read_text()) if path.is_file() else json.loads(spec)
    return ArtifactConfig(**obj)


def write_run_meta(out_dir: Path, subcommand: str, args, extra: dict | None = None) -> str:
    """Write run_meta.json; returns its digest for embedding in outputs."""
    meta = {
        "tool": "editverify",
        "version": __version__,
        "subcommand": subcommand,
        "config": {
            "manifest": args.manifest if hasattr(args, "manifest") else None,
            "provider": getattr(args, "provider", None),
            "mode": getattr(args, "mode", None),
            "judge": getattr(args, "judge", None),
            "cassettes": bool(getattr(args, "cassettes", None)),
        },
        "prompt_digests": {name: prompt_digest(name) for name in _PROMPT_FILES},
    }
    if extra:
        meta.update(extra)
    meta["digest"] = digest_of(meta)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )
    return meta["digest"]


def write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def write_jsonl(path: Path, rows: list[dict]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


def _triplet_from_dict(obj: dict) -> DifferenceTriplet:
    return DifferenceTriplet(
        source_object=obj.get("source"),
        target_object=obj.get("target"),
        action=parse_action(obj["action"]),
    )


def _triplet_set(entry: dict, origin: str, provider_factory) -> TripletSet:
    if "triplets" in entry:
        return TripletSet(
            tuple(_triplet_from_dict(t) for t in entry["triplets"]),
            origin=origin,
            edit_id=entry["id"],
        )
    if "caption" in entry:
        return extract_triplets(
            entry["caption"], provider_factory(), edit_id=entry["id"], origin=origin
        )
    raise CliError(f"record {entry.get('id')!r} has neither 'triplets' nor 'caption'")



def _parallel_map(fn, items, max_workers: int):
    """Apply fn across items in a bounded pool, preserving input order.

    Results and exceptions land at their item's index, so output files stay
    deterministic regardless of scheduling.
    """
    if max_workers <= 1 or len(items) <= 1:
        out = []
        for item in items:
            try:
                out.append((item, fn(item), None))
            except Exception as exc:  # caller decides what failures mean
                out.append((item, None, exc))
        return out
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(fn, item) for item in items]
    out = []
    for item, fut in zip(items, futures):
        try:
            out.append((item, fut.result(), None))
        except Exception as exc:
            out.append((item, None, exc))
    return out


def cmd_metrics(args) -> int:
    lex = load_lexicon(args.lexicon)
    out_dir = Path(args.out)
    provider = None

    def provider_factory():
        nonlocal provider
        if provider is None:
            provider = make_provider(args)
        return provider

    judge = make_judge(args, lex, provider_factory)
    human = {e["id"]: e for e in read_jsonl(args.human)}
    model = {e["id"]: e for e in read_jsonl(args.model)}
    shared = sorted(set(human) & set(model))
    if not shared:
        raise CliError("no edit ids shared between --human and --model inputs")

    per_edit = []
    reports = []
    for edit_id in shared:
        h = _triplet_set(human[edit_id], "human", provider_factory)
        m = _triplet_set(model[edit_id], "model", provider_factory)
        report = evaluate_edit(h, m, judge)
        reports.append(report)
        per_edit.append(
            {
                "id": edit_id,
                "mp": report.mp,
                "hr": report.hr,
                "mp_soft": report.mp_soft,
                "hr_soft": report.hr_soft,
                "h_count": report.h_count,
                "m_count": report.m_count,
                "matched": report.matched,
                "matched_soft": report.matched_soft,
            }
        )
    corpus = aggregate(reports)
    digest = write_run_meta(
        out_dir, "metrics", args, {"lexicon_version": lex.version, "edits": len(shared)}
    )
    write_jsonl(out_dir / "per_edit_metrics.jsonl", per_edit)
    corpus_dict = {
        "run_meta": digest,
        "aggregation": "micro",
        "matching": "one-to-one maximum",
        **{k: getattr(corpus, k) for k in (
            "mp", "hr", "mp_soft", "hr_soft", "h_count", "m_count",
            "matched", "matched_soft", "avg_diffs_per_edit", "no_diff_rate", "edits",
        )},
    }
    write_json(out_dir / "metrics_report.json", corpus_dict)
    table = render_comparison(
        emit_comparison({"model": {"metrics": corpus, "questions": {}}})
    )
    (out_dir / "metrics_table.txt").write_text(table + f"\nrun_meta: {digest}\n")
    print(table)
    return 0


def _scene_objects(export) -> list[SceneObject]:
    return [
        SceneObject(label=o.class_label, area=float(o.bbox.area)) for o in export.objects
    ]


def cmd_artifacts(args) -> int:
    lex = load_lexicon(args.lexicon)
    cfg = load_thresholds(args.thresholds)
    edit_set = load_manifest(args.manifest)
    src_exports = {e["image_id"]: load_detection_export(e) for e in read_jsonl(args.detections_source)}
    tgt_exports = {e["image_id"]: load_detection_export(e) for e in read_jsonl(args.detections_edited)}
    pipeline_records = (
        {r["id"]: r for r in read_jsonl(args.pipeline_records)}
        if args.pipeline_records
        else {}
    )

    out_dir = Path(args.out)
    digest = write_run_meta(
        out_dir,
        "artifacts",
        args,
        {"thresholds": asdict(cfg), "lexicon_version": lex.version},
    )
    rows = []
    flagged = 0
    for rec in edit_set.records:
        if rec.id not in src_exports or rec.id not in tgt_exports:
            continue
        src, tgt = src_exports[rec.id], tgt_exports[rec.id]
        mask = load_mask(edit_set.mask_path(rec))
        findings = detect_score_drop(src, tgt, mask, cfg)
        meta = pipeline_records.get(rec.id)
        if meta:
            try:
                action = parse_action(meta["action"])
            except ValueError:
                action = None
            main_object = meta.get("target_object") or meta.get("source_object")
            if action in (ActionType.ADD, ActionType.REMOVE) and main_object:
                mask_res = (mask.shape[1], mask.shape[0])
                main_boxes = []
                for export in (src, tgt):
                    for obj in export.objects:
                        if lexical_similar(obj.class_label, main_object, lex):
                            main_boxes.append(
                                scale_box(obj.bbox, export.resolution, mask_res)
                            )
                if not main_boxes:
                    main_boxes = bboxes_from_mask(mask)
                findings += detect_secondary_changes(
                    src, tgt, mask, main_boxes, main_object, action, lex
                )
        verdict = artifact_verdict(findings)
        flagged += int(verdict)
        rows.append(
            {
                "id": rec.id,
                "verdict": verdict,
                "findings": [
                    {
                        "method": f.method,
                        "class_label": f.class_label,
                        "src_score": f.src_score,
                        "tgt_score": f.tgt_score,
                        "presence_change": f.presence_change,
                        "resolutions_confirmed": f.resolutions_confirmed,
                    }
                    for f in findings
                ],
            }
        )
    write_jsonl(out_dir / "artifact_findings.jsonl", rows)
    write_json(
        out_dir / "artifacts_report.json",
        {
            "run_meta": digest,
            "edits": len(rows),
            "flagged": flagged,
            "thresholds": asdict(cfg),
        },
    )
    print(f"artifacts: {flagged}/{len(rows)} edits flagged")
    return 0


def cmd_pipeline(args) -> int:
    lex = load_lexicon(args.lexicon)
    edit_set = load_manifest(args.manifest)
    provider = make_provider(args)
    out_dir = Path(args.out)
    digest = write_run_meta(out_dir, "pipeline", args, {"lexicon_version": lex.version})

    rows = []
    action_counts: dict[str, int] = {}
    failures = []
    results = _parallel_map(
        lambda rec: run_pipeline(rec, provider, lex, edit_set.base_dir),
        list(edit_set.records),
        provider.config.max_parallel,
    )
    for rec, meta, error in results:
        if error is not None:  # per-edit failures are reported, not fatal
            failures.append({"id": rec.id, "error": str(error)})
            continue
        action_counts[meta.action.value] = action_counts.get(meta.action.value, 0) + 1
        rows.append(
            {
                "id": rec.id,
                "action": meta.action.value,
                "source_object": meta.source_object,
                "target_object": meta.target_object,
                "short_caption": meta.short_caption,
                "extensive_caption": meta.extensive_caption,
                "revised_instruction": meta.revised_instruction,
                "explanation": meta.explanation,
                "grounding_choice": meta.grounding_choice,
                "attempts": meta.attempts,
            }
        )
    write_jsonl(out_dir / "pipeline_records.jsonl", rows)
    total = sum(action_counts.values())
    dist = {
        "run_meta": digest,
        "edits": total,
        "failures": failures,
        "action_shares": {
            k: round(100.0 * v / total, 1) if total else 0.0
            for k, v in sorted(action_counts.items())
        },
    }
    write_json(out_dir / "edit_type_distribution.json", dist)
    table = render_table(
        ["Action", "Share"],
        [[k, f"{v:.1f}%"] for k, v in dist["action_shares"].items()],
    )
    (out_dir / "edit_type_distribution.txt").write_text(table + f"\nrun_meta: {digest}\n")
    print(f"pipeline: {len(rows)} records, {len(failures)} failures")
    if failures:
        for f in failures:
            print(f"pipeline: edit {f['id']} failed: {f['error']}", file=sys.stderr)
        return 1
    return 0


def cmd_inspect(args) -> int:
    edit_set = load_manifest(args.manifest)
    provider = make_provider(args)
    labels = {l.edit_id: binarize(l) for l in read_labels_file(args.labels)}
    captions = (
        {r["id"]: r.get("short_caption") or r.get("caption", "") for r in read_jsonl(args.captions)}
        if args.captions
        else {}
    )
    questions = load_questions()
    kinds = args.questions.split(",") if args.questions else list(QUESTION_KINDS)
    unknown = [k for k in kinds if k not in QUESTION_KINDS]
    if unknown:
        raise CliError(f"unknown questions: {unknown}")

    out_dir = Path(args.out)
    digest = write_run_meta(
        out_dir, "inspect", args, {"questions": kinds, "question_digests": question_digests()}
    )
    def answer_edit(rec):
        answers = {}
        for kind in kinds:
            if kind == "DiffCaptionAccuracy":
                caption = captions.get(rec.id)
                if not caption:
                    continue
                answers[kind] = ask_question(
                    rec, questions[kind], provider, edit_set.base_dir, caption=caption
                )
            else:
                answers[kind] = ask_question(rec, questions[kind], provider, edit_set.base_dir)
        return answers

    labeled = [rec for rec in edit_set.records if rec.id in labels]
    preds: dict[str, dict[str, bool]] = {}
    for rec, answers, error in _parallel_map(
        answer_edit, labeled, provider.config.max_parallel
    ):
        if error is not None:
            raise error
        preds[rec.id] = answers

    slice_keys = None
    if args.slices and args.pipeline_records:
        records = {r["id"]: r for r in read_jsonl(args.pipeline_records)}
        slice_keys = {}
        for edit_id in preds:
            keys = {}
            if "action" in args.slices and edit_id in records:
                keys["action"] = records[edit_id]["action"]
            if "consistency" in args.slices and labels[edit_id].visually_consistent is not None:
                keys["consistency"] = "yes" if labels[edit_id].visually_consistent else "no"
            if keys:
                slice_keys[edit_id] = keys
    report = score(preds, labels, slice_keys=slice_keys)

    write_jsonl(
        out_dir / "predictions.jsonl",
        [{"id": e, **{k: v for k, v in preds[e].items()}} for e in sorted(preds)],
    )
    write_json(out_dir / "score_report.json", {"run_meta": digest, **report.to_dict()})
    balanced = {k: v.balanced_accuracy for k, v in report.per_question.items()}
    table = render_comparison(emit_comparison({"model": {"questions": balanced}}))
    (out_dir / "score_table.txt").write_text(table + f"\nrun_meta: {digest}\n")
    print(table)
    return 0


def cmd_augment(args) -> int:
    lex = load_lexicon(args.lexicon)
    edit_set = load_manifest(args.manifest)
    provider = make_provider(args)
    pipeline_records = {r["id"]: r for r in read_jsonl(args.pipeline_records)}
    scene_by_id: dict[str, list[SceneObject]] = {}
    if args.detections_source:
        for entry in read_jsonl(args.detections_source):
            scene_by_id[entry["image_id"]] = _scene_objects(load_detection_export(entry))

    originals = []
    for rec in edit_set.records:
        meta = pipeline_records.get(rec.id)
        if not meta:
            continue
        originals.append(
            TrainingInstance(
                id=rec.id,
                image_pair=(rec.source_image.as_posix(), rec.edited_image.as_posix()),
                instruction=rec.instruction,
                difference_caption=meta["short_caption"],
                label="positive",
                lineage="original",
                action=parse_action(meta["action"]),
                source_object=meta.get("source_object"),
                target_object=meta.get("target_object"),
            )
        )
    result = expand(originals, provider, lex, scene_by_id)
    out_dir = Path(args.out)
    digest = write_run_meta(out_dir, "augment", args, {"lexicon_version": lex.version})
    write_jsonl(out_dir / "training_manifest.jsonl", [instance_to_dict(i) for i in result.instances])
    write_json(
        out_dir / "augment_report.json",
        {
            "run_meta": digest,
            "counts": result.counts,
            "failures": [
                {"id": i, "stage": s, "reason": r} for i, s, r in result.failures
            ],
        },
    )
    print(f"augment: {len(result.instances)} instances ({result.counts})")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    edit_set = load_manifest(args.manifest)
    captions = (
        {r["id"]: r.get("short_caption") or r.get("caption", "") for r in read_jsonl(args.captions)}
        if args.captions
        else {}
    )
    annotators = args.annotators.split(",") if args.annotators else None
    store = AnnotationStore(args.store, annotators=annotators)
    app = create_app(edit_set, store, captions=captions, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    if args.report_kind == "distribution":
        labels = read_labels_file(args.labels)
        digest = write_run_meta(out_dir, "report-distribution", args, {"edits": len(labels)})
        dist = emit_distribution(labels)
        dist["run_meta"] = digest
        write_json(out_dir / "distribution.json", dist)
        text = render_distribution(dist)
        (out_dir / "distribution.txt").write_text(text + f"\nrun_meta: {digest}\n")
        print(text)
        return 0

    columns = {}
    for spec in args.column:
        if "=" not in spec:
            raise CliError(f"--column expects NAME=score.json[,metrics.json]: {spec}")
        name, paths = spec.split("=", 1)
        parts: dict = {"questions": {}}
        for path in paths.split(","):
            obj = json.loads(Path(path).read_text())
            if "per_question" in obj:
                parts["questions"] = {
                    k: v["balanced_accuracy"] for k, v in obj["per_question"].items()
                }
            elif "mp" in obj:
                parts["metrics"] = {
                    k: obj.get(k)
                    for k in ("mp", "mp_soft", "hr", "hr_soft", "avg_diffs_per_edit", "no_diff_rate")
                }
            if "main_difference" in obj:
                parts["main_difference"] = obj["main_difference"]
        columns[name] = parts
    digest = write_run_meta(out_dir, "report-comparison", args, {"models": sorted(columns)})
    comp = emit_comparison(columns)
    comp["run_meta"] = digest
    write_json(out_dir / "comparison.json", comp)
    text = render_comparison(comp)
    (out_dir / "comparison.txt").write_text(text + f"\nrun_meta: {digest}\n")
    print(text)
    return 0


def _add_common(sp, provider=True, out=True):
    sp.add_argument("--lexicon", default=None, help="WordNet-format noun db dir (default: bundled)")
    if provider:
        sp.add_argument("--provider", default=None, help="provider config JSON or 'scripted'")
        sp.add_argument("--cassettes", default=None, help="cassette directory")
        sp.add_argument("--mode", choices=("live", "record", "replay"), default="live")
        sp.add_argument("--judge", choices=("llm", "lexical"), default="lexical")
    if out:
        sp.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="editverify", description="Verification toolkit for text-guided image edits."
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("metrics", help="difference-caption MP/HR metrics")
    sp.add_argument("--human", required=True, help="JSONL: {'id', 'triplets'|'caption'}")
    sp.add_argument("--model", required=True, help="JSONL: {'id', 'triplets'|'caption'}")
    _add_common(sp)
    sp.set_defaults(fn=cmd_metrics)

    sp = sub.add_parser("artifacts", help="artifact detection over detection exports")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--detections-source", required=True, help="JSONL of exports keyed by edit id")
    sp.add_argument("--detections-edited", required=True)
    sp.add_argument("--pipeline-records", default=None, help="enables the secondary-object method")
    sp.add_argument("--thresholds", default=None, help="ArtifactConfig overrides (JSON file or inline)")
    _add_common(sp, provider=False)
    sp.set_defaults(fn=cmd_artifacts)

    sp = sub.add_parser("pipeline", help="difference-caption pipeline over an edit set")
    sp.add_argument("--manifest", required=True)
    _add_common(sp)
    sp.set_defaults(fn=cmd_pipeline)

    sp = sub.add_parser("inspect", help="run the yes/no questions and score against labels")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--labels", required=True, help="majority-labels file (export/labels)")
    sp.add_argument("--captions", default=None, help="pipeline records or {'id','caption'} JSONL")
    sp.add_argument("--questions", default=None, help="comma-separated question kinds")
    sp.add_argument("--slices", default=None, help="comma-set of {action,consistency}")
    sp.add_argument("--pipeline-records", default=None)
    _add_common(sp)
    sp.set_defaults(fn=cmd_inspect)

    sp = sub.add_parser("augment", help="fourfold training-data augmentation")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--pipeline-records", required=True)
    sp.add_argument("--detections-source", default=None, help="scene objects for Remove negatives")
    _add_common(sp)
    sp.set_defaults(fn=cmd_augment)

    sp = sub.add_parser("serve", help="run the annotation HTTP service")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--store", required=True, help="append-only annotation file")
    sp.add_argument("--captions", default=None)
    sp.add_argument("--ui", default=None, help="static UI bundle directory")
    sp.add_argument("--annotators", default=None, help="comma-separated allowlist")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8700)
    sp.set_defaults(fn=cmd_serve)

    sp = sub.add_parser("report", help="distribution and comparison tables")
    rsub = sp.add_subparsers(dest="report_kind", required=True)
    rd = rsub.add_parser("distribution")
    rd.add_argument("--labels", required=True)
    rd.add_argument("--out", required=True)
    rd.set_defaults(fn=cmd_report)
    rc = rsub.add_parser("comparison")
    rc.add_argument("--column", action="append", required=True,
                    help="NAME=score_report.json[,metrics_report.json]")
    rc.add_argument("--out", required=True)
    rc.set_defaults(fn=cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"editverify: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
