"""Generate the shared client/server validation fixture suite.

Each case's verdict comes from the real server-side path (payload schema,
level parsing, record invariants), so the browser UI's validation tests
assert parity against actual server behavior rather than a re-stated spec.

Usage: python scripts/build_validation_fixtures.py \
           [--out frontend/tests/fixtures/validation_cases.json]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from pydantic import ValidationError

from editverify.annotate import SubmissionError
from editverify.service import AnnotationPayload


def base_payload(**overrides) -> dict:
    payload = {
        "edit_id": "e1",
        "annotator_id": "a1",
        "accuracy_level": "Accurate",
        "contextual_feedback": "",
        "technical_ok": True,
        "technical_feedback": "",
        "artifact_level": "Mild",
        "caption_verdict": "accepted",
        "final_caption": "The floor is wood now.",
    }
    payload.update(overrides)
    return payload


CASES = [
    ("valid accurate baseline", base_payload()),
    ("valid corrected caption", base_payload(caption_verdict="corrected",
                                             final_caption="A door was also added.")),
    ("valid unexpected with feedback", base_payload(
        accuracy_level="Accurate, But Unexpected", contextual_feedback="the door changed too")),
    ("valid inaccurate with feedback", base_payload(
        accuracy_level="Inaccurate", contextual_feedback="nothing matches")),
    ("valid reflects with feedback", base_payload(
        accuracy_level="Inaccurate, Reflects Instruction", contextual_feedback="half done")),
    ("valid significant artifact", base_payload(artifact_level="Significant")),
    ("valid no artifact technical no", base_payload(artifact_level="No Artifact",
                                                    technical_ok=False)),
    ("unexpected without feedback", base_payload(
        accuracy_level="Accurate, But Unexpected", contextual_feedback="")),
    ("unexpected with blank feedback", base_payload(
        accuracy_level="Accurate, But Unexpected", contextual_feedback="   ")),
    ("inaccurate without feedback", base_payload(accuracy_level="Inaccurate")),
    ("reflects without feedback", base_payload(
        accuracy_level="Inaccurate, Reflects Instruction")),
    ("empty final caption", base_payload(final_caption="")),
    ("blank final caption", base_payload(final_caption="   ")),
    ("unknown accuracy level", base_payload(accuracy_level="Great")),
    ("unknown artifact level", base_payload(artifact_level="Huge")),
    ("unknown caption verdict", base_payload(caption_verdict="meh")),
    ("empty edit id", base_payload(edit_id="")),
    ("empty annotator id", base_payload(annotator_id="")),
]


def server_verdict(payload: dict) -> tuple[str, str | None]:
    try:
        model = AnnotationPayload(**payload)
    except ValidationError:
        return "rejected", "schema"
    try:
        record = model.to_record()
    except SubmissionError as exc:
        return "rejected", exc.code
    problems = record.violations()
    if problems:
        return "rejected", problems[0]
    return "accepted", None


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    default_out = Path(__file__).resolve().parent.parent / "frontend/tests/fixtures/validation_cases.json"
    ap.add_argument("--out", type=Path, default=default_out)
    args = ap.parse_args()

    cases = []
    for name, payload in CASES:
        verdict, code = server_verdict(payload)
        cases.append({"name": name, "payload": payload, "verdict": verdict, "code": code})
    accepted = sum(1 for c in cases if c["verdict"] == "accepted")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps({"cases": cases}, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(cases)} cases ({accepted} accepted) to {args.out}")


if __name__ == "__main__":
    main()
