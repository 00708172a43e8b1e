// Client-side payload validation. Must never be weaker than the server's:
// every rejection the server can produce for a payload shape has a guard
// here (parity is pinned by tests/fixtures/validation_cases.json, generated
// from the server-side validators).

import {
  ACCURACY_LEVELS,
  ARTIFACT_LEVELS,
  CAPTION_VERDICTS,
  AnnotationPayload,
} from "./types.js";

export interface Violation {
  code: string;
  message: string;
}

export function validatePayload(payload: AnnotationPayload): Violation[] {
  const problems: Violation[] = [];
  if (!payload.edit_id) {
    problems.push({ code: "empty-edit-id", message: "No edit is loaded." });
  }
  if (!payload.annotator_id) {
    problems.push({ code: "empty-annotator-id", message: "Annotator id is missing." });
  }
  if (!(ACCURACY_LEVELS as readonly string[]).includes(payload.accuracy_level)) {
    problems.push({ code: "invalid-level", message: "Pick an accuracy level." });
  } else if (
    payload.accuracy_level !== "Accurate" &&
    payload.contextual_feedback.trim() === ""
  ) {
    problems.push({
      code: "missing-contextual-feedback",
      message: "Explain how the edit misses expectations (required for this accuracy level).",
    });
  }
  if (!(ARTIFACT_LEVELS as readonly string[]).includes(payload.artifact_level)) {
    problems.push({ code: "invalid-level", message: "Pick an artifact level." });
  }
  if (!(CAPTION_VERDICTS as readonly string[]).includes(payload.caption_verdict)) {
    problems.push({ code: "schema", message: "Accept or correct the caption." });
  }
  if (typeof payload.technical_ok !== "boolean") {
    problems.push({ code: "schema", message: "Answer the technical precision question." });
  }
  if (payload.final_caption.trim() === "") {
    problems.push({ code: "empty-final-caption", message: "The final caption cannot be empty." });
  }
  return problems;
}
