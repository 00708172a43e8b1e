// Wire types mirroring the annotation service's JSON payloads.

export const ACCURACY_LEVELS = [
  "Accurate",
  "Accurate, But Unexpected",
  "Inaccurate, Reflects Instruction",
  "Inaccurate",
] as const;

export const ARTIFACT_LEVELS = ["Significant", "Mild", "No Artifact"] as const;

export const CAPTION_VERDICTS = ["accepted", "corrected"] as const;

export type AccuracyLevel = (typeof ACCURACY_LEVELS)[number];
export type ArtifactLevel = (typeof ARTIFACT_LEVELS)[number];
export type CaptionVerdict = (typeof CAPTION_VERDICTS)[number];

export interface Task {
  edit_id: string;
  instruction: string;
  editor: string;
  source_url: string;
  edited_url: string;
  mask_url: string;
  prefilled_caption: string;
  accuracy_options: string[];
  artifact_options: string[];
}

export interface AnnotationPayload {
  edit_id: string;
  annotator_id: string;
  accuracy_level: string;
  contextual_feedback: string;
  technical_ok: boolean;
  technical_feedback: string;
  artifact_level: string;
  caption_verdict: string;
  final_caption: string;
}

export interface SubmitAck {
  accepted: boolean;
  submissions: number;
}
