"""Verification-question harness: ask, binarize labels, score, feedback.

Runs the five yes/no questions and the two caption-generation tasks against
a provider (source image first, then edited, at native resolution), then
scores predictions against binarized human majorities with balanced
accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .annotate import MajorityLabels
from .core import AccuracyLevel, ArtifactLevel, EditRecord
from .feedback import FEEDBACK_CATEGORIES, FeedbackCategory, categorize_feedback  # noqa: F401
from .geometry import load_image
from .providers import Provider, load_prompt, parse_yes_no, prompt_digest
from .triplets import extract_main_difference

QUESTION_KINDS = (
    "Accuracy",
    "ContextualConsistency",
    "TechnicalPrecision",
    "Artifacts",
    "DiffCaptionAccuracy",
)

_TEMPLATE_FILES = {
    "Accuracy": "question_accuracy.txt",
    "ContextualConsistency": "question_contextual_consistency.txt",
    "TechnicalPrecision": "question_technical_precision.txt",
    "Artifacts": "question_artifacts.txt",
    "DiffCaptionAccuracy": "question_diff_caption.txt",
}


class NoMajorityError(Exception):
    pass


@dataclass(frozen=True)
class InspectorQuestion:
    kind: str
    prompt_template: str

    def __post_init__(self):
        if self.kind not in QUESTION_KINDS:
            raise ValueError(f"unknown question kind: {self.kind}")
        if "Answer only Yes/No" not in self.prompt_template:
            raise ValueError("question template must demand a Yes/No answer")

    def fill(self, instruction: str, caption: str | None = None) -> str:
        slots = self.prompt_template.count("{}")
        if self.kind == "DiffCaptionAccuracy":
            if caption is None:
                raise ValueError("DiffCaptionAccuracy needs the candidate caption")
            return self.prompt_template.format(instruction, caption)
        return self.prompt_template.format(*([instruction] * slots))


def load_questions() -> dict[str, InspectorQuestion]:
    return {
        kind: InspectorQuestion(kind, load_prompt(name))
        for kind, name in _TEMPLATE_FILES.items()
    }


def question_digests() -> dict[str, str]:
    """Template hashes, recorded in run metadata so changed prompts change the run id."""
    return {kind: prompt_digest(name) for kind, name in _TEMPLATE_FILES.items()}


def _edit_images(edit: EditRecord, base_dir: str | Path):
    base_dir = Path(base_dir)
    return [load_image(base_dir / edit.source_image), load_image(base_dir / edit.edited_image)]


def ask_question(
    edit: EditRecord,
    question: InspectorQuestion,
    provider: Provider,
    base_dir: str | Path = ".",
    caption: str | None = None,
) -> bool:
    """Ask one yes/no question with both images attached; strict parse."""
    prompt = question.fill(edit.instruction, caption)
    reply = provider.complete(prompt, images=_edit_images(edit, base_dir))
    return parse_yes_no(reply)


def generate_all_differences_caption(
    edit: EditRecord, provider: Provider, base_dir: str | Path = "."
) -> str:
    return provider.complete(
        load_prompt("task_all_differences.txt"), images=_edit_images(edit, base_dir)
    )


def generate_main_difference_caption(
    edit: EditRecord, provider: Provider, base_dir: str | Path = "."
) -> str:
    return provider.complete(
        load_prompt("task_main_difference.txt"), images=_edit_images(edit, base_dir)
    )


@dataclass(frozen=True)
class BinaryLabels:
    """Binarized human majorities; None marks a question with no majority."""

    edit_id: str
    accurate: bool | None
    significant_artifact: bool | None
    technical_ok: bool | None
    visually_consistent: bool | None
    caption_accurate: bool | None


def accuracy_to_binary(level: AccuracyLevel) -> bool:
    """Accurate and Accurate-But-Unexpected both count as accurate."""
    return level in (AccuracyLevel.ACCURATE, AccuracyLevel.ACCURATE_BUT_UNEXPECTED)


def artifact_to_binary(level: ArtifactLevel) -> bool:
    """Only Significant counts as an artifact; Mild and No Artifact do not."""
    return level is ArtifactLevel.SIGNIFICANT


def binarize(majority: MajorityLabels) -> BinaryLabels:
    """Map per-question majorities onto the binary question set.

    Visual consistency is derived: the template demands contextual-
    consistency feedback exactly when the level is not plain Accurate, so
    a majority of Accurate means no consistency complaint.
    """
    acc = majority.majorities.get("accuracy_level")
    art = majority.majorities.get("artifact_level")
    tech = majority.majorities.get("technical_ok")
    cap = majority.majorities.get("caption_verdict")
    return BinaryLabels(
        edit_id=majority.edit_id,
        accurate=None if acc is None else accuracy_to_binary(AccuracyLevel(acc)),
        significant_artifact=None if art is None else artifact_to_binary(ArtifactLevel(art)),
        technical_ok=None if tech is None else bool(tech),
        visually_consistent=None if acc is None else AccuracyLevel(acc) is AccuracyLevel.ACCURATE,
        caption_accurate=None if cap is None else cap == "accepted",
    )


# Which BinaryLabels field answers each question.
LABEL_FIELD = {
    "Accuracy": "accurate",
    "ContextualConsistency": "visually_consistent",
    "TechnicalPrecision": "technical_ok",
    "Artifacts": "significant_artifact",
    "DiffCaptionAccuracy": "caption_accurate",
}


@dataclass(frozen=True)
class QuestionScore:
    balanced_accuracy: float
    accuracy: float
    recall_yes: float | None
    recall_no: float | None
    support_yes: int
    support_no: int

    @property
    def support(self) -> int:
        return self.support_yes + self.support_no

    def to_dict(self) -> dict:
        return {
            "balanced_accuracy": self.balanced_accuracy,
            "accuracy": self.accuracy,
            "recall_yes": self.recall_yes,
            "recall_no": self.recall_no,
            "support_yes": self.support_yes,
            "support_no": self.support_no,
        }


@dataclass(frozen=True)
class ScoreReport:
    per_question: dict[str, QuestionScore]
    slices: dict[str, dict[str, QuestionScore]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_question": {k: v.to_dict() for k, v in self.per_question.items()},
            "slices": {
                s: {k: v.to_dict() for k, v in qs.items()} for s, qs in self.slices.items()
            },
        }


def _score_pairs(pairs: list[tuple[bool, bool]]) -> QuestionScore | None:
    if not pairs:
        return None
    yes = [(p, l) for p, l in pairs if l]
    no = [(p, l) for p, l in pairs if not l]
    recall_yes = sum(1 for p, _ in yes if p) / len(yes) if yes else None
    recall_no = sum(1 for p, _ in no if not p) / len(no) if no else None
    recalls = [r for r in (recall_yes, recall_no) if r is not None]
    return QuestionScore(
        balanced_accuracy=100.0 * sum(recalls) / len(recalls),
        accuracy=100.0 * sum(1 for p, l in pairs if p == l) / len(pairs),
        recall_yes=None if recall_yes is None else 100.0 * recall_yes,
        recall_no=None if recall_no is None else 100.0 * recall_no,
        support_yes=len(yes),
        support_no=len(no),
    )


def score(
    preds: dict[str, dict[str, bool]],
    labels: dict[str, BinaryLabels],
    slice_keys: dict[str, dict[str, str]] | None = None,
) -> ScoreReport:
    """Balanced accuracy per question over edits holding both a prediction
    and a label majority; optional slices (e.g. by edit type).

    Balanced accuracy is the mean of per-class recalls; edits without a
    majority on a question are excluded from that question only.
    """
    missing = sorted(set(preds) - set(labels))
    if missing:
        raise KeyError(f"predictions without labels: {missing}")

    def collect(edit_ids) -> dict[str, QuestionScore]:
        out = {}
        for kind in QUESTION_KINDS:
            pairs = []
            for edit_id in edit_ids:
                if kind not in preds.get(edit_id, {}):
                    continue
                label = getattr(labels[edit_id], LABEL_FIELD[kind])
                if label is None:
                    continue
                pairs.append((preds[edit_id][kind], label))
            qs = _score_pairs(pairs)
            if qs is not None:
                out[kind] = qs
        return out

    report = ScoreReport(per_question=collect(sorted(preds)))
    if slice_keys:
        groups: dict[str, list[str]] = {}
        for edit_id, keys in slice_keys.items():
            if edit_id not in preds:
                continue
            for name, value in keys.items():
                groups.setdefault(f"{name}={value}", []).append(edit_id)
        slices = {
            group: collect(sorted(ids)) for group, ids in sorted(groups.items())
        }
        report = ScoreReport(per_question=report.per_question, slices=slices)
    return report


def eval_main_difference(pred_caption: str, human_caption: str, judge) -> bool:
    """Does the model's main difference match the human one?

    Both captions are reduced to their first change sentence before the
    judge compares them.
    """
    if not pred_caption.strip() or not human_caption.strip():
        raise ValueError("captions must be non-empty")
    a = extract_main_difference(pred_caption)
    b = extract_main_difference(human_caption)
    return judge.main_difference_match(a, b).match


def compare_feedback(model_text: str, human_text: str, judge) -> bool:
    """Do two pieces of feedback share any common points?"""
    return judge.feedback_overlap(model_text, human_text).match
