"""Human-annotation collection: persistence, task dispatch, aggregation.

Annotations are appended to a single line-delimited file with an exclusive
writer lock; acknowledgement happens only after the line is flushed and
fsynced, so an acknowledged submission survives a process restart. Each edit
collects up to three annotations; a majority needs two identical answers.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from filelock import FileLock

from .core import AccuracyLevel, ArtifactLevel

MAX_ANNOTATIONS = 3
MAJORITY_MIN = 2

# Question keys of the evaluation template that aggregate to majorities.
QUESTIONS = ("accuracy_level", "technical_ok", "artifact_level", "caption_verdict")

CAPTION_VERDICTS = ("accepted", "corrected")


class SubmissionError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class UnknownAnnotatorError(Exception):
    pass


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's answers to the full template for one edit."""

    edit_id: str
    annotator_id: str
    accuracy_level: AccuracyLevel
    contextual_feedback: str
    technical_ok: bool
    technical_feedback: str
    artifact_level: ArtifactLevel
    caption_verdict: str
    final_caption: str
    submitted_at: float

    def violations(self) -> list[str]:
        problems = []
        if not self.edit_id:
            problems.append("empty-edit-id")
        if not self.annotator_id:
            problems.append("empty-annotator-id")
        # Any level other than Accurate requires an explanation.
        if self.accuracy_level is not AccuracyLevel.ACCURATE and not self.contextual_feedback.strip():
            problems.append("missing-contextual-feedback")
        if self.caption_verdict not in CAPTION_VERDICTS:
            problems.append("invalid-caption-verdict")
        if not self.final_caption.strip():
            problems.append("empty-final-caption")
        return problems

    def answer(self, question: str):
        value = getattr(self, question)
        if isinstance(value, (AccuracyLevel, ArtifactLevel)):
            return value.value
        return value

    def to_json(self) -> str:
        return json.dumps(
            {
                "edit_id": self.edit_id,
                "annotator_id": self.annotator_id,
                "accuracy_level": self.accuracy_level.value,
                "contextual_feedback": self.contextual_feedback,
                "technical_ok": self.technical_ok,
                "technical_feedback": self.technical_feedback,
                "artifact_level": self.artifact_level.value,
                "caption_verdict": self.caption_verdict,
                "final_caption": self.final_caption,
                "submitted_at": self.submitted_at,
            },
            ensure_ascii=False,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "AnnotationRecord":
        obj = json.loads(text)
        return cls(
            edit_id=obj["edit_id"],
            annotator_id=obj["annotator_id"],
            accuracy_level=AccuracyLevel(obj["accuracy_level"]),
            contextual_feedback=obj["contextual_feedback"],
            technical_ok=bool(obj["technical_ok"]),
            technical_feedback=obj["technical_feedback"],
            artifact_level=ArtifactLevel(obj["artifact_level"]),
            caption_verdict=obj["caption_verdict"],
            final_caption=obj["final_caption"],
            submitted_at=obj["submitted_at"],
        )


@dataclass(frozen=True)
class MajorityLabels:
    """Per-question majority values for one edit (None marks no majority)."""

    edit_id: str
    annotator_count: int
    majorities: dict
    complete_agreement: dict

    def to_dict(self) -> dict:
        return {
            "edit_id": self.edit_id,
            "annotator_count": self.annotator_count,
            "majorities": self.majorities,
            "complete_agreement": self.complete_agreement,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "MajorityLabels":
        return cls(
            edit_id=obj["edit_id"],
            annotator_count=obj["annotator_count"],
            majorities=obj["majorities"],
            complete_agreement=obj["complete_agreement"],
        )


@dataclass(frozen=True)
class QuestionAgreement:
    average_agreement: float | None
    complete_rate: float
    majority_rate: float
    kappa: float | None
    items: int


@dataclass(frozen=True)
class AgreementReport:
    per_question: dict[str, QuestionAgreement]


class AnnotationStore:
    """Append-only annotation persistence with an exclusive writer lock.

    ``annotators=None`` leaves registration open (ids are accepted as they
    appear); passing a collection closes the set and unknown ids error.
    """

    def __init__(self, path: str | Path, annotators=None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.path) + ".lock")
        self._lock.acquire(timeout=10)
        self._mutex = threading.Lock()
        self._records: list[AnnotationRecord] = []
        self._by_edit: dict[str, list[AnnotationRecord]] = {}
        self._annotators = set(annotators) if annotators is not None else None
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._index(AnnotationRecord.from_json(line))
        self._fh = open(self.path, "a", encoding="utf-8")

    def _index(self, rec: AnnotationRecord) -> None:
        self._records.append(rec)
        self._by_edit.setdefault(rec.edit_id, []).append(rec)

    def close(self) -> None:
        self._fh.close()
        self._lock.release()

    @property
    def records(self) -> tuple[AnnotationRecord, ...]:
        return tuple(self._records)

    def edit_ids(self) -> list[str]:
        return sorted(self._by_edit)

    def submissions_for(self, edit_id: str) -> list[AnnotationRecord]:
        return list(self._by_edit.get(edit_id, []))

    def check_annotator(self, annotator_id: str) -> None:
        if not annotator_id:
            raise UnknownAnnotatorError("empty annotator id")
        if self._annotators is not None and annotator_id not in self._annotators:
            raise UnknownAnnotatorError(f"unknown annotator: {annotator_id}")

    def submit(self, record: AnnotationRecord) -> int:
        """Validate, durably append, and return the edit's submission count.

        The write is flushed and fsynced before this returns: an
        acknowledged record is never lost to a crash.
        """
        self.check_annotator(record.annotator_id)
        problems = record.violations()
        if problems:
            raise SubmissionError(problems[0], f"invalid annotation: {problems}")
        with self._mutex:
            existing = self._by_edit.get(record.edit_id, [])
            if len(existing) >= MAX_ANNOTATIONS:
                raise SubmissionError(
                    "edit-full", f"edit {record.edit_id} already has {MAX_ANNOTATIONS} annotations"
                )
            if any(r.annotator_id == record.annotator_id for r in existing):
                raise SubmissionError(
                    "duplicate",
                    f"annotator {record.annotator_id} already labeled edit {record.edit_id}",
                )
            self._fh.write(record.to_json() + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._index(record)
            return len(self._by_edit[record.edit_id])


def next_task(edit_ids, store: AnnotationStore, annotator_id: str) -> str | None:
    """Next edit for this annotator: fewest submissions first, then edit id.

    Never re-offers an edit the annotator already labeled or one that has
    reached three submissions; None when exhausted.
    """
    store.check_annotator(annotator_id)
    candidates = []
    for edit_id in edit_ids:
        subs = store.submissions_for(edit_id)
        if len(subs) >= MAX_ANNOTATIONS:
            continue
        if any(r.annotator_id == annotator_id for r in subs):
            continue
        candidates.append((len(subs), edit_id))
    if not candidates:
        return None
    candidates.sort()
    return candidates[0][1]


def aggregate(store: AnnotationStore, edit_id: str) -> MajorityLabels:
    """Per-question majority over this edit's submissions (deterministic)."""
    subs = store.submissions_for(edit_id)
    if not subs:
        raise KeyError(f"no submissions for edit {edit_id}")
    majorities = {}
    complete = {}
    for question in QUESTIONS:
        answers = [r.answer(question) for r in subs]
        counts: dict = {}
        for a in answers:
            counts[a] = counts.get(a, 0) + 1
        top_value, top_count = max(counts.items(), key=lambda kv: kv[1])
        majorities[question] = top_value if top_count >= MAJORITY_MIN else None
        complete[question] = len(answers) >= 2 and len(counts) == 1
    return MajorityLabels(
        edit_id=edit_id,
        annotator_count=len(subs),
        majorities=majorities,
        complete_agreement=complete,
    )


def fleiss_kappa(table) -> float:
    """Fleiss' kappa over an items-by-categories count table.

    Every item must have the same number of ratings. Returns exactly 1.0
    for perfect agreement (including the degenerate single-category case).
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] < 1:
        raise ValueError("table must be items x categories")
    n_ratings = table.sum(axis=1)
    if not np.all(n_ratings == n_ratings[0]):
        raise ValueError("all items must have the same number of ratings")
    n = float(n_ratings[0])
    if n < 2:
        raise ValueError("kappa needs at least two ratings per item")
    big_n = table.shape[0]
    p_i = (np.square(table).sum(axis=1) - n) / (n * (n - 1))
    p_bar = float(p_i.mean())
    p_j = table.sum(axis=0) / (big_n * n)
    p_e = float(np.square(p_j).sum())
    if abs(1.0 - p_e) < 1e-12:
        return 1.0 if abs(p_bar - 1.0) < 1e-12 else 0.0
    return (p_bar - p_e) / (1.0 - p_e)


_CATEGORIES = {
    "accuracy_level": tuple(l.value for l in AccuracyLevel),
    "technical_ok": (True, False),
    "artifact_level": tuple(l.value for l in ArtifactLevel),
    "caption_verdict": CAPTION_VERDICTS,
}


def agreement_report(store: AnnotationStore) -> AgreementReport:
    """Agreement rates and Fleiss' kappa per question.

    Rates cover edits with at least two submissions; the kappa table uses
    edits with exactly three (the statistic needs a constant rater count).
    """
    per_question: dict[str, QuestionAgreement] = {}
    edit_ids = store.edit_ids()
    for question in QUESTIONS:
        categories = _CATEGORIES[question]
        agreements = []
        complete = 0
        with_majority = 0
        rated = 0
        kappa_rows = []
        for edit_id in edit_ids:
            subs = store.submissions_for(edit_id)
            answers = [r.answer(question) for r in subs]
            if len(answers) >= 2:
                rated += 1
                counts = {a: answers.count(a) for a in set(answers)}
                top_value, top_count = max(counts.items(), key=lambda kv: kv[1])
                if len(counts) == 1:
                    complete += 1
                if top_count >= MAJORITY_MIN:
                    with_majority += 1
                    agreements.append(top_count / len(answers))
            if len(answers) == MAX_ANNOTATIONS:
                kappa_rows.append([answers.count(c) for c in categories])
        per_question[question] = QuestionAgreement(
            average_agreement=(sum(agreements) / len(agreements)) if agreements else None,
            complete_rate=complete / rated if rated else 0.0,
            majority_rate=with_majority / rated if rated else 0.0,
            kappa=fleiss_kappa(kappa_rows) if kappa_rows else None,
            items=rated,
        )
    return AgreementReport(per_question=per_question)


def export_labels(store: AnnotationStore) -> list[MajorityLabels]:
    """MajorityLabels for every annotated edit, ordered by edit id."""
    return [aggregate(store, edit_id) for edit_id in store.edit_ids()]


LABELS_HEADER = {"kind": "majority-labels", "version": 1}


def write_labels_file(labels: list[MajorityLabels], path: str | Path) -> None:
    """Header line plus one JSON line per edit; byte-stable for a fixed store."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(LABELS_HEADER, sort_keys=True) + "\n")
        for lab in labels:
            fh.write(json.dumps(lab.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def read_labels_file(path: str | Path) -> list[MajorityLabels]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or json.loads(lines[0]).get("kind") != "majority-labels":
        raise ValueError(f"{path} is not a majority-labels file")
    return [MajorityLabels.from_dict(json.loads(ln)) for ln in lines[1:] if ln.strip()]
