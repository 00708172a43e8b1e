"""Shared domain types plus edit-set manifest loading and validation.

An edit set is a line-delimited manifest; each line is a JSON record
``{"id", "source", "edited", "mask", "instruction", "editor"}`` with image
paths relative to the manifest's directory. Masks are single-channel PNGs
binarized at >127.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image

MASK_THRESHOLD = 127

MANIFEST_FIELDS = ("id", "source", "edited", "mask", "instruction", "editor")


class ManifestError(Exception):
    """Manifest cannot be loaded (missing file, malformed line, bad refs)."""


class ActionType(enum.Enum):
    ADD = "Add"
    REMOVE = "Remove"
    REPLACE = "Replace"
    CHANGE_ATTRIBUTE = "ChangeAttribute"


# Normalization of free-text action names. Unknown forms raise: a silently
# guessed action would corrupt every metric downstream.
_ACTION_ALIASES = {
    "add": ActionType.ADD,
    "remove": ActionType.REMOVE,
    "delete": ActionType.REMOVE,
    "replace": ActionType.REPLACE,
    "swap": ActionType.REPLACE,
    "change": ActionType.CHANGE_ATTRIBUTE,
    "changeattribute": ActionType.CHANGE_ATTRIBUTE,
    "modify": ActionType.CHANGE_ATTRIBUTE,
    "alter": ActionType.CHANGE_ATTRIBUTE,
}


def parse_action(text: str) -> ActionType:
    """Map a surface action name onto an :class:`ActionType`.

    Case, whitespace, hyphens and underscores are ignored
    (``"Change Attribute"`` and ``"change_attribute"`` both parse).
    Raises ``ValueError`` for unknown forms; parsing is total, never a
    silent default.
    """
    key = "".join(ch for ch in text.lower() if ch.isalpha())
    if key in _ACTION_ALIASES:
        return _ACTION_ALIASES[key]
    raise ValueError(f"unknown action type: {text!r}")


class AccuracyLevel(enum.Enum):
    ACCURATE = "Accurate"
    ACCURATE_BUT_UNEXPECTED = "Accurate, But Unexpected"
    INACCURATE_REFLECTS = "Inaccurate, Reflects Instruction"
    INACCURATE = "Inaccurate"


class ArtifactLevel(enum.Enum):
    SIGNIFICANT = "Significant"
    MILD = "Mild"
    NO_ARTIFACT = "No Artifact"


@dataclass(frozen=True)
class DifferenceTriplet:
    """One change between the original and edited image.

    ``source_object`` is the object before the edit, ``target_object`` the
    object after. Add edits have no source; Remove edits have no target;
    Replace and ChangeAttribute require both.
    """

    source_object: str | None
    target_object: str | None
    action: ActionType

    def __post_init__(self):
        if self.action is ActionType.ADD and self.source_object is not None:
            raise ValueError("Add triplet must not carry a source object")
        if self.action is ActionType.REMOVE and self.target_object is not None:
            raise ValueError("Remove triplet must not carry a target object")
        if self.action in (ActionType.REPLACE, ActionType.CHANGE_ATTRIBUTE):
            if not self.source_object or not self.target_object:
                raise ValueError(
                    f"{self.action.value} triplet requires both source and target objects"
                )

    def reversed(self) -> "DifferenceTriplet":
        """Triplet with source and target swapped (action unchanged)."""
        return DifferenceTriplet(self.target_object, self.source_object, self.action)


@dataclass(frozen=True)
class EditRecord:
    """One edit instance. Image refs are paths relative to the manifest dir."""

    id: str
    source_image: Path
    edited_image: Path
    edit_mask: Path
    instruction: str
    editor_tag: str

    def resolve(self, base_dir: Path, ref: Path) -> Path:
        return (base_dir / ref).resolve()


@dataclass(frozen=True)
class EditSet:
    records: tuple[EditRecord, ...]
    manifest_path: Path
    checksum: str
    base_dir: Path

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def source_path(self, rec: EditRecord) -> Path:
        return rec.resolve(self.base_dir, rec.source_image)

    def edited_path(self, rec: EditRecord) -> Path:
        return rec.resolve(self.base_dir, rec.edited_image)

    def mask_path(self, rec: EditRecord) -> Path:
        return rec.resolve(self.base_dir, rec.edit_mask)

    def by_id(self, edit_id: str) -> EditRecord:
        for rec in self.records:
            if rec.id == edit_id:
                return rec
        raise KeyError(edit_id)


@dataclass
class ValidationReport:
    """Every violated invariant of an EditRecord; empty report means valid."""

    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [code for code, _ in self.violations]

    def add(self, code: str, message: str) -> None:
        self.violations.append((code, message))


def _parse_record(obj: dict, line_no: int) -> EditRecord:
    missing = [k for k in MANIFEST_FIELDS if k not in obj]
    if missing:
        raise ManifestError(f"line {line_no}: missing fields {missing}")
    return EditRecord(
        id=str(obj["id"]),
        source_image=Path(obj["source"]),
        edited_image=Path(obj["edited"]),
        edit_mask=Path(obj["mask"]),
        instruction=str(obj["instruction"]),
        editor_tag=str(obj["editor"]),
    )


def load_manifest(path: str | Path) -> EditSet:
    """Load and validate a line-delimited edit manifest.

    Order-preserving. Raises :class:`ManifestError` naming the offending
    line for malformed JSON, missing fields, unresolvable image/mask refs,
    and duplicate ids (both lines named).
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    data = path.read_bytes()
    checksum = hashlib.sha256(data).hexdigest()
    base_dir = path.resolve().parent

    records: list[EditRecord] = []
    seen: dict[str, int] = {}
    for line_no, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"line {line_no}: malformed record: {exc}") from exc
        rec = _parse_record(obj, line_no)
        if rec.id in seen:
            raise ManifestError(
                f"duplicate id {rec.id!r} on lines {seen[rec.id]} and {line_no}"
            )
        seen[rec.id] = line_no
        for label, ref in (
            ("source", rec.source_image),
            ("edited", rec.edited_image),
            ("mask", rec.edit_mask),
        ):
            if not (base_dir / ref).is_file():
                raise ManifestError(
                    f"line {line_no}: unresolvable {label} ref: {ref}"
                )
        records.append(rec)
    return EditSet(
        records=tuple(records),
        manifest_path=path,
        checksum=checksum,
        base_dir=base_dir,
    )


def write_manifest(edit_set: EditSet, path: str | Path) -> None:
    """Write records back out, one JSON object per line.

    ``load_manifest(write_manifest(es))`` preserves record content when the
    target shares the edit set's base directory.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in edit_set.records:
            fh.write(
                json.dumps(
                    {
                        "id": rec.id,
                        "source": rec.source_image.as_posix(),
                        "edited": rec.edited_image.as_posix(),
                        "mask": rec.edit_mask.as_posix(),
                        "instruction": rec.instruction,
                        "editor": rec.editor_tag,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def _image_size(path: Path) -> tuple[int, int] | None:
    try:
        with Image.open(path) as im:
            return im.size
    except Exception:
        return None


def validate_edit(record: EditRecord, base_dir: str | Path = ".") -> ValidationReport:
    """Check every EditRecord invariant; failures are report entries, never raises."""
    base_dir = Path(base_dir)
    report = ValidationReport()
    if not record.instruction.strip():
        report.add("empty-instruction", f"edit {record.id}: instruction is empty")
    if not record.id:
        report.add("empty-id", "record has an empty id")

    paths = {
        "source": base_dir / record.source_image,
        "edited": base_dir / record.edited_image,
        "mask": base_dir / record.edit_mask,
    }
    for label, p in paths.items():
        if not p.is_file():
            report.add(f"missing-{label}", f"edit {record.id}: {label} not found at {p}")

    if paths["source"].is_file() and paths["mask"].is_file():
        src_size = _image_size(paths["source"])
        mask_size = _image_size(paths["mask"])
        if src_size is None:
            report.add("unreadable-source", f"edit {record.id}: cannot read source image")
        if mask_size is None:
            report.add("unreadable-mask", f"edit {record.id}: cannot read mask")
        if src_size and mask_size and src_size != mask_size:
            report.add(
                "mask-dimension-mismatch",
                f"edit {record.id}: mask is {mask_size}, source is {src_size}",
            )
    return report
