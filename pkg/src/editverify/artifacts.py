"""Artifact detection over segmentation detection exports.

Two methods: a confidence-drop check on objects partially intersecting the
edit mask, and a presence check for secondary objects that appear or vanish
inside the mask without touching the main edit region. Both consume
serialized detection exports; no segmentation model runs in-process.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ActionType
from .geometry import (
    BoundingBox,
    bbox_intersects,
    intersection_ratio,
    mask_size,
    resample_mask,
    rle_decode,
    scale_box,
)
from .lexicon import NounLexicon, lexical_similar


class ExportError(ValueError):
    """Detection export is malformed."""


# Guards the strictly-greater drop comparison against float noise, so a drop
# of exactly the threshold never fires.
_DROP_EPS = 1e-9


@dataclass(frozen=True)
class DetectedObject:
    class_label: str
    confidence: float
    bbox: BoundingBox
    mask: np.ndarray

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ExportError(f"confidence out of range: {self.confidence}")


@dataclass(frozen=True)
class DetectionExport:
    image_id: str
    resolution: tuple[int, int]  # (width, height)
    objects: tuple[DetectedObject, ...]


@dataclass(frozen=True)
class ArtifactConfig:
    """Thresholds for both methods; all ratios are fractions of object area.

    ``score_drop_threshold`` is absolute probability points. Candidates for
    the score-drop method are objects whose edit-mask intersection falls in
    ``(min_intersection, partial_band_max)``; ratios above
    ``max_intersection`` mark intended edit targets.
    """

    score_drop_threshold: float = 0.04
    min_intersection: float = 0.024
    max_intersection: float = 0.97
    partial_band_max: float = 0.40

    def __post_init__(self):
        if not (0.0 < self.min_intersection < self.partial_band_max < self.max_intersection < 1.0):
            raise ValueError(
                "thresholds must satisfy 0 < min_intersection < partial_band_max "
                "< max_intersection < 1"
            )


@dataclass(frozen=True)
class ArtifactFinding:
    method: str  # "score_drop" | "secondary_object"
    class_label: str
    src_score: float | None = None
    tgt_score: float | None = None
    presence_change: str | None = None  # "removed" | "added"
    resolutions_confirmed: int = 1

    def __post_init__(self):
        if self.method == "score_drop" and (self.src_score is None or self.tgt_score is None):
            raise ValueError("score_drop findings carry both scores")
        if self.method == "secondary_object" and self.presence_change not in ("removed", "added"):
            raise ValueError("secondary_object findings carry the presence direction")


def load_detection_export(obj: dict) -> DetectionExport:
    """Parse the export schema: resolution [w, h]; objects with RLE masks.

    Validates the invariants: confidences in [0, 1] and each bbox bounding
    its mask's foreground.
    """
    try:
        image_id = str(obj["image_id"])
        w, h = (int(v) for v in obj["resolution"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ExportError(f"malformed export header: {exc}") from exc
    if w <= 0 or h <= 0:
        raise ExportError(f"export {image_id}: resolution must be positive")
    objects = []
    for i, entry in enumerate(obj.get("objects", [])):
        try:
            label = str(entry["label"])
            score = float(entry["score"])
            bx, by, bw, bh = (int(v) for v in entry["bbox"])
            mask = rle_decode(list(entry["mask_rle"]), (w, h))
        except (KeyError, TypeError, ValueError) as exc:
            raise ExportError(f"export {image_id}: object {i}: {exc}") from exc
        box = BoundingBox(bx, by, bw, bh)
        ys, xs = np.nonzero(mask)
        if len(ys) and not (
            box.x <= xs.min() and xs.max() < box.x2 and box.y <= ys.min() and ys.max() < box.y2
        ):
            raise ExportError(f"export {image_id}: object {i}: bbox does not bound mask")
        objects.append(DetectedObject(label, score, box, mask))
    return DetectionExport(image_id=image_id, resolution=(w, h), objects=tuple(objects))


@dataclass
class _Candidate:
    index: int
    obj: DetectedObject
    mask_at_res: np.ndarray
    box_at_res: BoundingBox

    @property
    def key(self) -> tuple:
        # Canonical identity independent of list position, so pairing and
        # the cross-resolution AND are invariant under export reordering.
        b = self.obj.bbox
        return (self.obj.class_label, -self.obj.confidence, b.x, b.y, b.w, b.h)


def _candidates_at(
    export: DetectionExport,
    edit_mask_at_res: np.ndarray,
    res: tuple[int, int],
    cfg: ArtifactConfig,
) -> list[_Candidate]:
    out = []
    for i, obj in enumerate(export.objects):
        mask = obj.mask if export.resolution == res else resample_mask(obj.mask, res)
        ratio = intersection_ratio(mask, edit_mask_at_res)
        if cfg.min_intersection < ratio < cfg.partial_band_max:
            box = (
                obj.bbox
                if export.resolution == res
                else scale_box(obj.bbox, export.resolution, res)
            )
            out.append(_Candidate(i, obj, mask, box))
    return out


def _drops_at_resolution(
    src: DetectionExport,
    tgt: DetectionExport,
    edit_mask: np.ndarray,
    res: tuple[int, int],
    cfg: ArtifactConfig,
) -> dict[tuple, tuple[str, float, float]]:
    """src-candidate key -> (label, src score, paired tgt score) for qualifying drops."""
    em = edit_mask if mask_size(edit_mask) == res else resample_mask(edit_mask, res)
    src_cands = _candidates_at(src, em, res, cfg)
    tgt_cands = _candidates_at(tgt, em, res, cfg)

    drops: dict[tuple, tuple[str, float, float]] = {}
    labels = sorted({c.obj.class_label for c in src_cands})
    for label in labels:
        s_list = [c for c in src_cands if c.obj.class_label == label]
        t_list = [c for c in tgt_cands if c.obj.class_label == label]
        # Bounding-box pre-filter, then pair instances by maximal mask
        # overlap, greedily from the largest overlap down; ties break on
        # canonical keys so export order never matters.
        overlaps = []
        for s in s_list:
            for t in t_list:
                if not bbox_intersects(s.box_at_res, t.box_at_res):
                    continue
                ov = int((s.mask_at_res & t.mask_at_res).sum())
                if ov > 0:
                    overlaps.append((ov, s, t))
        overlaps.sort(key=lambda e: (-e[0], e[1].key, e[2].key))
        used_s: set[tuple] = set()
        used_t: set[tuple] = set()
        pairs: list[tuple[_Candidate, _Candidate]] = []
        for ov, s, t in overlaps:
            if s.key in used_s or t.key in used_t:
                continue
            used_s.add(s.key)
            used_t.add(t.key)
            pairs.append((s, t))
        for s, t in pairs:
            if s.obj.confidence - t.obj.confidence > cfg.score_drop_threshold + _DROP_EPS:
                drops[s.key] = (label, s.obj.confidence, t.obj.confidence)
        for s in s_list:
            # No target counterpart: the object effectively vanished; treat
            # as a drop to zero confidence.
            if s.key not in used_s and s.obj.confidence > cfg.score_drop_threshold + _DROP_EPS:
                drops[s.key] = (label, s.obj.confidence, 0.0)
    return drops


def detect_score_drop(
    src: DetectionExport,
    tgt: DetectionExport,
    edit_mask: np.ndarray,
    cfg: ArtifactConfig = ArtifactConfig(),
) -> list[ArtifactFinding]:
    """Confidence-drop artifacts among objects partially inside the edit mask.

    Evaluated independently at the source and edited export resolutions;
    a finding must hold at both (resampling makes intersection scores
    fluctuate, and requiring both suppresses that noise).
    """
    resolutions = [src.resolution]
    if tgt.resolution != src.resolution:
        resolutions.append(tgt.resolution)
    per_res = [_drops_at_resolution(src, tgt, edit_mask, res, cfg) for res in resolutions]
    confirmed = set(per_res[0])
    for drops in per_res[1:]:
        confirmed &= set(drops)
    findings = []
    for key in sorted(confirmed):
        label, s_score, t_score = per_res[0][key]
        findings.append(
            ArtifactFinding(
                method="score_drop",
                class_label=label,
                src_score=s_score,
                tgt_score=t_score,
                resolutions_confirmed=len(resolutions),
            )
        )
    return findings


def detect_secondary_changes(
    src: DetectionExport,
    tgt: DetectionExport,
    edit_mask: np.ndarray,
    main_boxes: list[BoundingBox],
    main_object: str,
    action: ActionType,
    lex: NounLexicon,
) -> list[ArtifactFinding]:
    """Whole-object appearances/disappearances inside the mask area.

    Applies only to Add and Remove edits. Secondary objects are detections
    not lexically similar to the main edit object, intersecting the edit
    mask, and clear of every main-object box (given at edit-mask
    resolution). A Remove edit flags secondary objects present in the source
    but gone from the edit; an Add edit flags new ones.
    """
    if action not in (ActionType.ADD, ActionType.REMOVE):
        raise ValueError(f"secondary-change detection applies to Add/Remove, got {action}")
    if action is ActionType.REMOVE:
        base, other, change = src, tgt, "removed"
    else:
        base, other, change = tgt, src, "added"

    mask_res = mask_size(edit_mask)
    em = edit_mask if base.resolution == mask_res else resample_mask(edit_mask, base.resolution)
    findings = []
    for obj in base.objects:
        if lexical_similar(obj.class_label, main_object, lex):
            continue
        if intersection_ratio(obj.mask, em) <= 0.0:
            continue
        scaled_main = [scale_box(b, mask_res, base.resolution) for b in main_boxes]
        if any(bbox_intersects(obj.bbox, mb) for mb in scaled_main):
            continue
        box_other = (
            obj.bbox
            if other.resolution == base.resolution
            else scale_box(obj.bbox, base.resolution, other.resolution)
        )
        still_there = any(
            lexical_similar(oo.class_label, obj.class_label, lex)
            and bbox_intersects(box_other, oo.bbox)
            for oo in other.objects
        )
        if not still_there:
            findings.append(
                ArtifactFinding(
                    method="secondary_object",
                    class_label=obj.class_label,
                    presence_change=change,
                )
            )
    return findings


def artifact_verdict(findings: list[ArtifactFinding]) -> bool:
    """True iff any finding exists; compared against the binarized
    significant-artifact human label."""
    return bool(findings)
