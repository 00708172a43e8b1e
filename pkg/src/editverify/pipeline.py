"""Zero-shot difference-caption pipeline.

Zoom crops around the edit mask -> region descriptions from a vision model
-> noun-grounded selection of the best description per image -> one-shot
metadata generation, retrying alternative regions when the model returns an
invalid action.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .core import ActionType, EditRecord, parse_action
from .geometry import bboxes_from_mask, crop, load_image, load_mask, zoom_crops
from .lexicon import NounLexicon, extract_nouns, noun_overlap
from .providers import Provider, load_prompt

REGION_ORDER = ("tight", "padded", "full")


class PipelineError(Exception):
    pass


class ExhaustedFallbackError(PipelineError):
    """No region pair produced a valid, well-formed metadata response."""


@dataclass(frozen=True)
class RegionSet:
    """Descriptions of one image at up to three zoom levels; full is always present."""

    full: str
    tight: str | None = None
    padded: str | None = None

    def get(self, region: str) -> str | None:
        return getattr(self, region)

    def present(self) -> list[tuple[str, str]]:
        return [(r, self.get(r)) for r in REGION_ORDER if self.get(r) is not None]


@dataclass(frozen=True)
class RegionDescriptions:
    source: RegionSet
    edited: RegionSet


@dataclass(frozen=True)
class PipelineMetadata:
    action: ActionType
    short_caption: str
    extensive_caption: str
    revised_instruction: str
    source_object: str | None
    target_object: str | None
    explanation: str
    grounding_choice: dict[str, str]  # {"source": region, "edited": region}
    attempts: int = 1

    def __post_init__(self):
        if not self.short_caption.strip():
            raise ValueError("short_caption must be non-empty")


def gather_descriptions(
    edit: EditRecord, provider: Provider, base_dir: str | Path = "."
) -> RegionDescriptions:
    """Describe tight/padded/full crops when the mask has exactly one
    component; otherwise describe the full images only.

    Cropping "fails" on a zero-foreground mask, multiple components, or a
    box the image cannot contain; all of those fall back to full images.
    """
    base_dir = Path(base_dir)
    src_img = load_image(base_dir / edit.source_image)
    tgt_img = load_image(base_dir / edit.edited_image)
    mask = load_mask(base_dir / edit.edit_mask)
    describe = load_prompt("describe_region.txt")

    boxes = bboxes_from_mask(mask)
    crops = None
    if len(boxes) == 1:
        try:
            crops = (zoom_crops(src_img, boxes[0]), zoom_crops(tgt_img, boxes[0]))
        except ValueError:
            crops = None

    def regions(img, zc) -> RegionSet:
        full = provider.describe_image(crop(img, zc.full) if zc else img, describe)
        if zc is None:
            return RegionSet(full=full)
        return RegionSet(
            full=full,
            tight=provider.describe_image(crop(img, zc.tight), describe),
            padded=provider.describe_image(crop(img, zc.padded), describe),
        )

    if crops is None:
        return RegionDescriptions(source=regions(src_img, None), edited=regions(tgt_img, None))
    return RegionDescriptions(
        source=regions(src_img, crops[0]), edited=regions(tgt_img, crops[1])
    )


def _select_one(
    instruction_nouns: list[str], regions: RegionSet, lex: NounLexicon
) -> tuple[str, str]:
    present = regions.present()
    overlaps = {
        name: noun_overlap(instruction_nouns, extract_nouns(text, lex), lex)
        for name, text in present
    }
    best = max(overlaps.values())
    if best > 0:
        for name, text in present:  # REGION_ORDER doubles as the tie-break
            if overlaps[name] == best:
                return name, text
    # No region aligns with the instruction: fall back to the region whose
    # description shares object mentions with at least one other candidate.
    nouns = {name: extract_nouns(text, lex) for name, text in present}
    for name, text in present:
        others = [nouns[o] for o, _ in present if o != name]
        if any(noun_overlap(nouns[name], other, lex) > 0 for other in others):
            return name, text
    return "full", regions.full


def select_grounded(
    instruction: str, descs: RegionDescriptions, lex: NounLexicon
) -> dict[str, tuple[str, str]]:
    """Pick the best (region, description) per image by instruction-noun
    overlap (exact and synonym); ties break tight > padded > full."""
    instruction_nouns = extract_nouns(instruction, lex)
    return {
        "source": _select_one(instruction_nouns, descs.source, lex),
        "edited": _select_one(instruction_nouns, descs.edited, lex),
    }


_METADATA_LABELS = (
    "ACTION",
    "SOURCE_OBJECT",
    "TARGET_OBJECT",
    "SHORT_CAPTION",
    "EXTENSIVE_CAPTION",
    "REVISED_INSTRUCTION",
    "EXPLANATION",
)
_LABEL_RE = re.compile(rf"^({'|'.join(_METADATA_LABELS)}):\s*(.*)$")


def _parse_metadata_reply(reply: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    current = None
    for line in reply.splitlines():
        m = _LABEL_RE.match(line.strip())
        if m:
            current = m.group(1)
            fields[current] = m.group(2).strip()
        elif current and line.strip():
            fields[current] += " " + line.strip()
    missing = [l for l in _METADATA_LABELS if l not in fields]
    if missing:
        raise PipelineError(f"metadata reply missing fields: {missing}")
    return fields


def _none_to_null(text: str) -> str | None:
    return None if text.lower().strip('"') in ("none", "null", "") else text


def generate_metadata(
    edit: EditRecord,
    chosen_src: str,
    chosen_tgt: str,
    provider: Provider,
    fallbacks: list[tuple[str, str, str]] = (),
    chosen_region: tuple[str, str] = ("full", "full"),
) -> PipelineMetadata:
    """One-shot metadata generation with region fallbacks.

    ``fallbacks`` lists further (region, source description, edited
    description) attempts, tried in order whenever the model returns an
    invalid action type or a malformed structure. Only valid, well-formed
    responses are retained; exhausting every region raises.
    """
    if not chosen_src.strip() or not chosen_tgt.strip():
        raise ValueError("chosen descriptions must be non-empty")
    template = load_prompt("metadata_oneshot.txt")
    attempts = [(chosen_region, chosen_src, chosen_tgt)] + [
        ((region, region), src, tgt) for region, src, tgt in fallbacks
    ]
    failures = []
    for attempt_no, (regions, src_text, tgt_text) in enumerate(attempts, start=1):
        prompt = template.format(
            instruction=edit.instruction,
            source_description=src_text,
            edited_description=tgt_text,
        )
        reply = provider.complete(prompt)
        try:
            fields = _parse_metadata_reply(reply)
            action = parse_action(fields["ACTION"])
        except (PipelineError, ValueError) as exc:
            failures.append(f"{regions}: {exc}")
            continue
        try:
            return PipelineMetadata(
                action=action,
                short_caption=fields["SHORT_CAPTION"],
                extensive_caption=fields["EXTENSIVE_CAPTION"],
                revised_instruction=fields["REVISED_INSTRUCTION"],
                source_object=_none_to_null(fields["SOURCE_OBJECT"]),
                target_object=_none_to_null(fields["TARGET_OBJECT"]),
                explanation=fields["EXPLANATION"],
                grounding_choice={"source": regions[0], "edited": regions[1]},
                attempts=attempt_no,
            )
        except ValueError as exc:
            failures.append(f"{regions}: {exc}")
            continue
    raise ExhaustedFallbackError(
        f"edit {edit.id}: no region produced valid metadata: {failures}"
    )


def run_pipeline(
    edit: EditRecord, provider: Provider, lex: NounLexicon, base_dir: str | Path = "."
) -> PipelineMetadata:
    """Full pipeline for one edit: describe, ground, generate (with fallbacks)."""
    descs = gather_descriptions(edit, provider, base_dir)
    choice = select_grounded(edit.instruction, descs, lex)
    (src_region, src_text) = choice["source"]
    (tgt_region, tgt_text) = choice["edited"]

    tried = {(src_region, tgt_region)}
    fallbacks = []
    for region in REGION_ORDER:
        s = descs.source.get(region)
        t = descs.edited.get(region)
        if s is None or t is None or (region, region) in tried:
            continue
        tried.add((region, region))
        fallbacks.append((region, s, t))

    return generate_metadata(
        edit,
        src_text,
        tgt_text,
        provider,
        fallbacks=fallbacks,
        chosen_region=(src_region, tgt_region),
    )
