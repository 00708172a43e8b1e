"""Training-data augmentation: reverse edits and deceptive negatives.

Reversal swaps the image pair and maps the action (Add <-> Remove; Replace
and ChangeAttribute swap objects); negatives substitute a deceptive object
and regenerate the instruction/caption, labeled negative. Applying both on
top of the originals expands a dataset fourfold.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .core import ActionType
from .lexicon import NounLexicon, head_noun, lexical_similar
from .providers import Provider, load_prompt

# Deceptive scene objects for Remove edits must be of similar size:
# bbox area within +/-50% of the original object's area.
SIZE_TOLERANCE = 0.5


class AugmentError(Exception):
    pass


class NoCandidateError(AugmentError):
    """No acceptable deceptive object could be produced."""


@dataclass(frozen=True)
class SceneObject:
    """A detected scene object (label + bbox area), from detection exports."""

    label: str
    area: float


@dataclass(frozen=True)
class TrainingInstance:
    id: str
    image_pair: tuple[str, str]
    instruction: str
    difference_caption: str
    label: str  # "positive" | "negative"
    lineage: str  # "original" | "reversed" | "negative" | "reversed_negative"
    action: ActionType
    source_object: str | None
    target_object: str | None
    deceptive_object: str | None = None

    def __post_init__(self):
        if self.label not in ("positive", "negative"):
            raise ValueError(f"bad label: {self.label}")
        if self.lineage not in ("original", "reversed", "negative", "reversed_negative"):
            raise ValueError(f"bad lineage: {self.lineage}")
        if self.lineage in ("negative", "reversed_negative") and self.label != "negative":
            raise ValueError("negative lineage requires label=negative")


_REVERSED_ACTION = {
    ActionType.ADD: ActionType.REMOVE,
    ActionType.REMOVE: ActionType.ADD,
    ActionType.REPLACE: ActionType.REPLACE,
    ActionType.CHANGE_ATTRIBUTE: ActionType.CHANGE_ATTRIBUTE,
}

_REVERSED_LINEAGE = {
    "original": "reversed",
    "negative": "reversed_negative",
    "reversed": "original",
    "reversed_negative": "negative",
}


def _parse_labeled(reply: str, labels: tuple[str, ...]) -> dict[str, str]:
    fields: dict[str, str] = {}
    for line in reply.splitlines():
        for label in labels:
            prefix = label + ":"
            if line.strip().startswith(prefix):
                fields[label] = line.strip()[len(prefix) :].strip()
    missing = [l for l in labels if not fields.get(l)]
    if missing:
        raise AugmentError(f"rewrite reply missing {missing}: {reply!r}")
    return fields


def reverse_edit(inst: TrainingInstance, provider: Provider) -> TrainingInstance:
    """Reversed instance: swapped images, mapped action, rewritten text.

    Structural involution: reversing twice restores the action type and
    image order (the rewritten text may differ).
    """
    action = _REVERSED_ACTION[inst.action]
    prompt = load_prompt("augment_reverse.txt").format(
        action=action.value, instruction=inst.instruction, caption=inst.difference_caption
    )
    fields = _parse_labeled(provider.complete(prompt), ("INSTRUCTION", "CAPTION"))
    return replace(
        inst,
        id=inst.id + ".rev",
        image_pair=(inst.image_pair[1], inst.image_pair[0]),
        instruction=fields["INSTRUCTION"],
        difference_caption=fields["CAPTION"],
        lineage=_REVERSED_LINEAGE[inst.lineage],
        action=action,
        source_object=inst.target_object,
        target_object=inst.source_object,
    )


def _true_object(inst: TrainingInstance) -> str:
    obj = inst.target_object or inst.source_object
    if not obj:
        raise AugmentError(f"instance {inst.id} has no object metadata")
    return obj


def _pick_remove_decoy(
    inst: TrainingInstance, scene_objects: list[SceneObject], lex: NounLexicon
) -> str:
    """A scene object of similar size to the removed one, different in kind."""
    true_obj = inst.source_object
    if not true_obj:
        raise AugmentError(f"Remove instance {inst.id} lacks a source object")
    anchors = [s for s in scene_objects if lexical_similar(s.label, true_obj, lex)]
    if not anchors:
        raise NoCandidateError(f"{inst.id}: removed object not found among scene objects")
    area = max(a.area for a in anchors)
    candidates = [
        s
        for s in scene_objects
        if not lexical_similar(s.label, true_obj, lex)
        and abs(s.area - area) <= SIZE_TOLERANCE * area
    ]
    if not candidates:
        raise NoCandidateError(f"{inst.id}: no similarly sized scene object")
    candidates.sort(key=lambda s: (abs(s.area - area), s.label))
    return candidates[0].label


def _propose_absent_decoy(
    inst: TrainingInstance, scene_objects: list[SceneObject], provider: Provider, lex: NounLexicon
) -> str:
    """A visually similar object confirmed absent from the scene."""
    true_obj = _true_object(inst)
    scene_labels = sorted({s.label for s in scene_objects})
    prompt = load_prompt("augment_negative_object.txt").format(
        object=true_obj, scene=", ".join(scene_labels) or "(none)"
    )
    fields = _parse_labeled(provider.complete(prompt), ("OBJECT",))
    decoy = fields["OBJECT"]
    if lexical_similar(decoy, true_obj, lex):
        raise NoCandidateError(f"{inst.id}: proposed decoy {decoy!r} matches the true object")
    if any(lexical_similar(decoy, label, lex) for label in scene_labels):
        raise NoCandidateError(f"{inst.id}: proposed decoy {decoy!r} is present in the scene")
    return decoy


def _propose_attribute_decoy(inst: TrainingInstance, provider: Provider, lex: NounLexicon) -> str:
    prompt = load_prompt("augment_negative_attribute.txt").format(
        source=inst.source_object or "", target=inst.target_object or ""
    )
    value = _parse_labeled(provider.complete(prompt), ("VALUE",))["VALUE"]
    for existing in (inst.source_object, inst.target_object):
        if existing and value.lower() in existing.lower():
            raise NoCandidateError(f"{inst.id}: attribute value {value!r} not novel")
    return value


def negative_edit(
    inst: TrainingInstance,
    scene_objects: list[SceneObject],
    provider: Provider,
    lex: NounLexicon,
) -> TrainingInstance:
    """Negative instance built around a deceptive object.

    Remove edits pick a similarly sized scene object; Add/Replace edits use
    a visually similar object absent from the scene; ChangeAttribute edits
    substitute the attribute value. The deceptive object never shares its
    head lemma with the true edited object.
    """
    if inst.action is ActionType.REMOVE:
        decoy = _pick_remove_decoy(inst, scene_objects, lex)
    elif inst.action in (ActionType.ADD, ActionType.REPLACE):
        decoy = _propose_absent_decoy(inst, scene_objects, provider, lex)
    else:
        decoy = _propose_attribute_decoy(inst, provider, lex)

    true_obj = _true_object(inst)
    if head_noun(decoy, lex) == head_noun(true_obj, lex):
        raise NoCandidateError(
            f"{inst.id}: decoy {decoy!r} shares its head lemma with {true_obj!r}"
        )

    prompt = load_prompt("augment_negative_rewrite.txt").format(
        action=inst.action.value,
        real=true_obj,
        deceptive=decoy,
        instruction=inst.instruction,
    )
    fields = _parse_labeled(provider.complete(prompt), ("INSTRUCTION", "CAPTION"))
    return replace(
        inst,
        id=inst.id + ".neg",
        instruction=fields["INSTRUCTION"],
        difference_caption=fields["CAPTION"],
        label="negative",
        lineage="negative",
        deceptive_object=decoy,
    )


@dataclass
class ExpandResult:
    instances: list[TrainingInstance]
    counts: dict[str, int] = field(default_factory=dict)
    failures: list[tuple[str, str, str]] = field(default_factory=list)  # (id, stage, reason)


def expand(
    originals: list[TrainingInstance],
    provider: Provider,
    lex: NounLexicon,
    scene_objects_by_id: dict[str, list[SceneObject]] | None = None,
) -> ExpandResult:
    """Originals plus reversed, negative, and reversed-negative variants.

    Fourfold when every generation succeeds; per-instance failures are
    recorded and skipped, never fabricated. Originals pass through
    verbatim, and output order is deterministic: all originals, then
    reversed, then negatives, then reversed negatives, each in input order.
    """
    scene_objects_by_id = scene_objects_by_id or {}
    reversed_out: list[TrainingInstance] = []
    negatives: list[TrainingInstance] = []
    reversed_negatives: list[TrainingInstance] = []
    failures: list[tuple[str, str, str]] = []

    for inst in originals:
        try:
            reversed_out.append(reverse_edit(inst, provider))
        except AugmentError as exc:
            failures.append((inst.id, "reverse", str(exc)))
        negative = None
        try:
            negative = negative_edit(
                inst, scene_objects_by_id.get(inst.id, []), provider, lex
            )
            negatives.append(negative)
        except AugmentError as exc:
            failures.append((inst.id, "negative", str(exc)))
        if negative is not None:
            try:
                reversed_negatives.append(reverse_edit(negative, provider))
            except AugmentError as exc:
                failures.append((inst.id, "reversed_negative", str(exc)))

    instances = list(originals) + reversed_out + negatives + reversed_negatives
    counts = {
        "original": len(originals),
        "reversed": len(reversed_out),
        "negative": len(negatives),
        "reversed_negative": len(reversed_negatives),
    }
    return ExpandResult(instances=instances, counts=counts, failures=failures)


def instance_to_dict(inst: TrainingInstance) -> dict:
    return {
        "id": inst.id,
        "images": list(inst.image_pair),
        "instruction": inst.instruction,
        "caption": inst.difference_caption,
        "label": inst.label,
        "lineage": inst.lineage,
        "action": inst.action.value,
        "source_object": inst.source_object,
        "target_object": inst.target_object,
        "deceptive_object": inst.deceptive_object,
    }
