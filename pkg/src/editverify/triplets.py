"""Difference triplets: extraction from captions, set matching, MP/HR metrics.

Model precision (MP) is the percentage of human-annotated triplets matched by
model-detected ones; hallucination rate (HR) is the percentage of model
triplets matching no human triplet. Soft variants also accept matches with
source and target objects reversed. Matching is one-to-one and
maximum-cardinality (exact search; the sets are small).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core import DifferenceTriplet, parse_action
from .providers import Provider, UnparseableReplyError, load_prompt

MODES = ("strict", "soft")

_NONE_WORDS = {"none", "null", "nothing", "-", ""}


@dataclass(frozen=True)
class TripletSet:
    triplets: tuple[DifferenceTriplet, ...]
    origin: str  # "human" | "model"
    edit_id: str = ""

    def __post_init__(self):
        if self.origin not in ("human", "model"):
            raise ValueError(f"origin must be human or model, got {self.origin!r}")

    def __len__(self) -> int:
        return len(self.triplets)


@dataclass(frozen=True)
class Matching:
    """One-to-one pairing of (human index, model index) under a match mode."""

    pairs: tuple[tuple[int, int], ...]
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        h_used = [h for h, _ in self.pairs]
        m_used = [m for _, m in self.pairs]
        if len(set(h_used)) != len(h_used) or len(set(m_used)) != len(m_used):
            raise ValueError("matching reuses an index; must be one-to-one")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class MetricReport:
    """Per-edit or corpus-level metric values (percentages in [0, 100]).

    ``mp`` is None when no human triplets exist; ``hr`` is None when the
    model predicted no differences (those edits feed ``no_diff_rate``
    instead of the HR denominator).
    """

    mp: float | None
    hr: float | None
    mp_soft: float | None
    hr_soft: float | None
    h_count: int
    m_count: int
    matched: int
    matched_soft: int
    avg_diffs_per_edit: float
    no_diff_rate: float
    edits: int = 1

    def __post_init__(self):
        for name in ("mp", "hr", "mp_soft", "hr_soft", "no_diff_rate"):
            value = getattr(self, name)
            if value is not None and not (0.0 <= value <= 100.0):
                raise ValueError(f"{name} out of range: {value}")
        if self.mp is not None and self.mp_soft is not None and self.mp_soft < self.mp - 1e-9:
            raise ValueError("mp_soft must be >= mp")
        if self.hr is not None and self.hr_soft is not None and self.hr_soft > self.hr + 1e-9:
            raise ValueError("hr_soft must be <= hr")


def _parse_object(text: str) -> str | None:
    cleaned = text.strip().strip('"')
    return None if cleaned.lower() in _NONE_WORDS else cleaned


def parse_triplet_line(line: str) -> DifferenceTriplet:
    """Parse one ``action; source; target`` line; raises on bad structure."""
    parts = [p.strip() for p in line.split(";")]
    if len(parts) != 3:
        raise ValueError(f"expected 'action; source; target', got {line!r}")
    action = parse_action(parts[0])
    return DifferenceTriplet(
        source_object=_parse_object(parts[1]),
        target_object=_parse_object(parts[2]),
        action=action,
    )


def extract_triplets(
    caption: str, provider: Provider, edit_id: str = "", origin: str = "model"
) -> TripletSet:
    """Ask the provider to convert a caption into triplets, one per line.

    Triplets come back in caption order; the first corresponds to the first
    mentioned change. A malformed reply is retried once with a stricter
    format reminder before raising.
    """
    if not caption.strip():
        raise ValueError("caption must be non-empty")
    template = load_prompt("extract_triplets.txt")
    prompt = template.format(caption=caption)
    reply = provider.complete(prompt)
    try:
        return TripletSet(_parse_triplet_reply(reply), origin=origin, edit_id=edit_id)
    except ValueError:
        retry_prompt = (
            prompt
            + "\nYour previous reply was malformed. Respond only with triplet lines "
            "in the exact form action; source object; target object."
        )
        reply = provider.complete(retry_prompt)
        try:
            return TripletSet(_parse_triplet_reply(reply), origin=origin, edit_id=edit_id)
        except ValueError as exc:
            raise UnparseableReplyError(f"triplet extraction failed: {exc}") from exc


def _parse_triplet_reply(reply: str) -> tuple[DifferenceTriplet, ...]:
    lines = [ln.strip() for ln in reply.splitlines() if ln.strip()]
    if len(lines) == 1 and lines[0].lower().strip(".") in _NONE_WORDS:
        return ()
    return tuple(parse_triplet_line(ln) for ln in lines)


def _objects_similar(a: str | None, b: str | None, judge) -> bool:
    # An absent object matches only an absent object: the Add/Remove
    # direction is semantically load-bearing.
    if a is None or b is None:
        return a is None and b is None
    return judge.object_similarity(a, b).match


def triplet_match(
    h: DifferenceTriplet, m: DifferenceTriplet, judge, mode: str = "strict"
) -> bool:
    """Match predicate: identical action plus similar objects.

    Soft mode also accepts the pair with the model triplet's source and
    target reversed.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if h.action is not m.action:
        return False
    if _objects_similar(h.source_object, m.source_object, judge) and _objects_similar(
        h.target_object, m.target_object, judge
    ):
        return True
    if mode == "soft":
        return _objects_similar(h.source_object, m.target_object, judge) and _objects_similar(
            h.target_object, m.source_object, judge
        )
    return False


def match_sets(h_set: TripletSet, m_set: TripletSet, judge, mode: str = "strict") -> Matching:
    """Maximum-cardinality one-to-one matching via augmenting paths.

    Exact (not greedy): greedy order-dependence would make the metrics
    nondeterministic across judges.
    """
    adjacency = [
        [j for j, m in enumerate(m_set.triplets) if triplet_match(h, m, judge, mode)]
        for h in h_set.triplets
    ]
    match_of_m: dict[int, int] = {}

    def try_assign(i: int, visited: set[int]) -> bool:
        for j in adjacency[i]:
            if j in visited:
                continue
            visited.add(j)
            if j not in match_of_m or try_assign(match_of_m[j], visited):
                match_of_m[j] = i
                return True
        return False

    for i in range(len(h_set.triplets)):
        try_assign(i, set())
    pairs = tuple(sorted((i, j) for j, i in match_of_m.items()))
    return Matching(pairs=pairs, mode=mode)


def compute_metrics(
    h_set: TripletSet,
    m_set: TripletSet,
    strict_matching: Matching,
    soft_matching: Matching,
) -> MetricReport:
    """Per-edit MP/HR (strict and soft) from precomputed matchings."""
    h, m = len(h_set), len(m_set)
    matched = len(strict_matching)
    matched_soft = len(soft_matching)
    mp = 100.0 * matched / h if h else None
    mp_soft = 100.0 * matched_soft / h if h else None
    hr = 100.0 * (m - matched) / m if m else None
    hr_soft = 100.0 * (m - matched_soft) / m if m else None
    return MetricReport(
        mp=mp,
        hr=hr,
        mp_soft=mp_soft,
        hr_soft=hr_soft,
        h_count=h,
        m_count=m,
        matched=matched,
        matched_soft=matched_soft,
        avg_diffs_per_edit=float(m),
        no_diff_rate=0.0 if m else 100.0,
        edits=1,
    )


def evaluate_edit(h_set: TripletSet, m_set: TripletSet, judge) -> MetricReport:
    """Match both modes and compute the per-edit report."""
    strict = match_sets(h_set, m_set, judge, "strict")
    soft = match_sets(h_set, m_set, judge, "soft")
    return compute_metrics(h_set, m_set, strict, soft)


def aggregate(reports: list[MetricReport]) -> MetricReport:
    """Corpus micro-average: sum counts, then divide.

    Edits with no human triplets are excluded from MP; edits where the model
    predicted no differences are excluded from the HR denominator and
    reported through ``no_diff_rate``.
    """
    if not reports:
        raise ValueError("nothing to aggregate")
    edits = sum(r.edits for r in reports)
    h_total = sum(r.h_count for r in reports)
    m_total = sum(r.m_count for r in reports)
    matched = sum(r.matched for r in reports)
    matched_soft = sum(r.matched_soft for r in reports)
    no_diff_edits = sum(r.edits for r in reports if r.m_count == 0)
    return MetricReport(
        mp=100.0 * matched / h_total if h_total else None,
        hr=100.0 * (m_total - matched) / m_total if m_total else None,
        mp_soft=100.0 * matched_soft / h_total if h_total else None,
        hr_soft=100.0 * (m_total - matched_soft) / m_total if m_total else None,
        h_count=h_total,
        m_count=m_total,
        matched=matched,
        matched_soft=matched_soft,
        avg_diffs_per_edit=m_total / edits,
        no_diff_rate=100.0 * no_diff_edits / edits,
        edits=edits,
    )


_SENTENCE_SPLIT = re.compile(r"(?<=[.!?:])\s+")
_PREAMBLE = re.compile(
    r"^(the (two )?images differ|the (main )?differences? (is|are)( as follows)?|here (is|are))\W*$",
    re.IGNORECASE,
)


def extract_main_difference(caption: str) -> str:
    """First sentence describing a change; the main change is mentioned first.

    Leading preamble sentences ("The images differ as follows:") are
    skipped; a single-sentence caption returns itself.
    """
    if not caption.strip():
        raise ValueError("caption must be non-empty")
    sentences = [s.strip() for s in _SENTENCE_SPLIT.split(caption.strip()) if s.strip()]
    for sentence in sentences:
        if sentence.endswith(":") or _PREAMBLE.match(sentence):
            continue
        return sentence
    return caption.strip()
