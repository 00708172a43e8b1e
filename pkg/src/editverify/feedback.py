"""Keyword categories for annotator feedback on edit quality.

Categorization is case-insensitive keyword/phrase matching on word
boundaries; a feedback text can land in several categories or none.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class FeedbackCategory:
    name: str
    keywords: tuple[str, ...]


FEEDBACK_CATEGORIES = (
    FeedbackCategory(
        "Shape/Proportion",
        ("shape", "proportion", "size", "distorted", "too big", "too small"),
    ),
    FeedbackCategory(
        "Blur/Fuzziness",
        ("blurry", "fuzzy", "smudged", "blurred edges", "not clear"),
    ),
    FeedbackCategory(
        "Texture",
        ("texture", "smooth", "grainy", "patchy", "unnatural"),
    ),
    FeedbackCategory(
        "Lighting/Brightness",
        ("shadows", "lighting", "brightness", "overexposed", "underexposed"),
    ),
    FeedbackCategory(
        "Color",
        ("color", "too bright", "saturated", "unnatural color"),
    ),
    FeedbackCategory(
        "Unreal/Artificial Look",
        ("cartoon", "toy", "artificial", "fake", "graphical"),
    ),
    FeedbackCategory(
        "Placement",
        ("placement", "misaligned", "incorrect angle", "orientation"),
    ),
    FeedbackCategory(
        "Missing/Extra Objects",
        ("missing", "removed", "added", "extra", "inconsistent"),
    ),
    FeedbackCategory(
        "Edges",
        ("edges", "sharp", "uneven", "jagged"),
    ),
    FeedbackCategory(
        "Resolution",
        ("resolution", "clarity", "pixelated", "low quality"),
    ),
)

_PATTERNS = {
    cat.name: tuple(
        re.compile(r"\b" + re.escape(kw).replace(r"\ ", r"\s+") + r"\b", re.IGNORECASE)
        for kw in cat.keywords
    )
    for cat in FEEDBACK_CATEGORIES
}


def categorize_feedback(text: str) -> set[FeedbackCategory]:
    """All categories whose keyword list matches the text; empty set allowed.

    Monotone: appending text never removes a category.
    """
    hits = set()
    for cat in FEEDBACK_CATEGORIES:
        if any(p.search(text) for p in _PATTERNS[cat.name]):
            hits.add(cat)
    return hits
