"""Report emitters: label distributions and model-comparison tables.

Every report exists in two renderings from one in-memory dict: structured
JSON for machines and an aligned text table for humans. Question accuracies
are shown to one decimal place; the caption metrics to two.
"""

from __future__ import annotations

import hashlib
import json
from typing import Iterable

from .annotate import MajorityLabels
from .harness import QUESTION_KINDS, binarize
from .triplets import MetricReport

DISTRIBUTION_CATEGORIES = {
    "Accuracy Level": "accuracy_level",
    "Artifacts Level": "artifact_level",
    "Technical Precision": "technical_ok",
    "Visual Consistency": "visually_consistent",
    "Diff Caption Accuracy": "caption_verdict",
}


def _pct(count: int, total: int) -> float:
    return round(100.0 * count / total, 1) if total else 0.0


def emit_distribution(labels: Iterable[MajorityLabels]) -> dict:
    """Per-category percentage distribution of majority labels.

    Denominator per category is the number of edits with a majority on that
    question; percentages sum to 100 up to rounding.
    """
    labels = list(labels)
    out: dict[str, dict] = {}
    for title, key in DISTRIBUTION_CATEGORIES.items():
        counts: dict[str, int] = {}
        for lab in labels:
            if key == "visually_consistent":
                value = binarize(lab).visually_consistent
                if value is None:
                    continue
                name = "Yes" if value else "No"
            else:
                value = lab.majorities.get(key)
                if value is None:
                    continue
                name = {True: "Yes", False: "No", "accepted": "Yes", "corrected": "No"}.get(
                    value, str(value)
                )
            counts[name] = counts.get(name, 0) + 1
        total = sum(counts.values())
        out[title] = {
            "total": total,
            "percentages": {
                name: _pct(c, total) for name, c in sorted(counts.items())
            },
        }
    return {"kind": "label-distribution", "edits": len(labels), "categories": out}


def render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return "\n".join(lines)


def render_distribution(dist: dict) -> str:
    rows = []
    for title, entry in dist["categories"].items():
        for name, pct in entry["percentages"].items():
            rows.append([title, name, f"{pct:.1f}%"])
        if not entry["percentages"]:
            rows.append([title, "(no majorities)", "-"])
    return render_table(["Category", "Label", "Share"], rows)


METRIC_ROWS = (
    ("MP", "mp", 2),
    ("MP_soft", "mp_soft", 2),
    ("HR", "hr", 2),
    ("HR_soft", "hr_soft", 2),
)


def emit_comparison(columns: dict[str, dict]) -> dict:
    """Question scores plus caption metrics, one column per model.

    ``columns`` maps a model name to any of: ``questions`` ({kind ->
    balanced accuracy}), ``metrics`` (a corpus MetricReport or its dict),
    ``main_difference`` (percentage).
    """
    models = {}
    for name, parts in columns.items():
        questions = dict(parts.get("questions") or {})
        metrics = parts.get("metrics")
        if isinstance(metrics, MetricReport):
            metrics = {
                "mp": metrics.mp,
                "mp_soft": metrics.mp_soft,
                "hr": metrics.hr,
                "hr_soft": metrics.hr_soft,
                "avg_diffs_per_edit": metrics.avg_diffs_per_edit,
                "no_diff_rate": metrics.no_diff_rate,
            }
        models[name] = {
            "questions": questions,
            "metrics": metrics,
            "main_difference": parts.get("main_difference"),
        }
    return {"kind": "model-comparison", "models": models}


def _fmt(value, decimals, suffix="%"):
    if value is None:
        return "-"
    return f"{value:.{decimals}f}{suffix}"


def render_comparison(comp: dict) -> str:
    names = list(comp["models"])
    headers = ["Row"] + names
    rows = []
    for kind in QUESTION_KINDS:
        row = [kind]
        for name in names:
            row.append(_fmt(comp["models"][name]["questions"].get(kind), 1))
        rows.append(row)
    rows.append(
        ["Main Difference"]
        + [_fmt(comp["models"][n]["main_difference"], 1) for n in names]
    )
    for label, key, decimals in METRIC_ROWS:
        row = [label]
        for name in names:
            metrics = comp["models"][name]["metrics"] or {}
            row.append(_fmt(metrics.get(key), decimals))
        rows.append(row)
    rows.append(
        ["Avg. Diff"]
        + [
            _fmt((comp["models"][n]["metrics"] or {}).get("avg_diffs_per_edit"), 2, "")
            for n in names
        ]
    )
    rows.append(
        ["No Diffs"]
        + [_fmt((comp["models"][n]["metrics"] or {}).get("no_diff_rate"), 1) for n in names]
    )
    return render_table(headers, rows)


def digest_of(obj: dict) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()[:16]
