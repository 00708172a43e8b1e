"""Build a synthetic demo workspace: edit set, detection exports, captions.

The images are procedurally drawn (flat scenes with colored rectangles), the
masks mark the edited region, and the detection exports describe the drawn
objects, so every downstream command has coherent inputs without any real
dataset.

Usage: python scripts/make_demo_fixture.py --out demo_workspace
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np
from PIL import Image

from editverify.geometry import rle_encode

EDITS = [
    # id, instruction, action, source_object, target_object, secondary object
    ("d00", "let the floor be made of wood", "Replace", "carpet floor", "wooden floor", "table"),
    ("d01", "add a squirrel on the grass", "Add", None, "squirrel", "bench"),
    ("d02", "remove the potted plant", "Remove", "potted plant", None, "umbrella"),
    ("d03", "make the coat red", "ChangeAttribute", "blue coat", "red coat", "chair"),
    ("d04", "replace the tree with a flowerbed", "Replace", "tree", "flowerbed", "fence"),
    ("d05", "add a wild pig near the fence", "Add", None, "pig", "rock"),
]

SIZE = (128, 128)
EDIT_BOX = (40, 40, 36, 36)  # x, y, w, h
SECONDARY_BOX = (48, 48, 10, 10)  # inside the edit region, off the main box


def draw_scene(rng, tint):
    h, w = SIZE[1], SIZE[0]
    img = np.full((h, w, 3), 200, dtype=np.uint8)
    img[..., 0] = 180 + (tint * 37) % 60
    for _ in range(6):
        x, y = int(rng.integers(0, w - 20)), int(rng.integers(0, h - 20))
        bw, bh = int(rng.integers(8, 20)), int(rng.integers(8, 20))
        img[y : y + bh, x : x + bw] = rng.integers(0, 255, size=3, dtype=np.uint8)
    return img


def box_mask(box):
    x, y, w, h = box
    m = np.zeros((SIZE[1], SIZE[0]), dtype=bool)
    m[y : y + h, x : x + w] = True
    return m


def export_row(image_id, objects):
    entries = []
    for label, score, box in objects:
        mask = box_mask(box)
        entries.append(
            {
                "label": label,
                "score": score,
                "bbox": list(box),
                "mask_rle": rle_encode(mask),
            }
        )
    return {"image_id": image_id, "resolution": list(SIZE), "objects": entries}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("demo_workspace"))
    args = ap.parse_args()
    out: Path = args.out
    edits_dir = out / "edits"
    edits_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(7)
    manifest_lines = []
    src_exports, tgt_exports = [], []
    human_rows, model_rows = [], []

    for i, (edit_id, instruction, action, source_obj, target_obj, secondary) in enumerate(EDITS):
        src = draw_scene(rng, i)
        edited = src.copy()
        x, y, w, h = EDIT_BOX
        edited[y : y + h, x : x + w] = (90 + 23 * i, 140, 60)
        Image.fromarray(src).save(edits_dir / f"{edit_id}_src.png")
        Image.fromarray(edited).save(edits_dir / f"{edit_id}_edit.png")
        mask = np.where(box_mask(EDIT_BOX), 255, 0).astype(np.uint8)
        Image.fromarray(mask, mode="L").save(edits_dir / f"{edit_id}_mask.png")
        manifest_lines.append(
            {
                "id": edit_id,
                "source": f"{edit_id}_src.png",
                "edited": f"{edit_id}_edit.png",
                "mask": f"{edit_id}_mask.png",
                "instruction": instruction,
                "editor": "demo",
            }
        )

        main_obj = target_obj or source_obj
        # A main object partially inside the mask, a secondary object inside
        # the mask that vanishes after the edit, and a bystander outside it.
        partial_box = (30, 30, 20, 20)
        bystander = (90, 90, 24, 24)
        src_exports.append(
            export_row(
                edit_id,
                [
                    (main_obj, 0.92, partial_box),
                    (secondary, 0.85, SECONDARY_BOX),
                    ("window", 0.9, bystander),
                ],
            )
        )
        # After the edit: the partial object's confidence drops; the
        # secondary object is gone on even-indexed edits.
        tgt_objects = [(main_obj, 0.92 - (0.10 if i % 2 == 0 else 0.01), partial_box),
                       ("window", 0.9, bystander)]
        if i % 2 == 1:
            tgt_objects.append((secondary, 0.84, SECONDARY_BOX))
        tgt_exports.append(export_row(edit_id, tgt_objects))

        if action == "Add":
            human = [{"action": "Add", "source": None, "target": target_obj}]
            model = [{"action": "Add", "source": None, "target": target_obj}]
        elif action == "Remove":
            human = [{"action": "Remove", "source": source_obj, "target": None}]
            model = [{"action": "Remove", "source": secondary, "target": None}]
        else:
            human = [
                {"action": action, "source": source_obj, "target": target_obj},
                {"action": "Remove", "source": secondary, "target": None},
            ]
            model = [{"action": action, "source": target_obj, "target": source_obj}]
        human_rows.append({"id": edit_id, "triplets": human})
        model_rows.append({"id": edit_id, "triplets": model})

    def dump_jsonl(path, rows):
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))

    dump_jsonl(edits_dir / "manifest.jsonl", manifest_lines)
    dump_jsonl(out / "detections_source.jsonl", src_exports)
    dump_jsonl(out / "detections_edited.jsonl", tgt_exports)
    dump_jsonl(out / "human_triplets.jsonl", human_rows)
    dump_jsonl(out / "model_triplets.jsonl", model_rows)
    print(f"demo fixture written to {out}/ ({len(EDITS)} edits)")


if __name__ == "__main__":
    main()
