import json

import numpy as np
import pytest
from PIL import Image

from editverify.lexicon import load_lexicon
from editverify.providers import LexicalJudge


@pytest.fixture(scope="session")
def lex():
    return load_lexicon()


@pytest.fixture(scope="session")
def lexical_judge(lex):
    return LexicalJudge(lex)


class FakeTransport:
    """Scriptable transport double; records every prompt it sees."""

    def __init__(self, replies=None, fn=None):
        self.calls = []
        self.replies = list(replies or [])
        self.fn = fn

    def send(self, prompt, images):
        self.calls.append((prompt, len(images)))
        if self.fn is not None:
            return self.fn(prompt, images)
        if not self.replies:
            raise AssertionError(f"no scripted reply for prompt: {prompt[:80]!r}")
        return self.replies.pop(0)


@pytest.fixture
def fake_transport():
    return FakeTransport


def write_png(path, array):
    Image.fromarray(array).save(path)


def make_edit_dir(root, specs):
    """Create images/masks plus a manifest for the given edit specs.

    Each spec: {id, size (w, h), mask_boxes [(x, y, w, h), ...], instruction,
    editor}. Returns the manifest path.
    """
    root.mkdir(parents=True, exist_ok=True)
    lines = []
    for spec in specs:
        w, h = spec.get("size", (64, 48))
        rng = np.random.default_rng(abs(hash(spec["id"])) % (2**32))
        src = rng.integers(0, 255, size=(h, w, 3), dtype=np.uint8)
        edited = src.copy()
        edited[: h // 2] = 255 - edited[: h // 2]
        mask = np.zeros((h, w), dtype=np.uint8)
        for (x, y, bw, bh) in spec.get("mask_boxes", [(w // 4, h // 4, w // 4, h // 4)]):
            mask[y : y + bh, x : x + bw] = 255
        write_png(root / f"{spec['id']}_src.png", src)
        write_png(root / f"{spec['id']}_edit.png", edited)
        Image.fromarray(mask, mode="L").save(root / f"{spec['id']}_mask.png")
        lines.append(
            {
                "id": spec["id"],
                "source": f"{spec['id']}_src.png",
                "edited": f"{spec['id']}_edit.png",
                "mask": f"{spec['id']}_mask.png",
                "instruction": spec.get("instruction", "add a squirrel"),
                "editor": spec.get("editor", "magicbrush"),
            }
        )
    manifest = root / "manifest.jsonl"
    manifest.write_text("".join(json.dumps(l) + "\n" for l in lines))
    return manifest


@pytest.fixture
def edit_dir_factory(tmp_path):
    def factory(specs, name="edits"):
        return make_edit_dir(tmp_path / name, specs)

    return factory
