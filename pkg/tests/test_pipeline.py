import io

import pytest
from PIL import Image

from editverify.core import ActionType, load_manifest
from editverify.pipeline import (
    ExhaustedFallbackError,
    RegionDescriptions,
    RegionSet,
    gather_descriptions,
    generate_metadata,
    run_pipeline,
    select_grounded,
)
from editverify.providers import Provider, ProviderConfig
from tests.conftest import FakeTransport

CFG = ProviderConfig(provider_id="test", model_name="m", backoff_s=0.0)


def image_size(blob):
    return Image.open(io.BytesIO(blob)).size


def describe_by_size(full_size, texts):
    """Fake model: answer describe prompts by the crop's pixel size."""

    def fn(prompt, images):
        if prompt.startswith("Describe the contents"):
            w, h = image_size(images[0])
            if (w, h) == full_size:
                return texts["full"]
            if (w, h)[0] * (w, h)[1] > texts["tight_area"]:
                return texts["padded"]
            return texts["tight"]
        raise AssertionError(f"unexpected prompt: {prompt[:60]}")

    return fn


VALID_METADATA = (
    "ACTION: Replace\n"
    "SOURCE_OBJECT: carpet floor\n"
    "TARGET_OBJECT: wooden floor\n"
    "SHORT_CAPTION: The carpet floor was replaced with a wooden floor.\n"
    "EXTENSIVE_CAPTION: The carpet floor was replaced with a wooden floor.\n"
    "REVISED_INSTRUCTION: Replace the carpet with wood.\n"
    "EXPLANATION: The flooring changed."
)


def test_gather_descriptions_single_box(edit_dir_factory):
    manifest = edit_dir_factory(
        [{"id": "e1", "size": (64, 64), "mask_boxes": [(20, 20, 8, 8)]}]
    )
    es = load_manifest(manifest)
    texts = {"full": "full view", "padded": "padded view", "tight": "tight view",
             "tight_area": 100}
    provider = Provider(CFG, transport=FakeTransport(fn=describe_by_size((64, 64), texts)))
    descs = gather_descriptions(es.records[0], provider, es.base_dir)
    assert descs.source.tight == "tight view"
    assert descs.source.padded == "padded view"
    assert descs.source.full == "full view"
    assert descs.edited.tight == "tight view"


def test_gather_descriptions_multi_box_falls_back_to_full(edit_dir_factory):
    manifest = edit_dir_factory(
        [{"id": "e1", "size": (64, 64), "mask_boxes": [(5, 5, 6, 6), (40, 40, 8, 8)]}]
    )
    es = load_manifest(manifest)
    t = FakeTransport(fn=lambda p, i: "full only")
    provider = Provider(CFG, transport=t)
    descs = gather_descriptions(es.records[0], provider, es.base_dir)
    assert descs.source.tight is None and descs.source.padded is None
    assert descs.edited.tight is None
    assert len(t.calls) == 2  # one full description per image


def test_gather_descriptions_empty_mask_falls_back(edit_dir_factory):
    manifest = edit_dir_factory([{"id": "e1", "size": (64, 64), "mask_boxes": []}])
    es = load_manifest(manifest)
    provider = Provider(CFG, transport=FakeTransport(fn=lambda p, i: "full only"))
    descs = gather_descriptions(es.records[0], provider, es.base_dir)
    assert descs.source.tight is None
    assert descs.source.full == "full only"


def rd(src_tight=None, src_padded=None, src_full="", tgt_tight=None, tgt_padded=None, tgt_full=""):
    return RegionDescriptions(
        source=RegionSet(full=src_full, tight=src_tight, padded=src_padded),
        edited=RegionSet(full=tgt_full, tight=tgt_tight, padded=tgt_padded),
    )


def test_select_grounded_max_overlap_wins(lex):
    descs = rd(
        src_tight="a gray carpet floor",
        src_padded="a kitchen with a fridge",
        src_full="a house interior",
        tgt_tight="a wooden floor",
        tgt_padded="a kitchen with a fridge",
        tgt_full="a house interior",
    )
    choice = select_grounded("let the floor be made of wood", descs, lex)
    assert choice["source"] == ("tight", "a gray carpet floor")
    assert choice["edited"][0] == "tight"


def test_select_grounded_tie_breaks_tight_first(lex):
    same = "a vase on a table"
    descs = rd(
        src_tight=same, src_padded=same, src_full=same,
        tgt_tight=same, tgt_padded=same, tgt_full=same,
    )
    choice = select_grounded("make the vase blue", descs, lex)
    assert choice["source"][0] == "tight"
    assert choice["edited"][0] == "tight"


def test_select_grounded_shared_mentions_fallback(lex):
    # Zero instruction overlap anywhere; padded and full both mention a
    # table, tight mentions nothing shared.
    descs = rd(
        src_tight="a blurry patch",
        src_padded="a table by the window",
        src_full="a room with a table",
        tgt_tight="a blurry patch",
        tgt_padded="a table by the window",
        tgt_full="a room with a table",
    )
    choice = select_grounded("add a squirrel", descs, lex)
    assert choice["source"][0] == "padded"


def test_select_grounded_defaults_to_full(lex):
    descs = rd(
        src_tight="xqz", src_padded="pqm", src_full="zzz",
        tgt_tight="xqz", tgt_padded="pqm", tgt_full="zzz",
    )
    choice = select_grounded("add a squirrel", descs, lex)
    assert choice["source"][0] == "full"


def make_record(edit_dir_factory, **spec):
    manifest = edit_dir_factory([{"id": "e1", **spec}])
    es = load_manifest(manifest)
    return es.records[0], es.base_dir


def test_generate_metadata_valid(edit_dir_factory):
    rec, _ = make_record(edit_dir_factory)
    provider = Provider(CFG, transport=FakeTransport([VALID_METADATA]))
    meta = generate_metadata(rec, "src desc", "tgt desc", provider)
    assert meta.action is ActionType.REPLACE
    assert meta.source_object == "carpet floor"
    assert meta.target_object == "wooden floor"
    assert meta.attempts == 1


def test_generate_metadata_invalid_action_falls_back(edit_dir_factory):
    rec, _ = make_record(edit_dir_factory)
    bad = VALID_METADATA.replace("ACTION: Replace", "ACTION: None")
    provider = Provider(CFG, transport=FakeTransport([bad, VALID_METADATA]))
    meta = generate_metadata(
        rec,
        "tight src",
        "tight tgt",
        provider,
        fallbacks=[("padded", "padded src", "padded tgt")],
        chosen_region=("tight", "tight"),
    )
    assert meta.attempts == 2
    assert meta.grounding_choice == {"source": "padded", "edited": "padded"}


def test_generate_metadata_exhausted(edit_dir_factory):
    rec, _ = make_record(edit_dir_factory)
    provider = Provider(CFG, transport=FakeTransport(["garbage", "more garbage"]))
    with pytest.raises(ExhaustedFallbackError):
        generate_metadata(
            rec, "a", "b", provider, fallbacks=[("full", "c", "d")]
        )


def test_run_pipeline_end_to_end(edit_dir_factory, lex):
    manifest = edit_dir_factory(
        [
            {
                "id": "e1",
                "size": (64, 64),
                "mask_boxes": [(20, 20, 8, 8)],
                "instruction": "let the floor be made of wood",
            }
        ]
    )
    es = load_manifest(manifest)

    def fn(prompt, images):
        if prompt.startswith("Describe the contents"):
            w, h = image_size(images[0])
            if (w, h) == (64, 64):
                return "a room interior"
            return "a gray carpet floor region"
        return VALID_METADATA

    provider = Provider(CFG, transport=FakeTransport(fn=fn))
    meta = run_pipeline(es.records[0], provider, lex, es.base_dir)
    assert meta.action is ActionType.REPLACE
    assert meta.grounding_choice["source"] in ("tight", "padded")
    assert meta.short_caption


def test_run_pipeline_multibox_uses_full(edit_dir_factory, lex):
    manifest = edit_dir_factory(
        [
            {
                "id": "e1",
                "size": (64, 64),
                "mask_boxes": [(2, 2, 6, 6), (40, 40, 8, 8)],
                "instruction": "add a pig",
            }
        ]
    )
    es = load_manifest(manifest)

    def fn(prompt, images):
        if prompt.startswith("Describe the contents"):
            return "a field with a fence"
        return VALID_METADATA.replace("ACTION: Replace", "ACTION: Add").replace(
            "SOURCE_OBJECT: carpet floor", "SOURCE_OBJECT: none"
        )

    provider = Provider(CFG, transport=FakeTransport(fn=fn))
    meta = run_pipeline(es.records[0], provider, lex, es.base_dir)
    assert meta.grounding_choice == {"source": "full", "edited": "full"}
    assert meta.action is ActionType.ADD
    assert meta.source_object is None
