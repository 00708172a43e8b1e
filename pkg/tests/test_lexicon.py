import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from editverify.lexicon import (
    STOPLIST,
    extract_nouns,
    head_noun,
    lemmatize,
    lexical_similar,
    load_lexicon,
    noun_overlap,
)


def test_load_bundled_lexicon(lex):
    assert lex.version == "mini-nouns-1"
    assert lex.is_noun("sofa")
    # Every indexed synset id resolves.
    for lemma, synsets in lex.lemma_to_synsets.items():
        for sid in synsets:
            assert sid in lex.synset_to_lemmas


def test_extract_nouns_empty(lex):
    assert extract_nouns("", lex) == []


def test_extract_nouns_floor_wood(lex):
    assert extract_nouns("let the floor be made of wood", lex) == ["floor", "wood"]


def test_extract_nouns_wild_pig(lex):
    # "wild" is not a lexicon noun; "a" is not a noun at all.
    assert extract_nouns("add a wild pig", lex) == ["pig"]


def test_extract_nouns_dedup_and_stoplist(lex):
    nouns = extract_nouns("a picture of a dog and another dog", lex)
    assert nouns == ["dog"]
    for stop in STOPLIST:
        assert stop not in nouns


def test_lemmatize_plurals(lex):
    assert lemmatize("trees", lex) == "tree"
    assert lemmatize("boxes", lex) == "box"
    assert lemmatize("Pigs", lex) == "pig"


def test_noun_overlap_identity(lex):
    nouns = ["floor", "wood", "door"]
    assert noun_overlap(nouns, nouns, lex) == 3
    assert noun_overlap(["floor", "floor"], ["floor"], lex) == 1


def test_noun_overlap_disjoint(lex):
    assert noun_overlap(["vase"], ["squirrel"], lex) == 0


def test_noun_overlap_synonyms(lex):
    assert noun_overlap(["sofa"], ["couch"], lex) == 1


def test_head_noun(lex):
    assert head_noun("potted plant", lex) == "plant"
    assert head_noun("blue vase", lex) == "vase"
    # No lexicon noun: fall back to the last token.
    assert head_noun("zorbly quux", lex) == "quux"
    with pytest.raises(ValueError):
        head_noun("  ", lex)


def test_lexical_similar_attributes_ignored(lex):
    assert lexical_similar("blue vase", "brown vase", lex)
    assert lexical_similar("vase", "vase", lex)
    assert not lexical_similar("vase", "squirrel", lex)
    assert lexical_similar("pig", "hog", lex)


@given(st.sampled_from(["sofa", "blue vase", "potted plant", "wooden floor", "pig"]))
@settings(deadline=None)
def test_lexical_similar_reflexive(phrase):
    lex = load_lexicon()
    assert lexical_similar(phrase, phrase, lex)


@given(
    st.sampled_from(["sofa", "couch", "vase", "squirrel", "pig", "hog", "tree"]),
    st.sampled_from(["sofa", "couch", "vase", "squirrel", "pig", "hog", "tree"]),
)
@settings(deadline=None)
def test_lexical_similar_symmetric(a, b):
    lex = load_lexicon()
    assert lexical_similar(a, b, lex) == lexical_similar(b, a, lex)


def test_extract_nouns_subset_of_tokens(lex):
    text = "the large brown dog sat by the wooden fence near flowers"
    tokens = {lemmatize(t, lex) for t in text.split()}
    assert set(extract_nouns(text, lex)) <= tokens


def test_parser_reads_full_wordnet_format(tmp_path):
    # Lines in the shape a real 3.x noun database uses: license header
    # indented by spaces, pointer counts/symbols present, hex word counts,
    # underscore lemmas, sense keys after the pointer list.
    (tmp_path / "index.noun").write_text(
        "  1 This software and database is provided...\n"
        "sofa n 1 1 @ 1 0 04256520  \n"
        "flower_bed n 1 2 @ ~ 1 0 08570634  \n"
    )
    (tmp_path / "data.noun").write_text(
        "  1 This software and database is provided...\n"
        "04256520 06 n 03 sofa 0 couch 1 lounge 2 002 @ 04161981 n 0000 ~ 03131574 n 0000 "
        "| an upholstered seat for more than one person  \n"
        "08570634 17 n 02 flower_bed 0 flowerbed 1 001 @ 08569998 n 0000 "
        "| a bed in which flowers are growing  \n"
    )
    lex = load_lexicon(tmp_path)
    assert lex.is_noun("sofa") and lex.is_noun("flower bed")
    assert lex.synsets("sofa") == frozenset({"04256520"})
    # Same-synset lemmas listed in the data file resolve as synonyms even
    # without their own index lines.
    assert lex.synset_to_lemmas["04256520"] == frozenset({"sofa", "couch", "lounge"})
    assert lex.version.startswith("sha256:")
