"""Vocabulary building, sequence/aux encoding, and the binary cache."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usprivacy.corpus import (
    ENTITY_LABELS, POS_TAG_ORDER, LinguisticAnnotation,
)
from usprivacy.encode import (
    AUX_WIDTH, OOV_ID, PAD_ID, Vocabulary, aux_vector, build_vocab,
    encode_corpus, encode_sequence, load_encoded, save_encoded,
)
from usprivacy.errors import ConfigError, DataError
from usprivacy.lexicon import parse_dictionary

from conftest import make_story

MINI = "[OpenVisible] open\naccess*\nshare*\n[PrivateSecret] private\ndata\n"


# ------------------------------------------------------------- vocabulary

def test_vocab_order_by_count_then_lexicographic():
    v = Vocabulary("token")
    for sym in ["b", "a", "b", "c", "a", "b"]:
        v.observe(sym)
    v.freeze()
    # b:3 then a:2 then c:1
    assert v.id_for("b") == 2
    assert v.id_for("a") == 3
    assert v.id_for("c") == 4
    assert v.id_for("zzz") == OOV_ID
    assert v.size == 5
    assert v.symbols() == ("<pad>", "<oov>", "b", "a", "c")


def test_vocab_ties_break_lexicographically():
    v = Vocabulary("token")
    for sym in ["beta", "alpha", "gamma"]:
        v.observe(sym)
    v.freeze()
    assert [v.id_for(s) for s in ["alpha", "beta", "gamma"]] == [2, 3, 4]


def test_vocab_min_count_drops_rare_symbols():
    v = Vocabulary("token", min_count=2)
    for sym in ["a", "a", "b"]:
        v.observe(sym)
    v.freeze()
    assert v.id_for("a") == 2
    assert v.id_for("b") == OOV_ID
    assert v.size == 3


def test_vocab_requires_freeze_before_use():
    v = Vocabulary("token")
    v.observe("a")
    with pytest.raises(DataError, match="not frozen"):
        v.id_for("a")
    v.freeze()
    with pytest.raises(DataError, match="frozen"):
        v.observe("b")


def test_vocab_rejects_bad_kind_and_count():
    with pytest.raises(ConfigError, match="unknown vocabulary kind"):
        Vocabulary("chars")
    with pytest.raises(ConfigError, match="min_count"):
        Vocabulary("token", min_count=0)


def test_vocab_save_load_roundtrip(tmp_path):
    v = Vocabulary("dep", min_count=1)
    for sym in ["det", "pobj", "det", "nsubj"]:
        v.observe(sym)
    v.freeze()
    path = tmp_path / "dep.vocab"
    v.save(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# kind=dep min_count=1"
    assert lines[1] == "det\t2"
    loaded = Vocabulary.load(path)
    assert loaded.kind == "dep"
    assert loaded.symbols() == v.symbols()
    assert loaded.id_for("nsubj") == v.id_for("nsubj")


def test_vocab_load_rejects_gaps(tmp_path):
    path = tmp_path / "bad.vocab"
    path.write_text("# kind=token min_count=1\na\t2\nb\t4\n")
    with pytest.raises(DataError, match="contiguous"):
        Vocabulary.load(path)


def test_build_vocab_uses_entity_substituted_stream(small_corpus):
    v = build_vocab(small_corpus, "token")
    assert "PERSON" in v
    assert "I" not in v  # raw surface token is replaced in the stream
    assert "HEALTH" in v
    dep = build_vocab(small_corpus, "dep")
    assert "prep" in dep and "poss" in dep
    ent = build_vocab(small_corpus, "entity")
    assert "PERSON" in ent and "prep" not in ent


# ------------------------------------------------------------- sequences

def test_encode_sequence_pads_and_truncates(site_member_story):
    v = build_vocab([site_member_story], "dep")
    ids = encode_sequence(v, site_member_story.annotation.dep, length=30)
    assert ids.shape == (30,)
    assert ids.dtype == np.int64
    assert (ids[24:] == PAD_ID).all()
    assert (ids[:24] != PAD_ID).all()
    short = encode_sequence(v, site_member_story.annotation.dep, length=10)
    np.testing.assert_array_equal(short, ids[:10])
    empty = encode_sequence(v, [], length=5)
    np.testing.assert_array_equal(empty, [PAD_ID] * 5)


def test_encode_sequence_maps_oov():
    v = Vocabulary("token")
    v.observe("known")
    v.freeze()
    ids = encode_sequence(v, ["known", "unknown"], length=4)
    np.testing.assert_array_equal(ids, [2, OOV_ID, PAD_ID, PAD_ID])


@given(st.lists(st.sampled_from(["det", "prep", "pobj", "nsubj"]),
                min_size=0, max_size=40))
def test_encode_sequence_pad_idempotent(symbols):
    v = Vocabulary("dep")
    for s in ["det", "prep", "pobj", "nsubj"]:
        v.observe(s)
    v.freeze()
    once = encode_sequence(v, symbols, length=30)
    twice = encode_sequence(v, list(symbols) + [], length=30)
    np.testing.assert_array_equal(once, twice)
    assert (once != PAD_ID).sum() == min(len(symbols), 30)


# ---------------------------------------------------------------- aux

def test_aux_vector_site_member(site_member_story):
    aux = aux_vector(site_member_story.annotation)
    assert aux.shape == (AUX_WIDTH,)
    noun = POS_TAG_ORDER.index("NOUN")
    assert aux[noun] == pytest.approx(5 / 24)
    sconj = POS_TAG_ORDER.index("SCONJ")
    assert aux[sconj] == pytest.approx(3 / 24)
    assert aux[:len(POS_TAG_ORDER)].sum() == pytest.approx(1.0)
    # Entities: PERSON twice, ORG once.
    ent = aux[len(POS_TAG_ORDER):]
    assert ent[ENTITY_LABELS.index("PERSON")] == pytest.approx(2 / 3)
    assert ent[ENTITY_LABELS.index("ORG")] == pytest.approx(1 / 3)
    assert ent.sum() == pytest.approx(1.0)


def test_aux_vector_without_entities_is_zero_half():
    ann = LinguisticAnnotation(("update", "board"), ("VERB", "NOUN"),
                               ("ROOT", "dobj"), ("update", "board"))
    aux = aux_vector(ann)
    assert aux[len(POS_TAG_ORDER):].sum() == 0.0
    assert aux[:len(POS_TAG_ORDER)].sum() == pytest.approx(1.0)


def test_aux_vector_empty_annotation_is_all_zero():
    ann = LinguisticAnnotation((), (), (), ())
    np.testing.assert_array_equal(aux_vector(ann), np.zeros(AUX_WIDTH))


# ---------------------------------------------------------------- corpus

def test_encode_corpus_fixture(small_corpus):
    d = parse_dictionary(MINI)
    tok = build_vocab(small_corpus, "token")
    dep = build_vocab(small_corpus, "dep")
    samples = encode_corpus(small_corpus, tok, dep, d, length=30)
    assert [s.label for s in samples] == [0, 0, 1, 1]
    assert samples[0].token_ids.shape == (30,)
    assert samples[0].lexicon.shape == (2,)
    # Story 1 contains 'data' -> PrivateSecret fraction 1/14.
    assert samples[0].lexicon[1] == pytest.approx(1 / 14)
    # The token channel is the entity-substituted stream.
    person_id = tok.id_for("PERSON")
    assert samples[0].token_ids[4] == person_id


def test_encode_corpus_requires_frozen_vocabs(small_corpus):
    d = parse_dictionary(MINI)
    tok = Vocabulary("token")
    tok.observe("a")
    dep = build_vocab(small_corpus, "dep")
    with pytest.raises(DataError, match="unfrozen token"):
        encode_corpus(small_corpus, tok, dep, d)


def test_encoded_cache_roundtrip(tmp_path, small_corpus):
    d = parse_dictionary(MINI)
    tok = build_vocab(small_corpus, "token")
    dep = build_vocab(small_corpus, "dep")
    samples = encode_corpus(small_corpus, tok, dep, d, length=12,
                            include_total=True)
    path = tmp_path / "enc.bin"
    save_encoded(samples, path, header={"length": 12})
    loaded, header = load_encoded(path)
    assert header == {"length": 12}
    assert loaded == samples


def test_encoded_cache_detects_corruption(tmp_path, small_corpus):
    d = parse_dictionary(MINI)
    tok = build_vocab(small_corpus, "token")
    dep = build_vocab(small_corpus, "dep")
    samples = encode_corpus(small_corpus, tok, dep, d)
    path = tmp_path / "enc.bin"
    save_encoded(samples, path)
    blob = path.read_bytes()
    path.write_bytes(blob[:-10])  # truncate
    with pytest.raises(DataError, match="checksum mismatch"):
        load_encoded(path)
    flipped = bytearray(blob)
    flipped[30] ^= 0xFF
    path.write_bytes(bytes(flipped))
    with pytest.raises(DataError, match="checksum mismatch"):
        load_encoded(path)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(list(POS_TAG_ORDER[:-1])), min_size=1,
                max_size=35))
def test_aux_pos_histogram_normalized(tags):
    tokens = tuple(f"w{i}" for i in range(len(tags)))
    ann = LinguisticAnnotation(tokens, tuple(tags), ("dep",) * len(tags), tokens)
    aux = aux_vector(ann)
    assert aux[:len(POS_TAG_ORDER)].sum() == pytest.approx(1.0)
    for tag in set(tags):
        idx = POS_TAG_ORDER.index(tag)
        assert aux[idx] == pytest.approx(tags.count(tag) / len(tags))
