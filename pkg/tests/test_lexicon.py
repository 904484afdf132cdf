"""Privacy dictionary parsing and matching, checked against a brute oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usprivacy.errors import ConfigError, DataError
from usprivacy.lexicon import (
    DictionaryCategory, Pattern, PrivacyDictionary, aggregate_counts,
    dumps_dictionary, feature_vector, load_dictionary, match_story,
    parse_dictionary,
)

from conftest import DATA


def brute_force_counts(dictionary, tokens):
    """Oracle: double loop over tokens and patterns, set per category."""
    counts = [0] * len(dictionary.categories)
    for token in tokens:
        low = token.lower()
        for ci, cat in enumerate(dictionary.categories):
            hit = False
            for pat in cat.patterns:
                if pat.wildcard:
                    if low.startswith(pat.stem):
                        hit = True
                else:
                    if low == pat.stem:
                        hit = True
            if hit:
                counts[ci] += 1
    return counts


MINI = """\
version: test
[OpenVisible] open and public access to people
access*
share*
[PrivateSecret] information kept private
data
secret*
"""


# ---------------------------------------------------------------- parsing

def test_parse_mini_dictionary():
    d = parse_dictionary(MINI)
    assert d.version == "test"
    assert d.category_names == ("OpenVisible", "PrivateSecret")
    assert d.pattern_count == 4
    assert d.categories[0].description == "open and public access to people"


def test_seed_dictionary_shape(seed_dictionary):
    assert len(seed_dictionary.categories) == 8
    assert seed_dictionary.version == "0.1-seed"
    assert 100 <= seed_dictionary.pattern_count <= 160
    names = seed_dictionary.category_names
    assert "OpenVisible" in names and "PrivateSecret" in names
    by_name = {c.name: c for c in seed_dictionary.categories}
    assert by_name["OpenVisible"].description == "open and public access to people"


@pytest.mark.parametrize("text,message", [
    ("access*\n", "before any category"),
    ("[Bad header\naccess*\n", "unknown section header"),
    ("[A] words\naccess*\naccess*\n", "duplicate pattern"),
    ("[A] words\n[B] words\nx\n", "has no patterns"),
    ("", "no categories"),
    ("[A] words\nx\nversion: 1\n", "must precede"),
    ("[A] words\nbad pattern\n", "bad pattern"),
    ("[A] words\nin*side\n", "bad pattern"),
])
def test_parse_errors(text, message):
    with pytest.raises(DataError, match=message):
        parse_dictionary(text)


def test_load_dictionary_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_dictionary(tmp_path / "nope.txt")


def test_dictionary_roundtrip(tmp_path, seed_dictionary):
    text = dumps_dictionary(seed_dictionary)
    again = parse_dictionary(text)
    assert again == seed_dictionary
    assert dumps_dictionary(again) == text


def test_duplicate_category_rejected():
    with pytest.raises(DataError, match="duplicate category"):
        parse_dictionary("[A] one\nx\n[A] two\ny\n")


# ---------------------------------------------------------------- matching

def test_match_site_member_story(site_member_story):
    d = parse_dictionary(MINI)
    feats = match_story(d, site_member_story.annotation.tokens)
    assert feats.token_count == 24
    assert feats.counts == (2, 0)  # access + share, both OpenVisible
    assert feats.matched == (("access", "OpenVisible"), ("share", "OpenVisible"))
    assert feats.matched_words() == ("access", "share")
    np.testing.assert_allclose(feats.fractions(), [2 / 24, 0.0])


def test_match_seed_dictionary_fixture_words(seed_dictionary, site_member_story,
                                             small_corpus):
    # Pinned behaviour: the fixtures' annotated privacy words are exactly
    # what the seed dictionary finds, and nothing else matches.
    feats = match_story(seed_dictionary, site_member_story.annotation.tokens)
    assert feats.matched_words() == ("access", "share")
    assert aggregate_counts(feats, seed_dictionary) == (("OpenVisible", 2),)
    for story in small_corpus:
        feats = match_story(seed_dictionary, story.annotation.tokens)
        assert feats.matched_words() == story.privacy_words
        assert aggregate_counts(feats, seed_dictionary) == story.privacy_categories


def test_match_is_case_insensitive():
    d = parse_dictionary(MINI)
    feats = match_story(d, ["DATA", "Secrets", "SHARED"])
    assert feats.counts == (1, 2)


def test_wildcard_is_prefix_only():
    d = parse_dictionary("[A] words\nport\naccess*\n")
    assert match_story(d, ["portfolio"]).counts == (0,)
    assert match_story(d, ["port"]).counts == (1,)
    assert match_story(d, ["accessible"]).counts == (1,)
    assert match_story(d, ["reaccess"]).counts == (0,)


def test_match_counts_once_per_token_and_category():
    # One token matching two patterns of one category counts once there;
    # membership in two categories counts once in each.
    d = parse_dictionary("[A] a\nconsent*\nconsen*\n[B] b\nconsent*\n")
    feats = match_story(d, ["consent"])
    assert feats.counts == (1, 1)
    assert feats.total_matches == 2


def test_empty_story_fractions():
    d = parse_dictionary(MINI)
    feats = match_story(d, [])
    assert feats.token_count == 0
    np.testing.assert_array_equal(feats.fractions(), [0.0, 0.0])
    np.testing.assert_array_equal(feature_vector(feats, include_total=True),
                                  [0.0, 0.0, 0.0])


def test_feature_vector_total():
    d = parse_dictionary(MINI)
    feats = match_story(d, ["share", "data", "plan", "plan"])
    vec = feature_vector(feats, include_total=True)
    np.testing.assert_allclose(vec, [0.25, 0.25, 0.5])
    assert feature_vector(feats).shape == (2,)


# ------------------------------------------------------------- properties

_TOKENS = st.lists(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=10),
    min_size=0, max_size=40,
)


@settings(max_examples=200, deadline=None)
@given(tokens=_TOKENS, data=st.data())
def test_match_equals_brute_force(tokens, data, seed_dictionary):
    # Mix plain tokens with tokens derived from real dictionary stems so
    # matches actually occur.
    stems = [str(p) for c in seed_dictionary.categories for p in c.patterns]
    extra = data.draw(st.lists(st.sampled_from(stems), max_size=8))
    tokens = tokens + [s.rstrip("*") + suffix
                       for s, suffix in zip(extra, ["", "x", "ing", "s"] * 2)]
    feats = match_story(seed_dictionary, tokens)
    assert list(feats.counts) == brute_force_counts(seed_dictionary, tokens)


@given(tokens=_TOKENS)
def test_match_monotone_in_matching_token(tokens, seed_dictionary):
    before = match_story(seed_dictionary, tokens)
    after = match_story(seed_dictionary, tokens + ["password"])
    idx = seed_dictionary.category_names.index("PrivateSecret")
    assert after.counts[idx] == before.counts[idx] + 1


@given(tokens=_TOKENS.filter(lambda t: len(t) > 0), reps=st.integers(2, 4))
def test_fractions_scale_free(tokens, reps, seed_dictionary):
    # Duplicating the token stream leaves every fraction exactly unchanged.
    one = match_story(seed_dictionary, tokens).fractions()
    many = match_story(seed_dictionary, tokens * reps).fractions()
    assert np.max(np.abs(one - many)) <= 1e-12
