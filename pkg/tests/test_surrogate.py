"""The generated corpus must hit its composition exactly and stay
internally consistent, since the whole evaluation protocol sits on it."""

from collections import Counter
from fractions import Fraction

import pytest

from usprivacy.corpus import StoryKind, classify_kind, parse_template
from usprivacy.errors import ConfigError
from usprivacy.lexicon import (aggregate_counts, load_seed_dictionary,
                               match_story)
from usprivacy.surrogate import RECIPES, generate_surrogate, recipe_counts


@pytest.fixture(scope="module")
def corpus():
    return generate_surrogate(2000, seed=11)


class TestComposition:
    def test_recipe_weights_sum_to_one(self):
        assert sum(r.weight for r in RECIPES) == Fraction(1)

    def test_counts_sum_to_n(self):
        for n in (11, 40, 383, 2000, 2001):
            assert sum(recipe_counts(n).values()) == n

    def test_reference_counts_at_2000(self):
        counts = recipe_counts(2000)
        assert counts["strong"] == 250
        assert counts["conjunctive"] == 275
        assert counts["pw_bare_sensitive"] == 35
        assert counts["di_only"] == 250
        assert counts["none_plain"] == 370
        assert counts["none_possessive"] == 375
        assert (counts["strong"] + counts["possessive_only"]
                + counts["conjunctive"]) == 750

    def test_kind_mix(self, corpus):
        kinds = Counter(s.kind for s in corpus.stories)
        assert kinds[StoryKind.PW_AND_DI] == 750
        assert kinds[StoryKind.PW_ONLY] == 255
        assert kinds[StoryKind.DI_ONLY] == 250
        assert kinds[StoryKind.NONE] == 745

    def test_labels_balanced(self, corpus):
        labels = Counter(s.label for s in corpus.stories)
        assert labels[1] == 1000 and labels[0] == 1000

    def test_too_small_rejected(self):
        with pytest.raises(ConfigError, match="at least"):
            generate_surrogate(5, seed=0)


class TestConsistency:
    def test_deterministic(self, corpus):
        again = generate_surrogate(2000, seed=11)
        assert corpus.content_hash() == again.content_hash()

    def test_seed_changes_content(self, corpus):
        other = generate_surrogate(2000, seed=12)
        assert corpus.content_hash() != other.content_hash()

    def test_stored_words_match_recomputation(self, corpus):
        dictionary = load_seed_dictionary()
        for story in corpus.stories[::37]:
            features = match_story(dictionary, story.annotation.tokens)
            assert story.privacy_words == features.matched_words()
            assert story.privacy_categories == aggregate_counts(features,
                                                                dictionary)
            assert classify_kind(story.privacy_words,
                                 story.label) is story.kind

    def test_every_text_parses_as_template(self, corpus):
        for story in corpus.stories:
            assert parse_template(story.text) is not None

    def test_annotation_streams_aligned(self, corpus):
        for story in corpus.stories[::53]:
            ann = story.annotation
            assert (len(ann.tokens) == len(ann.pos) == len(ann.dep)
                    == len(ann.entities))
            assert 0 < len(ann.tokens) <= 30

    def test_person_substitution(self, corpus):
        for story in corpus.stories[::41]:
            ann = story.annotation
            for tok, ent in zip(ann.tokens, ann.entities):
                if tok == "I":
                    assert ent == "PERSON"

    def test_ids_unique_and_datasets_covered(self, corpus):
        ids = [s.id for s in corpus.stories]
        assert len(set(ids)) == len(ids)
        assert {s.dataset_id for s in corpus.stories} == {1, 2, 3, 4}
