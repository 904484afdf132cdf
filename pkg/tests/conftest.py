"""Shared fixtures and story builders for the test suite."""

from pathlib import Path

import pytest

from usprivacy.corpus import Corpus, LinguisticAnnotation, UserStory, load_corpus
from usprivacy.lexicon import load_seed_dictionary

DATA = Path(__file__).parent / "data"


def make_story(sid="s1", dataset=1, label=0, words=(), tokens=None, pos=None,
               dep=None, entities=None, categories=None, text=None):
    """A minimal valid story; annotation defaults to a 3-token stub."""
    tokens = list(tokens if tokens is not None else ["update", "the", "board"])
    n = len(tokens)
    pos = list(pos if pos is not None else (["VERB", "DET", "NOUN"] * n)[:n])
    dep = list(dep if dep is not None else (["ROOT", "det", "dobj"] * n)[:n])
    entities = list(entities if entities is not None else tokens)
    words = tuple(words)
    if categories is None:
        categories = (("PrivateSecret", len(words)),) if words else ()
    return UserStory(
        id=sid, dataset_id=dataset,
        text=text or " ".join(tokens),
        annotation=LinguisticAnnotation(tokens, pos, dep, entities),
        label=label, privacy_words=words, privacy_categories=categories,
    )


def make_pool_corpus(n_pos, n_pw_only, n_di_only, n_none, dataset=1):
    """Corpus with the requested story-kind counts."""
    stories = []
    specs = [
        ("pos", n_pos, ("data",), 1),
        ("pw", n_pw_only, ("data",), 0),
        ("di", n_di_only, (), 1),
        ("no", n_none, (), 0),
    ]
    for prefix, count, words, label in specs:
        for i in range(count):
            stories.append(make_story(
                sid=f"{prefix}-{i:04d}", dataset=dataset,
                label=label, words=words,
            ))
    return Corpus(stories)


@pytest.fixture(scope="session")
def small_corpus():
    return load_corpus(DATA / "stories_small.jsonl")


@pytest.fixture(scope="session")
def site_member_story():
    return load_corpus(DATA / "story_site_member.jsonl").stories[0]


@pytest.fixture(scope="session")
def seed_dictionary():
    return load_seed_dictionary()
