"""Dense feature matrices for the shallow baseline models.

Two views of an encoded story:

* text features: raw token-unigram counts over the token vocabulary
  (pad column dropped, out-of-vocabulary kept), dependency-label
  fractions over the dependency vocabulary, and the part-of-speech and
  entity histograms already carried on the sample.
* privacy-dictionary features: the per-category match fractions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import ENTITY_LABELS, POS_TAG_ORDER, StoryKind
from ..encode import PAD_ID, EncodedSample, Vocabulary
from ..errors import DataError
from ..lexicon import PrivacyDictionary


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    names: tuple[str, ...]
    ids: tuple[str, ...]

    def __post_init__(self):
        if self.X.shape != (len(self.ids), len(self.names)):
            raise DataError(
                f"feature matrix shape {self.X.shape} does not match "
                f"{len(self.ids)} ids x {len(self.names)} names"
            )

    @property
    def width(self) -> int:
        return len(self.names)


def _id_counts(ids: np.ndarray, size: int) -> np.ndarray:
    """Occurrence counts of ids 1..size-1; pad (id 0) is ignored."""
    counts = np.bincount(ids, minlength=size).astype(np.float64)
    return counts[1:]


def text_features(samples: list[EncodedSample], token_vocab: Vocabulary,
                  dep_vocab: Vocabulary) -> FeatureMatrix:
    names = (
        tuple(f"tok:{s}" for s in token_vocab.symbols()[1:])
        + tuple(f"dep:{s}" for s in dep_vocab.symbols()[1:])
        + tuple(f"pos:{t}" for t in POS_TAG_ORDER)
        + tuple(f"ent:{e}" for e in ENTITY_LABELS)
    )
    rows = []
    for sample in samples:
        tok = _id_counts(sample.token_ids, token_vocab.size)
        dep = _id_counts(sample.dep_ids, dep_vocab.size)
        n_dep = int((sample.dep_ids != PAD_ID).sum())
        if n_dep:
            dep = dep / n_dep
        rows.append(np.concatenate([tok, dep, sample.aux]))
    X = np.vstack(rows) if rows else np.zeros((0, len(names)))
    return FeatureMatrix(X, names, tuple(s.id for s in samples))


def dictionary_features(samples: list[EncodedSample],
                        dictionary: PrivacyDictionary) -> FeatureMatrix:
    names = tuple(f"pw:{c}" for c in dictionary.category_names)
    rows = []
    for sample in samples:
        if sample.lexicon.shape[0] != len(names):
            raise DataError(
                f"sample {sample.id!r} carries {sample.lexicon.shape[0]} "
                f"dictionary fractions, expected {len(names)}"
            )
        rows.append(sample.lexicon)
    X = np.vstack(rows) if rows else np.zeros((0, len(names)))
    return FeatureMatrix(X, names, tuple(s.id for s in samples))


def labels_of(samples: list[EncodedSample]) -> np.ndarray:
    return np.array([s.label for s in samples], dtype=np.float64)


def pool_labels_of(samples: list[EncodedSample]) -> np.ndarray:
    """Gold labels under the balanced protocol: 1 iff the story both
    uses dictionary words and discloses (the positive-pool kind)."""
    return np.array(
        [1.0 if s.kind is StoryKind.PW_AND_DI else 0.0 for s in samples])
