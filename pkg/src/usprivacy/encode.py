"""Turning annotated stories into fixed-shape model inputs.

Vocabularies reserve id 0 for PAD and id 1 for OOV; remaining ids are
assigned by descending frequency, ties broken lexicographically. The
token vocabulary is built over the entity-substituted stream, so entity
labels such as PERSON are ordinary vocabulary symbols.

The aux vector is the normalized POS histogram (17 universal tags plus
UNKNOWN) followed by the entity-label histogram, normalized over entity
tokens only and all-zero when a story has none.

Encoded corpora cache to a binary file of length-prefixed records:

    magic b"USPENC01" | uint32 version | uint32 record count
    | uint32 header length | header JSON
    | per record: uint32 byte length, then the payload described in
      _pack_sample (little-endian throughout)
    | uint32 crc32 of everything before it
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import (
    ENTITY_LABELS, POS_TAG_ORDER, UNKNOWN_TAG, LinguisticAnnotation,
    StoryKind, UserStory,
)
from .errors import ConfigError, DataError
from .lexicon import PrivacyDictionary, feature_vector, match_story

PAD_ID = 0
OOV_ID = 1
DEFAULT_SEQUENCE_LENGTH = 30

VOCAB_KINDS = ("token", "dep", "pos", "entity")


class Vocabulary:
    """Symbol-to-id mapping with PAD/OOV reserved and a frozen flag."""

    PAD = "<pad>"
    OOV = "<oov>"

    def __init__(self, kind: str, min_count: int = 1):
        if kind not in VOCAB_KINDS:
            raise ConfigError(f"unknown vocabulary kind {kind!r}")
        if min_count < 1:
            raise ConfigError(f"min_count must be >= 1, got {min_count}")
        self.kind = kind
        self.min_count = min_count
        self.frozen = False
        self._counts: dict[str, int] = {}
        self._ids: dict[str, int] = {}

    def observe(self, symbol: str) -> None:
        if self.frozen:
            raise DataError(f"cannot observe symbols on a frozen {self.kind} vocab")
        self._counts[symbol] = self._counts.get(symbol, 0) + 1

    def freeze(self) -> "Vocabulary":
        """Assign ids by count desc, then lexicographic; drops rare symbols."""
        if self.frozen:
            return self
        kept = [(s, c) for s, c in self._counts.items() if c >= self.min_count]
        kept.sort(key=lambda item: (-item[1], item[0]))
        self._ids = {s: i + 2 for i, (s, _) in enumerate(kept)}
        self.frozen = True
        return self

    @property
    def size(self) -> int:
        """Total id count including PAD and OOV."""
        self._require_frozen()
        return len(self._ids) + 2

    def _require_frozen(self):
        if not self.frozen:
            raise DataError(
                f"{self.kind} vocabulary is not frozen; call freeze() first"
            )

    def id_for(self, symbol: str) -> int:
        self._require_frozen()
        return self._ids.get(symbol, OOV_ID)

    def symbols(self) -> tuple[str, ...]:
        """All symbols in id order, PAD and OOV first."""
        self._require_frozen()
        ordered = sorted(self._ids.items(), key=lambda item: item[1])
        return (self.PAD, self.OOV) + tuple(s for s, _ in ordered)

    def __contains__(self, symbol: str) -> bool:
        self._require_frozen()
        return symbol in self._ids

    def save(self, path) -> None:
        self._require_frozen()
        lines = [f"# kind={self.kind} min_count={self.min_count}"]
        lines.extend(f"{s}\t{i}" for s, i in
                     sorted(self._ids.items(), key=lambda item: item[1]))
        Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"vocabulary file not found: {path}")
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith("# kind="):
            raise DataError(f"{path}:1: missing vocabulary header line")
        header = dict(
            part.split("=", 1) for part in lines[0][2:].split() if "=" in part
        )
        vocab = cls(header.get("kind", ""), int(header.get("min_count", "1")))
        ids: dict[str, int] = {}
        for lineno, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected symbol<TAB>id")
            symbol, raw_id = parts
            try:
                sid = int(raw_id)
            except ValueError:
                raise DataError(f"{path}:{lineno}: id must be an integer")
            if symbol in ids:
                raise DataError(f"{path}:{lineno}: duplicate symbol {symbol!r}")
            if sid < 2:
                raise DataError(f"{path}:{lineno}: ids below 2 are reserved")
            ids[symbol] = sid
        expected = set(range(2, len(ids) + 2))
        if set(ids.values()) != expected:
            raise DataError(f"{path}: vocabulary ids are not contiguous from 2")
        vocab._ids = ids
        vocab.frozen = True
        return vocab


def _stream(story: UserStory, kind: str) -> tuple[str, ...]:
    ann = story.annotation
    if kind == "token":
        return ann.entities
    if kind == "dep":
        return ann.dep
    if kind == "pos":
        return ann.pos
    if kind == "entity":
        return ann.entity_labels()
    raise ConfigError(f"unknown vocabulary kind {kind!r}")


def build_vocab(stories, kind: str, min_count: int = 1) -> Vocabulary:
    vocab = Vocabulary(kind, min_count)
    for story in stories:
        for symbol in _stream(story, kind):
            vocab.observe(symbol)
    return vocab.freeze()


def encode_sequence(vocab: Vocabulary, symbols,
                    length: int = DEFAULT_SEQUENCE_LENGTH) -> np.ndarray:
    """Map symbols to ids, right-pad with PAD, truncate at `length`."""
    if length < 1:
        raise ConfigError(f"sequence length must be >= 1, got {length}")
    ids = np.full(length, PAD_ID, dtype=np.int64)
    for i, symbol in enumerate(symbols):
        if i >= length:
            break
        ids[i] = vocab.id_for(symbol)
    return ids


def aux_vector(annotation: LinguisticAnnotation) -> np.ndarray:
    """Normalized POS histogram ++ normalized entity-label histogram."""
    pos_hist = np.zeros(len(POS_TAG_ORDER), dtype=np.float64)
    if len(annotation.pos) > 0:
        index = {tag: i for i, tag in enumerate(POS_TAG_ORDER)}
        for tag in annotation.pos:
            pos_hist[index.get(tag, index[UNKNOWN_TAG])] += 1
        pos_hist /= len(annotation.pos)
    ent_hist = np.zeros(len(ENTITY_LABELS), dtype=np.float64)
    labels = annotation.entity_labels()
    if labels:
        index = {label: i for i, label in enumerate(ENTITY_LABELS)}
        for label in labels:
            ent_hist[index[label]] += 1
        ent_hist /= len(labels)
    return np.concatenate([pos_hist, ent_hist])


AUX_WIDTH = len(POS_TAG_ORDER) + len(ENTITY_LABELS)

_KIND_CODES = {kind: i for i, kind in enumerate(StoryKind)}
_KIND_BY_CODE = {i: kind for kind, i in _KIND_CODES.items()}


@dataclass(frozen=True)
class EncodedSample:
    id: str
    token_ids: np.ndarray
    dep_ids: np.ndarray
    aux: np.ndarray
    lexicon: np.ndarray
    label: int
    kind: StoryKind

    def __eq__(self, other):
        return (
            isinstance(other, EncodedSample)
            and self.id == other.id
            and self.label == other.label
            and self.kind == other.kind
            and np.array_equal(self.token_ids, other.token_ids)
            and np.array_equal(self.dep_ids, other.dep_ids)
            and np.array_equal(self.aux, other.aux)
            and np.array_equal(self.lexicon, other.lexicon)
        )


def encode_story(story: UserStory, token_vocab: Vocabulary,
                 dep_vocab: Vocabulary, dictionary: PrivacyDictionary,
                 length: int = DEFAULT_SEQUENCE_LENGTH,
                 include_total: bool = False) -> EncodedSample:
    features = match_story(dictionary, story.annotation.tokens)
    return EncodedSample(
        id=story.id,
        token_ids=encode_sequence(token_vocab, _stream(story, "token"), length),
        dep_ids=encode_sequence(dep_vocab, story.annotation.dep, length),
        aux=aux_vector(story.annotation),
        lexicon=feature_vector(features, include_total),
        label=story.label,
        kind=story.kind,
    )


def encode_corpus(stories, token_vocab: Vocabulary, dep_vocab: Vocabulary,
                  dictionary: PrivacyDictionary,
                  length: int = DEFAULT_SEQUENCE_LENGTH,
                  include_total: bool = False) -> list[EncodedSample]:
    for vocab in (token_vocab, dep_vocab):
        if not vocab.frozen:
            raise DataError(
                f"cannot encode with an unfrozen {vocab.kind} vocabulary"
            )
    return [
        encode_story(s, token_vocab, dep_vocab, dictionary, length, include_total)
        for s in stories
    ]


_ENC_MAGIC = b"USPENC01"


def _pack_sample(sample: EncodedSample) -> bytes:
    sid = sample.id.encode("utf-8")
    parts = [struct.pack("<H", len(sid)), sid]
    for arr, code in ((sample.token_ids, "<%dq"), (sample.dep_ids, "<%dq")):
        parts.append(struct.pack("<I", arr.size))
        parts.append(struct.pack(code % arr.size, *arr.tolist()))
    for arr in (sample.aux, sample.lexicon):
        parts.append(struct.pack("<I", arr.size))
        parts.append(np.asarray(arr, dtype="<f8").tobytes())
    parts.append(struct.pack("<BB", sample.label, _KIND_CODES[sample.kind]))
    return b"".join(parts)


def _unpack_sample(payload: bytes) -> EncodedSample:
    off = 0
    (id_len,) = struct.unpack_from("<H", payload, off)
    off += 2
    sid = payload[off:off + id_len].decode("utf-8")
    off += id_len
    seqs = []
    for _ in range(2):
        (n,) = struct.unpack_from("<I", payload, off)
        off += 4
        seqs.append(np.frombuffer(payload, dtype="<i8", count=n, offset=off)
                    .astype(np.int64))
        off += 8 * n
    floats = []
    for _ in range(2):
        (n,) = struct.unpack_from("<I", payload, off)
        off += 4
        floats.append(np.frombuffer(payload, dtype="<f8", count=n, offset=off)
                      .astype(np.float64))
        off += 8 * n
    label, kind_code = struct.unpack_from("<BB", payload, off)
    return EncodedSample(
        id=sid, token_ids=seqs[0], dep_ids=seqs[1], aux=floats[0],
        lexicon=floats[1], label=int(label), kind=_KIND_BY_CODE[kind_code],
    )


def save_encoded(samples, path, header: dict | None = None) -> None:
    header_bytes = json.dumps(header or {}, sort_keys=True).encode("utf-8")
    blob = bytearray()
    blob += _ENC_MAGIC
    blob += struct.pack("<II", 1, len(samples))
    blob += struct.pack("<I", len(header_bytes))
    blob += header_bytes
    for sample in samples:
        payload = _pack_sample(sample)
        blob += struct.pack("<I", len(payload))
        blob += payload
    blob += struct.pack("<I", zlib.crc32(bytes(blob)))
    Path(path).write_bytes(bytes(blob))


def load_encoded(path) -> tuple[list[EncodedSample], dict]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"encoded corpus file not found: {path}")
    blob = path.read_bytes()
    if len(blob) < len(_ENC_MAGIC) + 16:
        raise DataError(f"{path}: file too short to be an encoded corpus")
    if blob[:len(_ENC_MAGIC)] != _ENC_MAGIC:
        raise DataError(f"{path}: bad magic; not an encoded corpus file")
    (stored_crc,) = struct.unpack_from("<I", blob, len(blob) - 4)
    if zlib.crc32(blob[:-4]) != stored_crc:
        raise DataError(f"{path}: checksum mismatch (truncated or corrupted file)")
    off = len(_ENC_MAGIC)
    version, count = struct.unpack_from("<II", blob, off)
    off += 8
    if version != 1:
        raise DataError(f"{path}: unsupported encoded-corpus version {version}")
    (header_len,) = struct.unpack_from("<I", blob, off)
    off += 4
    header = json.loads(blob[off:off + header_len].decode("utf-8"))
    off += header_len
    samples = []
    for _ in range(count):
        (size,) = struct.unpack_from("<I", blob, off)
        off += 4
        samples.append(_unpack_sample(blob[off:off + size]))
        off += size
    return samples, header
