"""Privacy dictionary: file format, matching, and per-story features.

Dictionary text format:

    # comment lines and blank lines are ignored
    version: 0.1
    [CategoryName] one-line description
    pattern
    stem*

A pattern is a lowercase word matched against whole tokens; a trailing
`*` makes it a prefix wildcard (`stem*` matches any token starting with
`stem`). The optional version line must precede the first category.

Matching is case-insensitive and counts once per (token occurrence,
category): a token matching two patterns of one category counts once
there, a token matching two categories counts once in each.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

_HEADER_RE = re.compile(r"^\[([A-Za-z][A-Za-z0-9_]*)\]\s+(\S.*)$")


@dataclass(frozen=True)
class Pattern:
    stem: str
    wildcard: bool

    def matches(self, token: str) -> bool:
        # Caller lowercases the token.
        if self.wildcard:
            return token.startswith(self.stem)
        return token == self.stem

    def __str__(self) -> str:
        return self.stem + ("*" if self.wildcard else "")


@dataclass(frozen=True)
class DictionaryCategory:
    name: str
    description: str
    patterns: tuple[Pattern, ...]


@dataclass(frozen=True)
class PrivacyDictionary:
    categories: tuple[DictionaryCategory, ...]
    version: str | None = None

    def __post_init__(self):
        if not self.categories:
            raise DataError("privacy dictionary has no categories")
        exact: dict[str, list[int]] = {}
        wild: dict[str, list[tuple[str, int]]] = {}
        for idx, cat in enumerate(self.categories):
            if not cat.patterns:
                raise DataError(f"category {cat.name!r} has no patterns")
            for pat in cat.patterns:
                if pat.wildcard:
                    wild.setdefault(pat.stem[0], []).append((pat.stem, idx))
                else:
                    exact.setdefault(pat.stem, []).append(idx)
        object.__setattr__(self, "_exact", exact)
        object.__setattr__(self, "_wild", wild)

    @property
    def category_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.categories)

    @property
    def pattern_count(self) -> int:
        return sum(len(c.patterns) for c in self.categories)

    def categories_for(self, token: str) -> tuple[int, ...]:
        """Sorted indices of categories the lowercased token matches."""
        token = token.lower()
        hits = set(self._exact.get(token, ()))
        if token:
            for stem, idx in self._wild.get(token[0], ()):
                if token.startswith(stem):
                    hits.add(idx)
        return tuple(sorted(hits))


def _parse_pattern(raw: str, where: str) -> Pattern:
    wildcard = raw.endswith("*")
    stem = raw[:-1] if wildcard else raw
    if not stem or "*" in stem or any(ch.isspace() for ch in stem):
        raise DataError(f"{where}: bad pattern {raw!r}")
    return Pattern(stem.lower(), wildcard)


def parse_dictionary(text: str, source: str = "<string>") -> PrivacyDictionary:
    version: str | None = None
    categories: list[DictionaryCategory] = []
    current: tuple[str, str, list[Pattern]] | None = None
    seen: set[tuple[str, str]] = set()

    def close_current():
        if current is not None:
            name, description, patterns = current
            categories.append(
                DictionaryCategory(name, description, tuple(patterns))
            )

    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        where = f"{source}:{lineno}"
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            m = _HEADER_RE.match(line)
            if m is None:
                raise DataError(f"{where}: unknown section header {line!r}")
            close_current()
            name = m.group(1)
            if any(c.name == name for c in categories):
                raise DataError(f"{where}: duplicate category {name!r}")
            current = (name, m.group(2).strip(), [])
            continue
        if line.lower().startswith("version:"):
            if current is not None or categories:
                raise DataError(
                    f"{where}: version line must precede the first category"
                )
            version = line.split(":", 1)[1].strip()
            continue
        if current is None:
            raise DataError(f"{where}: pattern {line!r} appears before any category")
        pattern = _parse_pattern(line, where)
        key = (current[0], str(pattern))
        if key in seen:
            raise DataError(
                f"{where}: duplicate pattern {pattern} in category {current[0]!r}"
            )
        seen.add(key)
        current[2].append(pattern)
    close_current()
    if not categories:
        raise DataError(f"{source}: privacy dictionary has no categories")
    return PrivacyDictionary(tuple(categories), version)


def load_dictionary(path) -> PrivacyDictionary:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"dictionary file not found: {path}")
    return parse_dictionary(path.read_text(encoding="utf-8"), str(path))


def dumps_dictionary(dictionary: PrivacyDictionary) -> str:
    lines = []
    if dictionary.version is not None:
        lines.append(f"version: {dictionary.version}")
        lines.append("")
    for cat in dictionary.categories:
        lines.append(f"[{cat.name}] {cat.description}")
        lines.extend(str(p) for p in cat.patterns)
        lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


def save_dictionary(dictionary: PrivacyDictionary, path) -> None:
    Path(path).write_text(dumps_dictionary(dictionary), encoding="utf-8")


def seed_dictionary_path() -> Path:
    return Path(__file__).parent / "data" / "seed_dictionary.txt"


def load_seed_dictionary() -> PrivacyDictionary:
    return load_dictionary(seed_dictionary_path())


@dataclass(frozen=True)
class LexiconFeatures:
    """Per-category match counts for one token stream.

    `matched` holds (lowercased token, category name) pairs in token
    order; `counts` aligns with the dictionary's category order.
    """

    counts: tuple[int, ...]
    token_count: int
    matched: tuple[tuple[str, str], ...]

    @property
    def total_matches(self) -> int:
        return sum(self.counts)

    def fractions(self) -> np.ndarray:
        """Per-category share of the story's tokens."""
        if self.token_count == 0:
            return np.zeros(len(self.counts), dtype=np.float64)
        return np.asarray(self.counts, dtype=np.float64) / self.token_count

    def matched_words(self) -> tuple[str, ...]:
        """Unique matched tokens in first-occurrence order."""
        seen = []
        for token, _ in self.matched:
            if token not in seen:
                seen.append(token)
        return tuple(seen)


def match_story(dictionary: PrivacyDictionary, tokens) -> LexiconFeatures:
    counts = [0] * len(dictionary.categories)
    matched = []
    for token in tokens:
        low = token.lower()
        for idx in dictionary.categories_for(low):
            counts[idx] += 1
            matched.append((low, dictionary.categories[idx].name))
    return LexiconFeatures(tuple(counts), len(tokens), tuple(matched))


def feature_vector(features: LexiconFeatures,
                   include_total: bool = False) -> np.ndarray:
    """Category fractions, optionally with total_matches/token_count last."""
    vec = features.fractions()
    if include_total:
        total = (features.total_matches / features.token_count
                 if features.token_count else 0.0)
        vec = np.concatenate([vec, [total]])
    return vec


def aggregate_counts(features: LexiconFeatures,
                     dictionary: PrivacyDictionary) -> tuple[tuple[str, int], ...]:
    """Nonzero (category, count) pairs in dictionary category order."""
    return tuple(
        (dictionary.categories[i].name, n)
        for i, n in enumerate(features.counts) if n > 0
    )
