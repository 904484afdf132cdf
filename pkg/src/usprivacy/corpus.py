"""User-story corpus model, serialization, and balanced fold planning.

A corpus is a list of annotated user stories. The on-disk JSONL schema is
one object per line:

    {"id": str, "dataset": int, "text": str,
     "tokens": [str], "pos": [str], "dep": [str], "entities": [str],
     "privacy_categories": [[str, int], ...], "privacy_words": [str],
     "label": 0 or 1}

The CSV variant has the same field names as header columns; list-valued
cells hold the JSON encoding of the list. A dataset manifest is a text
file of `dataset_id<TAB>description<TAB>size` lines.

The four annotation streams are parallel (one entry per token). `entities`
is the entity-substituted token stream: tokens covered by a recognized
entity are replaced by the entity label (e.g. PERSON, ORG), everything
else is the surface token.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, DataError, RunError
from .util import canonical_json, rng_for, sha256_text

# The 17 coarse universal POS tags; anything else is coerced to UNKNOWN.
UNIVERSAL_POS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)
UNKNOWN_TAG = "UNKNOWN"
POS_TAG_ORDER = UNIVERSAL_POS_TAGS + (UNKNOWN_TAG,)

# Dependency relations accepted as-is; out-of-set relations become UNKNOWN.
# This is the ClearNLP-style English label set plus ROOT.
DEFAULT_DEP_TAGS = (
    "ROOT", "acl", "acomp", "advcl", "advmod", "agent", "amod", "appos",
    "attr", "aux", "auxpass", "case", "cc", "ccomp", "compound", "conj",
    "csubj", "csubjpass", "dative", "dep", "det", "dobj", "expl", "intj",
    "mark", "meta", "neg", "nmod", "npadvmod", "nsubj", "nsubjpass",
    "nummod", "oprd", "parataxis", "pcomp", "pobj", "poss", "preconj",
    "predet", "prep", "prt", "punct", "quantmod", "relcl", "xcomp",
)
DEP_TAG_ORDER = DEFAULT_DEP_TAGS + (UNKNOWN_TAG,)

# Entity labels recognized in the substituted stream. A stream entry is
# treated as an entity exactly when it equals one of these labels.
ENTITY_LABELS = (
    "CARDINAL", "DATE", "EVENT", "FAC", "GPE", "HEALTH", "LANGUAGE", "LAW",
    "LOC", "MONEY", "NORP", "ORDINAL", "ORG", "PERCENT", "PERSON",
    "PRODUCT", "QUANTITY", "TIME", "WORK_OF_ART",
)

_JSONL_FIELDS = (
    "id", "dataset", "text", "tokens", "pos", "dep", "entities",
    "privacy_categories", "privacy_words", "label",
)


class StoryKind(Enum):
    """Joint privacy-word / disclosure-label classification of a story."""

    PW_AND_DI = "pw_and_di"
    PW_ONLY = "pw_only"
    DI_ONLY = "di_only"
    NONE = "none"


NEGATIVE_KIND_ORDER = (StoryKind.PW_ONLY, StoryKind.DI_ONLY, StoryKind.NONE)


def classify_kind(privacy_words, label: int) -> StoryKind:
    """Classify by (has privacy words, disclosure label). Total on inputs."""
    has_words = len(privacy_words) > 0
    if label not in (0, 1):
        raise DataError(f"unknown label value {label!r}")
    if has_words:
        return StoryKind.PW_AND_DI if label == 1 else StoryKind.PW_ONLY
    return StoryKind.DI_ONLY if label == 1 else StoryKind.NONE


@dataclass(frozen=True)
class TemplateParts:
    role: str
    feature: str
    reason: str | None


# Tolerates a missing comma after the role and both apostrophe styles.
_TEMPLATE_RE = re.compile(
    r"^\s*as\s+(?:a|an|the)\s+(?P<role>.+?)\s*,?\s+"
    r"(?:i\s+want(?:\s+to)?|i[’']m\s+able\s+to|i\s+am\s+able\s+to)\s+"
    r"(?P<feature>.+?)"
    r"(?:\s*,?\s+so\s+that\s+(?P<reason>.+?))?"
    r"\s*\.?\s*$",
    re.IGNORECASE,
)


def parse_template(text: str) -> TemplateParts | None:
    """Extract role/feature/reason from an agile user-story sentence.

    Returns None when the sentence does not follow the template; callers
    treat that as a value, not an error.
    """
    m = _TEMPLATE_RE.match(text)
    if m is None:
        return None
    return TemplateParts(m.group("role"), m.group("feature"), m.group("reason"))


@dataclass(frozen=True)
class LinguisticAnnotation:
    """Parallel token/POS/dep/entity streams for one story.

    POS and dep entries outside their closed sets are coerced to UNKNOWN
    at construction, so every stored annotation honors the set invariant.
    """

    tokens: tuple[str, ...]
    pos: tuple[str, ...]
    dep: tuple[str, ...]
    entities: tuple[str, ...]

    def __post_init__(self):
        n = len(self.tokens)
        for name in ("pos", "dep", "entities"):
            if len(getattr(self, name)) != n:
                raise DataError(
                    f"annotation length mismatch: {name} has "
                    f"{len(getattr(self, name))} entries, tokens has {n}"
                )
        pos = tuple(t if t in UNIVERSAL_POS_TAGS else UNKNOWN_TAG for t in self.pos)
        dep = tuple(t if t in DEFAULT_DEP_TAGS else UNKNOWN_TAG for t in self.dep)
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "dep", dep)
        object.__setattr__(self, "entities", tuple(self.entities))

    def __len__(self) -> int:
        return len(self.tokens)

    def entity_labels(self) -> tuple[str, ...]:
        """Entries of the substituted stream that are entity labels."""
        return tuple(t for t in self.entities if t in ENTITY_LABELS)


@dataclass(frozen=True)
class UserStory:
    id: str
    dataset_id: int
    text: str
    annotation: LinguisticAnnotation
    label: int
    privacy_words: tuple[str, ...] = ()
    privacy_categories: tuple[tuple[str, int], ...] = ()
    template: TemplateParts | None = None

    def __post_init__(self):
        if not self.id:
            raise DataError("story id must be non-empty")
        if self.label not in (0, 1):
            raise DataError(f"unknown label value {self.label!r} (story {self.id})")
        object.__setattr__(self, "privacy_words", tuple(self.privacy_words))
        object.__setattr__(
            self, "privacy_categories",
            tuple((str(c), int(n)) for c, n in self.privacy_categories),
        )

    @property
    def kind(self) -> StoryKind:
        return classify_kind(self.privacy_words, self.label)

    @property
    def privacy_term_count(self) -> int:
        if self.privacy_categories:
            return sum(n for _, n in self.privacy_categories)
        return len(self.privacy_words)


@dataclass(frozen=True)
class ManifestEntry:
    dataset_id: int
    description: str
    declared_size: int


@dataclass
class Corpus:
    stories: list[UserStory]
    manifest: tuple[ManifestEntry, ...] = ()

    def __post_init__(self):
        self.by_id = {}
        for s in self.stories:
            if s.id in self.by_id:
                raise DataError(f"duplicate story id {s.id!r}")
            self.by_id[s.id] = s

    def __len__(self) -> int:
        return len(self.stories)

    def __iter__(self):
        return iter(self.stories)

    def dataset_ids(self) -> tuple[int, ...]:
        return tuple(sorted({s.dataset_id for s in self.stories}))

    def content_hash(self) -> str:
        """Hash of the canonical JSONL serialization (manifest excluded)."""
        return sha256_text(dumps_jsonl(self))


def _need(record: dict, key: str, where: str):
    if key not in record:
        raise DataError(f"{where}: missing field {key!r}")
    return record[key]


def _str_list(value, key: str, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise DataError(f"{where}: field {key!r} must be a list of strings")
    return tuple(value)


def _story_from_record(record: dict, where: str) -> UserStory:
    if not isinstance(record, dict):
        raise DataError(f"{where}: record is not an object")
    sid = _need(record, "id", where)
    if not isinstance(sid, str) or not sid:
        raise DataError(f"{where}: field 'id' must be a non-empty string")
    dataset = _need(record, "dataset", where)
    if not isinstance(dataset, int) or isinstance(dataset, bool):
        raise DataError(f"{where}: field 'dataset' must be an integer")
    text = _need(record, "text", where)
    if not isinstance(text, str):
        raise DataError(f"{where}: field 'text' must be a string")
    streams = {
        key: _str_list(_need(record, key, where), key, where)
        for key in ("tokens", "pos", "dep", "entities")
    }
    label = _need(record, "label", where)
    if not isinstance(label, int) or isinstance(label, bool) or label not in (0, 1):
        raise DataError(f"{where}: unknown label value {label!r} (field 'label')")
    words = _str_list(_need(record, "privacy_words", where), "privacy_words", where)
    cats_raw = _need(record, "privacy_categories", where)
    if not isinstance(cats_raw, list):
        raise DataError(f"{where}: field 'privacy_categories' must be a list")
    cats = []
    for item in cats_raw:
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not isinstance(item[0], str)
                or not isinstance(item[1], int) or isinstance(item[1], bool)):
            raise DataError(
                f"{where}: field 'privacy_categories' entries must be "
                "[category, count] pairs"
            )
        cats.append((item[0], item[1]))
    try:
        annotation = LinguisticAnnotation(
            streams["tokens"], streams["pos"], streams["dep"], streams["entities"]
        )
    except DataError as exc:
        raise DataError(f"{where}: {exc}") from None
    return UserStory(
        id=sid, dataset_id=dataset, text=text, annotation=annotation,
        label=label, privacy_words=words, privacy_categories=tuple(cats),
        template=parse_template(text),
    )


def _story_to_record(story: UserStory) -> dict:
    return {
        "id": story.id,
        "dataset": story.dataset_id,
        "text": story.text,
        "tokens": list(story.annotation.tokens),
        "pos": list(story.annotation.pos),
        "dep": list(story.annotation.dep),
        "entities": list(story.annotation.entities),
        "privacy_categories": [[c, n] for c, n in story.privacy_categories],
        "privacy_words": list(story.privacy_words),
        "label": story.label,
    }


def load_manifest(path) -> tuple[ManifestEntry, ...]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"manifest file not found: {path}")
    entries = []
    seen = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataError(
                f"{path}:{lineno}: manifest line needs 3 tab-separated fields"
            )
        try:
            dataset_id, size = int(parts[0]), int(parts[2])
        except ValueError:
            raise DataError(f"{path}:{lineno}: dataset id and size must be integers")
        if dataset_id in seen:
            raise DataError(f"{path}:{lineno}: duplicate dataset id {dataset_id}")
        seen.add(dataset_id)
        entries.append(ManifestEntry(dataset_id, parts[1], size))
    return tuple(entries)


def _detect_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("jsonl", "csv"):
            raise ConfigError(f"unknown corpus format {fmt!r} (use jsonl or csv)")
        return fmt
    suffix = path.suffix.lower()
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise ConfigError(f"cannot infer corpus format from suffix {suffix!r}: {path}")


def load_corpus(path, fmt: str | None = None, manifest=None) -> Corpus:
    """Load and validate a corpus file; errors carry file:line positions."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"corpus file not found: {path}")
    fmt = _detect_format(path, fmt)
    stories: list[UserStory] = []
    seen_ids: set[str] = set()

    def add(record: dict, where: str):
        story = _story_from_record(record, where)
        if story.id in seen_ids:
            raise DataError(f"{where}: duplicate story id {story.id!r}")
        seen_ids.add(story.id)
        stories.append(story)

    if fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: malformed JSON: {exc.msg}")
                add(record, f"{path}:{lineno}")
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise DataError(f"{path}: empty CSV file (no header)")
            missing = [f for f in _JSONL_FIELDS if f not in reader.fieldnames]
            if missing:
                raise DataError(f"{path}: CSV header missing fields {missing}")
            for row in reader:
                where = f"{path}:{reader.line_num}"
                record = {}
                for key in _JSONL_FIELDS:
                    cell = row.get(key)
                    if cell is None:
                        raise DataError(f"{where}: missing field {key!r}")
                    if key in ("tokens", "pos", "dep", "entities",
                               "privacy_categories", "privacy_words"):
                        try:
                            record[key] = json.loads(cell)
                        except json.JSONDecodeError:
                            raise DataError(
                                f"{where}: field {key!r} is not valid JSON"
                            )
                    elif key in ("dataset", "label"):
                        try:
                            record[key] = int(cell)
                        except ValueError:
                            raise DataError(
                                f"{where}: field {key!r} must be an integer"
                            )
                    else:
                        record[key] = cell
                add(record, where)

    manifest_entries: tuple[ManifestEntry, ...] = ()
    if manifest is not None:
        manifest_entries = (manifest if isinstance(manifest, tuple)
                            else load_manifest(manifest))
        counts: dict[int, int] = {}
        for s in stories:
            counts[s.dataset_id] = counts.get(s.dataset_id, 0) + 1
        for entry in manifest_entries:
            have = counts.get(entry.dataset_id, 0)
            if have != entry.declared_size:
                raise DataError(
                    f"dataset {entry.dataset_id}: manifest declares "
                    f"{entry.declared_size} stories, corpus has {have}"
                )
    return Corpus(stories, manifest_entries)


def dumps_jsonl(corpus: Corpus) -> str:
    lines = [json.dumps(_story_to_record(s), ensure_ascii=False,
                        separators=(", ", ": ")) for s in corpus]
    return "".join(line + "\n" for line in lines)


def save_corpus(corpus: Corpus, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = _detect_format(path, fmt)
    if fmt == "jsonl":
        path.write_text(dumps_jsonl(corpus), encoding="utf-8")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_JSONL_FIELDS)
    for story in corpus:
        record = _story_to_record(story)
        row = []
        for key in _JSONL_FIELDS:
            value = record[key]
            if isinstance(value, list):
                row.append(json.dumps(value, ensure_ascii=False))
            else:
                row.append(value)
        writer.writerow(row)
    path.write_text(buf.getvalue(), encoding="utf-8")


def save_manifest(entries, path) -> None:
    lines = [f"{e.dataset_id}\t{e.description}\t{e.declared_size}" for e in entries]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@dataclass(frozen=True)
class DatasetStats:
    dataset_id: int
    size: int
    privacy_term_count: int
    kind_counts: tuple[tuple[str, int], ...]

    def kind_fraction(self, kind: StoryKind) -> Fraction:
        counts = dict(self.kind_counts)
        return Fraction(counts[kind.value], self.size)

    def fractions(self) -> dict[str, float]:
        return {k: float(Fraction(n, self.size)) for k, n in self.kind_counts}


def corpus_stats(corpus: Corpus) -> dict[int, DatasetStats]:
    """Per-dataset size, total privacy terms, and story-kind fractions."""
    if len(corpus) == 0:
        raise DataError("cannot compute statistics of an empty corpus")
    grouped: dict[int, list[UserStory]] = {}
    for story in corpus:
        grouped.setdefault(story.dataset_id, []).append(story)
    out = {}
    for dataset_id in sorted(grouped):
        stories = grouped[dataset_id]
        kind_counts = {k.value: 0 for k in StoryKind}
        terms = 0
        for s in stories:
            kind_counts[s.kind.value] += 1
            terms += s.privacy_term_count
        out[dataset_id] = DatasetStats(
            dataset_id=dataset_id,
            size=len(stories),
            privacy_term_count=terms,
            kind_counts=tuple(sorted(kind_counts.items())),
        )
    return out


@dataclass(frozen=True)
class FoldPlan:
    """Balanced repeated k-fold assignment over story ids.

    Positives are every PW_AND_DI story; an equally sized negative pool is
    drawn per repeat from the other kinds according to `negative_quotas`.
    `assignments` maps (repeat, fold) to (train ids, test ids).
    """

    seed: int
    repeats: int
    k: int
    positives: tuple[str, ...]
    negative_quotas: tuple[tuple[str, int], ...]
    assignments: dict
    notes: str = ""

    def cells(self):
        return sorted(self.assignments)

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "repeats": self.repeats,
            "k": self.k,
            "positives": list(self.positives),
            "negative_quotas": [[k, n] for k, n in self.negative_quotas],
            "assignments": {
                f"{r}-{f}": {"train": list(tr), "test": list(te)}
                for (r, f), (tr, te) in self.assignments.items()
            },
            "notes": self.notes,
        }
        return canonical_json(payload)

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        payload = json.loads(text)
        assignments = {}
        for key, cell in payload["assignments"].items():
            r, f = key.split("-")
            assignments[(int(r), int(f))] = (
                tuple(cell["train"]), tuple(cell["test"])
            )
        return cls(
            seed=payload["seed"], repeats=payload["repeats"], k=payload["k"],
            positives=tuple(payload["positives"]),
            negative_quotas=tuple((k, n) for k, n in payload["negative_quotas"]),
            assignments=assignments, notes=payload.get("notes", ""),
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "FoldPlan":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"fold plan file not found: {path}")
        return cls.from_json(path.read_text(encoding="utf-8"))


def _largest_remainder_quotas(n_pos: int, pools: dict) -> dict:
    """Allocate n_pos negatives across kinds proportionally to pool sizes."""
    total = sum(len(p) for p in pools.values())
    shares = {
        kind: Fraction(n_pos * len(pool), total) for kind, pool in pools.items()
    }
    quotas = {kind: int(share) for kind, share in shares.items()}
    short = n_pos - sum(quotas.values())
    # Ties on the fractional remainder resolve in NEGATIVE_KIND_ORDER.
    order = sorted(
        NEGATIVE_KIND_ORDER,
        key=lambda kind: (-(shares[kind] - quotas[kind]),
                          NEGATIVE_KIND_ORDER.index(kind)),
    )
    for kind in order[:short]:
        quotas[kind] += 1
    return quotas


def plan_balanced_split(corpus: Corpus, seed: int, repeats: int, k: int,
                        negative_quotas: dict | None = None) -> FoldPlan:
    """Plan repeats x k balanced folds over the corpus.

    Every repeat re-samples the negative pool with sub-seed
    splitmix64(seed ^ repeat) and re-partitions both pools into k folds
    whose sizes differ by at most one and which are balanced per fold.
    """
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    pools: dict[StoryKind, list[str]] = {kind: [] for kind in StoryKind}
    for story in corpus:
        pools[story.kind].append(story.id)
    positives = pools[StoryKind.PW_AND_DI]
    n_pos = len(positives)
    if n_pos == 0:
        raise RunError("balanced split needs at least one PW_AND_DI story")
    if k > n_pos:
        raise RunError(f"k={k} exceeds the {n_pos} available positive stories")
    neg_pools = {kind: pools[kind] for kind in NEGATIVE_KIND_ORDER}
    available = sum(len(p) for p in neg_pools.values())
    if available < n_pos:
        raise RunError(
            f"insufficient negatives for a balanced pool: need {n_pos}, "
            f"have {available} (shortfall {n_pos - available})"
        )

    if negative_quotas is None:
        quotas = _largest_remainder_quotas(n_pos, neg_pools)
    else:
        quotas = {}
        for kind in NEGATIVE_KIND_ORDER:
            quotas[kind] = int(negative_quotas.get(kind.value, 0))
        if any(n < 0 for n in quotas.values()):
            raise ConfigError("negative quotas must be non-negative")
        if sum(quotas.values()) != n_pos:
            raise ConfigError(
                f"negative quotas sum to {sum(quotas.values())}, need {n_pos}"
            )
        for kind, quota in quotas.items():
            if quota > len(neg_pools[kind]):
                raise RunError(
                    f"quota {quota} for {kind.value} exceeds pool size "
                    f"{len(neg_pools[kind])}"
                )

    sizes = [n_pos // k + (1 if i < n_pos % k else 0) for i in range(k)]
    assignments = {}
    for r in range(repeats):
        rng = rng_for(seed ^ r)
        negatives: list[str] = []
        for kind in NEGATIVE_KIND_ORDER:
            pool = neg_pools[kind]
            quota = quotas[kind]
            if quota == 0:
                continue
            picked = rng.choice(len(pool), size=quota, replace=False)
            negatives.extend(pool[i] for i in picked)
        pos_order = [positives[i] for i in rng.permutation(n_pos)]
        neg_order = [negatives[i] for i in rng.permutation(n_pos)]
        start = 0
        chunks = []
        for size in sizes:
            chunks.append((pos_order[start:start + size],
                           neg_order[start:start + size]))
            start += size
        for f in range(k):
            test = tuple(chunks[f][0] + chunks[f][1])
            train = tuple(
                sid for g in range(k) if g != f
                for sid in chunks[g][0] + chunks[g][1]
            )
            assignments[(r, f)] = (train, test)

    quota_note = ", ".join(
        f"{kind.value}={quotas[kind]}/{len(neg_pools[kind])}"
        for kind in NEGATIVE_KIND_ORDER
    )
    notes = (
        f"positives={n_pos}; negatives per repeat: {quota_note}; "
        f"fold sizes per class: {sizes}"
    )
    return FoldPlan(
        seed=seed, repeats=repeats, k=k, positives=tuple(positives),
        negative_quotas=tuple((kind.value, quotas[kind])
                              for kind in NEGATIVE_KIND_ORDER),
        assignments=assignments, notes=notes,
    )
