"""The three detector pipelines and how they fit together.

* text pipeline: token and dependency convolution branches plus the
  part-of-speech/entity histogram vector, joined at a flatten node
  named "nlp_flatten" that doubles as the transfer truncation point.
* dictionary pipeline: a dense stack over the eight per-category match
  fractions, its first hidden layer flattened at "pw_flatten".
* transfer pipeline: the pretrained text pipeline cut at "nlp_flatten"
  and frozen, concatenated with a freshly initialized dictionary branch
  and a new classifier head.

Pretraining persists four artifacts in a directory: net.ckpt,
token.vocab, dep.vocab, and manifest.json; identical seeds and corpus
reproduce them byte for byte.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .encode import (AUX_WIDTH, DEFAULT_SEQUENCE_LENGTH, EncodedSample,
                     Vocabulary, build_vocab, encode_corpus)
from .errors import ConfigError, DataError, RunError
from .lexicon import PrivacyDictionary
from .neuralkit import (Concatenate, Conv1D, Dense, Dropout, Embedding,
                        Flatten, GlobalMaxPool1D, Network, TrainConfig,
                        train_network)
from .util import canonical_json, rng_for, sha256_text

TRUNCATION_LAYER = "nlp_flatten"
LEXICON_WIDTH = 8

_INT_FIELDS = ("embedding_dim", "filters", "kernel_width", "dense_width",
               "pw_dense_width", "sequence_length", "min_count", "epochs",
               "batch_size", "patience")
_FLOAT_FIELDS = ("dropout", "lr", "val_fraction")


@dataclass(frozen=True)
class PipelineConfig:
    embedding_dim: int = 64
    filters: int = 128
    kernel_width: int = 5
    dense_width: int = 64
    pw_dense_width: int = 16
    dropout: float = 0.5
    sequence_length: int = DEFAULT_SEQUENCE_LENGTH
    min_count: int = 1
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    patience: int = 5
    val_fraction: float = 0.1

    def __post_init__(self):
        for name in _INT_FIELDS:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if self.lr <= 0:
            raise ConfigError("lr must be > 0")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in [0, 1)")
        if self.sequence_length < self.kernel_width:
            raise ConfigError(
                f"sequence_length {self.sequence_length} is shorter than "
                f"kernel_width {self.kernel_width}"
            )

    @property
    def config_hash(self) -> str:
        return sha256_text(canonical_json(asdict(self)))

    def to_train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           lr=self.lr, patience=self.patience,
                           val_fraction=self.val_fraction, seed=seed)


def load_config(path) -> PipelineConfig:
    """Reads a [pipeline] section; absent keys keep their defaults."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(path.read_text(encoding="utf-8"))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not parser.has_section("pipeline"):
        raise ConfigError(f"{path}: missing [pipeline] section")
    known = {f.name for f in fields(PipelineConfig)}
    overrides = {}
    for key, raw in parser.items("pipeline"):
        if key not in known:
            raise ConfigError(f"{path}: unknown pipeline option {key!r}")
        caster = int if key in _INT_FIELDS else float
        try:
            overrides[key] = caster(raw)
        except ValueError:
            raise ConfigError(
                f"{path}: option {key!r} needs a {caster.__name__}, "
                f"got {raw!r}"
            ) from None
    try:
        return replace(PipelineConfig(), **overrides)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def save_config(config: PipelineConfig, path) -> None:
    parser = configparser.ConfigParser()
    parser["pipeline"] = {
        key: repr(value) if isinstance(value, float) else str(value)
        for key, value in asdict(config).items()
    }
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def default_config_path() -> Path:
    return Path(__file__).parent / "configs" / "default.cfg"


def desk_config_path() -> Path:
    return Path(__file__).parent / "configs" / "desk.cfg"


# -- network builders ---------------------------------------------------------


def build_cnn_nlp(token_vocab_size: int, dep_vocab_size: int,
                  config: PipelineConfig, seed: int) -> Network:
    """Two convolution branches over token and dependency sequences,
    concatenated with the histogram vector at "nlp_flatten"."""
    if token_vocab_size < 2 or dep_vocab_size < 2:
        raise ConfigError("vocabulary sizes must be >= 2 (pad and oov)")
    e, f, w = config.embedding_dim, config.filters, config.kernel_width
    length = config.sequence_length
    net = Network("cnn_nlp", seed)
    net.add_input("tokens", (length,), dtype="int")
    net.add_input("deps", (length,), dtype="int")
    net.add_input("aux", (AUX_WIDTH,))
    net.add("tok_emb", Embedding(token_vocab_size, e), "tokens")
    net.add("tok_conv", Conv1D(e, f, w), "tok_emb")
    net.add("tok_pool", GlobalMaxPool1D(), "tok_conv")
    net.add("tok_flat", Flatten(), "tok_pool")
    net.add("dep_emb", Embedding(dep_vocab_size, e), "deps")
    net.add("dep_conv", Conv1D(e, f, w), "dep_emb")
    net.add("dep_pool", GlobalMaxPool1D(), "dep_conv")
    net.add("dep_flat", Flatten(), "dep_pool")
    net.add("nlp_merge", Concatenate(), ("tok_flat", "dep_flat"))
    net.add("nlp_all", Concatenate(), ("nlp_merge", "aux"))
    net.add(TRUNCATION_LAYER, Flatten(), "nlp_all")
    net.add("nlp_dense", Dense(2 * f + AUX_WIDTH, config.dense_width, "relu"),
            TRUNCATION_LAYER)
    net.add("nlp_drop", Dropout(config.dropout), "nlp_dense")
    net.add("nlp_head", Dense(config.dense_width, 1, "sigmoid"), "nlp_drop")
    return net.finalize()


def build_cnn_pw(config: PipelineConfig, seed: int,
                 lexicon_width: int = LEXICON_WIDTH) -> Network:
    """Dense stack over the dictionary match fractions; "pw_flatten"
    marks the end of the reusable branch."""
    net = Network("cnn_pw", seed)
    net.add_input("lexicon", (lexicon_width,))
    net.add("pw_dense", Dense(lexicon_width, config.pw_dense_width, "relu"),
            "lexicon")
    net.add("pw_flatten", Flatten(), "pw_dense")
    net.add("pw_hidden", Dense(config.pw_dense_width, config.dense_width,
                               "relu"), "pw_flatten")
    net.add("pw_drop", Dropout(config.dropout), "pw_hidden")
    net.add("pw_head", Dense(config.dense_width, 1, "sigmoid"), "pw_drop")
    return net.finalize()


def _add_transfer_head(net: Network, trunk_out: str, trunk_width: int,
                       config: PipelineConfig, lexicon_width: int) -> Network:
    net.add("pw_dense", Dense(lexicon_width, config.pw_dense_width, "relu"),
            "lexicon")
    net.add("pw_flatten", Flatten(), "pw_dense")
    net.add("tl_merge", Concatenate(), (trunk_out, "pw_flatten"))
    net.add("tl_dense", Dense(trunk_width + config.pw_dense_width,
                              config.dense_width, "relu"), "tl_merge")
    net.add("tl_drop", Dropout(config.dropout), "tl_dense")
    net.add("tl_head", Dense(config.dense_width, 1, "sigmoid"), "tl_drop")
    return net.finalize()


def build_pd_tl(pretrained: Network, config: PipelineConfig, seed: int,
                lexicon_width: int = LEXICON_WIDTH) -> Network:
    """Transfer network: the pretrained text branches up to the
    truncation point, frozen and shared by reference, plus a fresh
    dictionary branch and classifier head."""
    if TRUNCATION_LAYER not in pretrained.nodes:
        raise ConfigError(
            f"pretrained network has no {TRUNCATION_LAYER!r} node"
        )
    trunk = pretrained.truncate_after(TRUNCATION_LAYER)
    trunk_width = trunk.nodes[TRUNCATION_LAYER].shape[0]
    net = Network("pd_tl", seed)
    for name, spec in trunk.inputs.items():
        net.add_input(name, spec.shape, spec.dtype)
    net.add_input("lexicon", (lexicon_width,))
    for name in trunk.order:
        node = trunk.nodes[name]
        net.add(name, node.layer, node.inputs)
    _add_transfer_head(net, TRUNCATION_LAYER, trunk_width, config,
                       lexicon_width)
    net.freeze(*trunk.order)
    return net


def build_pd_tl_head(trunk_width: int, config: PipelineConfig, seed: int,
                     lexicon_width: int = LEXICON_WIDTH) -> Network:
    """Head-only twin of the transfer network over precomputed trunk
    activations. Because the trunk is frozen and holds no dropout, a
    head fed trunk outputs trains bit-identically to the full network:
    same seed, same initialization draws, same dropout stream.
    """
    net = Network("pd_tl_head", seed)
    net.add_input(TRUNCATION_LAYER, (trunk_width,))
    net.add_input("lexicon", (lexicon_width,))
    return _add_transfer_head(net, TRUNCATION_LAYER, trunk_width, config,
                              lexicon_width)


# -- batches -------------------------------------------------------------------


def batch_of(samples: list[EncodedSample]) -> dict[str, np.ndarray]:
    """All four model inputs stacked; networks read the keys they need."""
    if not samples:
        raise DataError("cannot build a batch from zero samples")
    return {
        "tokens": np.stack([s.token_ids for s in samples]),
        "deps": np.stack([s.dep_ids for s in samples]),
        "aux": np.stack([s.aux for s in samples]),
        "lexicon": np.stack([s.lexicon for s in samples]),
    }


# -- pretraining ----------------------------------------------------------------

PRETRAIN_FILES = ("net.ckpt", "token.vocab", "dep.vocab", "manifest.json")


@dataclass(frozen=True)
class PretrainedBundle:
    net: Network
    token_vocab: Vocabulary
    dep_vocab: Vocabulary
    config: PipelineConfig
    manifest: dict


def pretrain(corpus: Corpus, dictionary: PrivacyDictionary,
             config: PipelineConfig, seed: int, out_dir,
             allow_small: bool = False) -> dict:
    """Trains the text pipeline on raw disclosure labels and saves it.

    A tenth of the stories is held out (before the training loop's own
    validation split) purely to report an honest accuracy figure in
    the manifest.
    """
    stories = list(corpus.stories)
    if len(stories) < 200 and not allow_small:
        raise RunError(
            f"pretraining needs at least 200 stories, got {len(stories)} "
            "(allow_small overrides)"
        )
    token_vocab = build_vocab(stories, "token", config.min_count)
    dep_vocab = build_vocab(stories, "dep", config.min_count)
    samples = encode_corpus(stories, token_vocab, dep_vocab, dictionary,
                            config.sequence_length)
    batch = batch_of(samples)
    y = np.array([s.label for s in samples], dtype=np.float64)

    perm = rng_for(seed, "holdout").permutation(len(samples))
    n_hold = max(1, round(0.1 * len(samples)))
    if n_hold >= len(samples):
        raise RunError("corpus too small to hold out a tenth")
    hold_idx, train_idx = perm[:n_hold], perm[n_hold:]

    net = build_cnn_nlp(token_vocab.size, dep_vocab.size, config, seed)
    result = train_network(
        net, {k: v[train_idx] for k, v in batch.items()}, y[train_idx],
        config.to_train_config(seed))
    p = net.predict_proba({k: v[hold_idx] for k, v in batch.items()})
    held_out_accuracy = float(((p > 0.5) == (y[hold_idx] == 1.0)).mean())

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    net.save(out_dir / "net.ckpt")
    token_vocab.save(out_dir / "token.vocab")
    dep_vocab.save(out_dir / "dep.vocab")
    manifest = {
        "config": asdict(config),
        "config_hash": config.config_hash,
        "corpus_hash": corpus.content_hash(),
        "seed": seed,
        "stories": len(stories),
        "truncation_layer": TRUNCATION_LAYER,
        "held_out_accuracy": held_out_accuracy,
        "epochs_run": result.epochs_run,
        "stopped_early": result.stopped_early,
    }
    (out_dir / "manifest.json").write_text(
        canonical_json(manifest) + "\n", encoding="utf-8")
    return manifest


def load_pretrained(in_dir) -> PretrainedBundle:
    in_dir = Path(in_dir)
    for name in PRETRAIN_FILES:
        if not (in_dir / name).exists():
            raise ConfigError(
                f"pretrained model directory {in_dir} is missing {name}"
            )
    try:
        manifest = json.loads(
            (in_dir / "manifest.json").read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        raise DataError(f"{in_dir}/manifest.json: not valid JSON") from None
    try:
        config = PipelineConfig(**manifest["config"])
    except (KeyError, TypeError):
        raise DataError(
            f"{in_dir}/manifest.json: missing or malformed config block"
        ) from None
    if config.config_hash != manifest.get("config_hash"):
        raise DataError(
            f"{in_dir}/manifest.json: config_hash does not match the "
            "stored configuration"
        )
    net = Network.load(in_dir / "net.ckpt")
    if manifest.get("truncation_layer") != TRUNCATION_LAYER or \
            TRUNCATION_LAYER not in net.nodes:
        raise DataError(
            f"pretrained network lacks the {TRUNCATION_LAYER!r} "
            "truncation layer"
        )
    token_vocab = Vocabulary.load(in_dir / "token.vocab")
    dep_vocab = Vocabulary.load(in_dir / "dep.vocab")
    return PretrainedBundle(net, token_vocab, dep_vocab, config, manifest)
