"""Balanced repeated k-fold protocol, exact metrics, and paired tests.

Ground truth inside the protocol is membership in the balanced pool's
positive half, so a constant-negative baseline scores exactly one half
on every cell. Metrics are kept as exact rationals; cell means stay
rationals until serialization. Paired model comparisons pool the
per-story decisions of all cells and apply the McNemar test, exact
binomial when the disagreement count is small, the continuity-corrected
chi-square approximation otherwise.

A protocol run leaves a self-describing directory behind::

    plan.json             fold plan, replayable
    protocol.json         corpus/config/model fingerprints
    runs/<model>/r<r>-f<f>.jsonl    one scored story per line
    summary/<model>.json  per-cell and pooled metrics
    mcnemar/<a>_vs_<b>.json         pairwise disagreements and p-values
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .corpus import Corpus, FoldPlan, plan_balanced_split
from .encode import EncodedSample, build_vocab, encode_corpus
from .errors import ConfigError, DataError, RunError
from .lexicon import PrivacyDictionary
from .neuralkit import train_network
from .pipelines import (TRUNCATION_LAYER, PipelineConfig, batch_of,
                        build_cnn_nlp, build_cnn_pw, build_pd_tl_head,
                        load_pretrained)
from .shallow import (DecisionTree, GaussianNaiveBayes, KNearestNeighbors,
                      LinearSVM, LogisticRegression, RandomForest,
                      dictionary_features, pool_labels_of, text_features)
from .util import canonical_json, mix

ALPHA = 0.05

# -- exact confusion metrics ----------------------------------------------


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: Fraction
    precision: Fraction
    recall: Fraction
    f1: Fraction
    degenerate: tuple[str, ...]

    def as_dict(self) -> dict:
        out = {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}
        for name in ("accuracy", "precision", "recall", "f1"):
            value: Fraction = getattr(self, name)
            out[name] = float(value)
            out[name + "_exact"] = f"{value.numerator}/{value.denominator}"
        out["degenerate"] = list(self.degenerate)
        return out


def compute_metrics(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    """Exact rational metrics; a zero denominator yields 0 and a flag."""
    for name, value in (("tp", tp), ("fp", fp), ("fn", fn), ("tn", tn)):
        if value < 0:
            raise DataError(f"negative confusion count {name}={value}")
    degenerate = []

    def ratio(num: int, den: int, name: str) -> Fraction:
        if den == 0:
            degenerate.append(name)
            return Fraction(0)
        return Fraction(num, den)

    accuracy = ratio(tp + tn, tp + fp + fn + tn, "accuracy")
    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    if precision + recall == 0:
        degenerate.append("f1")
        f1 = Fraction(0)
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return Metrics(tp, fp, fn, tn, accuracy, precision, recall, f1,
                   tuple(degenerate))


def confusion(gold: np.ndarray, pred: np.ndarray):
    gold = np.asarray(gold)
    pred = np.asarray(pred)
    if gold.shape != pred.shape:
        raise DataError("gold and prediction vectors differ in length")
    tp = int(np.sum((gold == 1) & (pred == 1)))
    fp = int(np.sum((gold == 0) & (pred == 1)))
    fn = int(np.sum((gold == 1) & (pred == 0)))
    tn = int(np.sum((gold == 0) & (pred == 0)))
    return tp, fp, fn, tn


def mean_fraction(values) -> Fraction:
    values = list(values)
    if not values:
        raise DataError("cannot average zero values")
    return sum(values, Fraction(0)) / len(values)


# -- McNemar -----------------------------------------------------------------

EXACT_LIMIT = 25


@dataclass(frozen=True)
class McNemarResult:
    b: int
    c: int
    method: str              # "exact-binomial" | "chi-square"
    statistic: float | None  # None for the exact method
    p_value: float
    p_exact: str | None      # rational text for the exact method

    def as_dict(self) -> dict:
        return {"b": self.b, "c": self.c, "method": self.method,
                "statistic": self.statistic, "p_value": self.p_value,
                "p_exact": self.p_exact}


def mcnemar_test(b: int, c: int) -> McNemarResult:
    """Paired test on discordant counts b (only first wrong) and c
    (only second wrong)."""
    if b < 0 or c < 0:
        raise DataError("discordant counts must be non-negative")
    m = b + c
    if m <= EXACT_LIMIT:
        tail = sum(math.comb(m, i) for i in range(min(b, c) + 1))
        p = min(Fraction(1), Fraction(2 * tail, 2 ** m))
        return McNemarResult(b, c, "exact-binomial", None, float(p),
                             f"{p.numerator}/{p.denominator}")
    stat = (abs(b - c) - 1) ** 2 / m
    p = math.erfc(math.sqrt(stat / 2.0))
    return McNemarResult(b, c, "chi-square", stat, p, None)


def decide_hypothesis(p_value: float, alpha: float = ALPHA) -> bool:
    """True when the paired difference is significant at alpha."""
    return p_value < alpha


# -- model registry ------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    name: str
    family: str  # "shallow" | "neural" | "baseline"
    view: str    # "nlp" | "pw" | "both" | "none"


MODEL_ORDER = ("lr_nlp", "svm_nlp", "gnb_nlp", "knn_nlp", "dt_nlp", "rf_nlp",
               "lr_pw", "svm_pw", "gnb_pw", "knn_pw", "dt_pw", "rf_pw",
               "cnn_nlp", "cnn_pw", "pd_tl", "const0")

MODEL_SPECS = {name: ModelSpec(name, "shallow",
                               "nlp" if name.endswith("_nlp") else "pw")
               for name in MODEL_ORDER[:12]}
MODEL_SPECS["cnn_nlp"] = ModelSpec("cnn_nlp", "neural", "nlp")
MODEL_SPECS["cnn_pw"] = ModelSpec("cnn_pw", "neural", "pw")
MODEL_SPECS["pd_tl"] = ModelSpec("pd_tl", "neural", "both")
MODEL_SPECS["const0"] = ModelSpec("const0", "baseline", "none")


def resolve_models(names) -> list[ModelSpec]:
    """Expands "all", preserves canonical order, rejects unknowns."""
    if isinstance(names, str):
        names = [names]
    wanted = set()
    for name in names:
        if name == "all":
            wanted.update(MODEL_ORDER)
        elif name in MODEL_SPECS:
            wanted.add(name)
        else:
            raise ConfigError(
                f"unknown model {name!r}; choose from "
                f"{', '.join(MODEL_ORDER)} or 'all'"
            )
    return [MODEL_SPECS[name] for name in MODEL_ORDER if name in wanted]


def shallow_model_for(name: str, seed: int):
    kind = name.split("_")[0]
    if kind == "lr":
        return LogisticRegression()
    if kind == "svm":
        return LinearSVM(seed=seed)
    if kind == "gnb":
        return GaussianNaiveBayes()
    if kind == "knn":
        return KNearestNeighbors()
    if kind == "dt":
        return DecisionTree()
    if kind == "rf":
        return RandomForest(seed=seed)
    raise ConfigError(f"unknown shallow model {name!r}")


# -- protocol ------------------------------------------------------------------


@dataclass(frozen=True)
class CellScores:
    ids: tuple[str, ...]
    gold: np.ndarray
    score: np.ndarray
    pred: np.ndarray


@dataclass(frozen=True)
class ProtocolResult:
    plan: FoldPlan
    summaries: dict
    pairwise: dict
    out_dir: Path | None


class _FoldData:
    """Everything the model runners need for one (repeat, fold) cell,
    computed once and shared across models."""

    def __init__(self, train_stories, test_stories, dictionary, config,
                 bundle, trunk):
        token_vocab = build_vocab(train_stories, "token", config.min_count)
        dep_vocab = build_vocab(train_stories, "dep", config.min_count)
        length = config.sequence_length
        self.train = encode_corpus(train_stories, token_vocab, dep_vocab,
                                   dictionary, length)
        self.test = encode_corpus(test_stories, token_vocab, dep_vocab,
                                  dictionary, length)
        self.token_vocab = token_vocab
        self.dep_vocab = dep_vocab
        self.y_train = pool_labels_of(self.train)
        self.y_test = pool_labels_of(self.test)
        self.ids = tuple(s.id for s in self.test)
        self.nlp_train = text_features(self.train, token_vocab, dep_vocab)
        self.nlp_test = text_features(self.test, token_vocab, dep_vocab)
        self.pw_train = dictionary_features(self.train, dictionary)
        self.pw_test = dictionary_features(self.test, dictionary)
        if bundle is not None:
            pre_train = encode_corpus(train_stories, bundle.token_vocab,
                                      bundle.dep_vocab, dictionary,
                                      bundle.config.sequence_length)
            pre_test = encode_corpus(test_stories, bundle.token_vocab,
                                     bundle.dep_vocab, dictionary,
                                     bundle.config.sequence_length)
            self.trunk_train = trunk.forward(batch_of(pre_train))
            self.trunk_test = trunk.forward(batch_of(pre_test))
            self.lex_train = np.stack([s.lexicon for s in pre_train])
            self.lex_test = np.stack([s.lexicon for s in pre_test])


def _run_model(spec: ModelSpec, fold: _FoldData, config: PipelineConfig,
               seed: int, trunk_width: int | None) -> np.ndarray:
    if spec.name == "const0":
        return np.zeros(len(fold.test))
    if spec.family == "shallow":
        model = shallow_model_for(spec.name, seed)
        if spec.view == "nlp":
            Xtr, Xte = fold.nlp_train.X, fold.nlp_test.X
        else:
            Xtr, Xte = fold.pw_train.X, fold.pw_test.X
        model.fit(Xtr, fold.y_train)
        return model.predict_score(Xte)
    if spec.name == "cnn_nlp":
        net = build_cnn_nlp(fold.token_vocab.size, fold.dep_vocab.size,
                            config, seed)
        train_network(net, batch_of(fold.train), fold.y_train,
                      config.to_train_config(seed))
        return net.predict_proba(batch_of(fold.test))
    if spec.name == "cnn_pw":
        net = build_cnn_pw(config, seed)
        train_network(net, {"lexicon": fold.pw_train.X}, fold.y_train,
                      config.to_train_config(seed))
        return net.predict_proba({"lexicon": fold.pw_test.X})
    if spec.name == "pd_tl":
        head = build_pd_tl_head(trunk_width, config, seed)
        train_network(
            head,
            {TRUNCATION_LAYER: fold.trunk_train, "lexicon": fold.lex_train},
            fold.y_train, config.to_train_config(seed))
        return head.predict_proba(
            {TRUNCATION_LAYER: fold.trunk_test, "lexicon": fold.lex_test})
    raise ConfigError(f"no runner for model {spec.name!r}")


def run_protocol(corpus: Corpus, dictionary: PrivacyDictionary,
                 config: PipelineConfig, models, seed: int, repeats: int,
                 k: int, out_dir=None, pretrained_dir=None,
                 plan: FoldPlan | None = None,
                 progress=None) -> ProtocolResult:
    """Scores every requested model on every balanced fold cell.

    The transfer model consumes a pretrained directory; everything else
    is trained per cell from that cell's training half only (fold-local
    vocabularies included, so no test token leaks into any feature
    space).
    """
    specs = resolve_models(models)
    if not specs:
        raise ConfigError("no models requested")
    bundle = trunk = None
    trunk_width = None
    if any(s.name == "pd_tl" for s in specs):
        if pretrained_dir is None:
            raise ConfigError("model pd_tl needs --pretrained artifacts")
        bundle = load_pretrained(pretrained_dir)
        trunk = bundle.net.truncate_after(TRUNCATION_LAYER)
        trunk_width = trunk.nodes[TRUNCATION_LAYER].shape[0]

    if plan is None:
        plan = plan_balanced_split(corpus, seed, repeats, k)
    by_id = {story.id: story for story in corpus}

    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        for sub in ("runs", "summary", "mcnemar"):
            (out_dir / sub).mkdir(parents=True, exist_ok=True)
        (out_dir / "plan.json").write_text(plan.to_json() + "\n",
                                           encoding="utf-8")

    cells: dict[str, dict] = {spec.name: {} for spec in specs}
    for r, f in plan.cells():
        train_ids, test_ids = plan.assignments[(r, f)]
        fold = _FoldData([by_id[i] for i in train_ids],
                         [by_id[i] for i in test_ids],
                         dictionary, config, bundle, trunk)
        for spec in specs:
            model_seed = mix(plan.seed, "model", spec.name, r, f)
            score = np.asarray(
                _run_model(spec, fold, config, model_seed, trunk_width),
                dtype=np.float64)
            pred = (score > 0.5).astype(np.int64)
            cell = CellScores(fold.ids, fold.y_test.astype(np.int64),
                              score, pred)
            cells[spec.name][(r, f)] = cell
            if progress is not None:
                acc = float((cell.pred == cell.gold).mean())
                progress(f"r{r}-f{f} {spec.name}: accuracy {acc:.3f}")
            if out_dir is not None:
                model_dir = out_dir / "runs" / spec.name
                model_dir.mkdir(parents=True, exist_ok=True)
                lines = [canonical_json({
                    "id": sid,
                    "gold": int(g),
                    "score": float(s),
                    "pred": int(p),
                }) for sid, g, s, p in zip(cell.ids, cell.gold, cell.score,
                                           cell.pred)]
                (model_dir / f"r{r}-f{f}.jsonl").write_text(
                    "\n".join(lines) + "\n", encoding="utf-8")

    summaries = {}
    for spec in specs:
        per_cell = []
        cell_metrics = []
        pooled = [0, 0, 0, 0]
        for (r, f) in plan.cells():
            cell = cells[spec.name][(r, f)]
            tp, fp, fn, tn = confusion(cell.gold, cell.pred)
            pooled = [pooled[0] + tp, pooled[1] + fp,
                      pooled[2] + fn, pooled[3] + tn]
            m = compute_metrics(tp, fp, fn, tn)
            cell_metrics.append(m)
            per_cell.append({"repeat": r, "fold": f, **m.as_dict()})
        mean = {}
        for metric in ("accuracy", "precision", "recall", "f1"):
            value = mean_fraction(getattr(cm, metric) for cm in cell_metrics)
            mean[metric] = float(value)
            mean[metric + "_exact"] = f"{value.numerator}/{value.denominator}"
        summary = {
            "model": spec.name,
            "cells": per_cell,
            "pooled": compute_metrics(*pooled).as_dict(),
            "mean": mean,
        }
        summaries[spec.name] = summary
        if out_dir is not None:
            (out_dir / "summary" / f"{spec.name}.json").write_text(
                canonical_json(summary) + "\n", encoding="utf-8")

    pairwise = {}
    names = [spec.name for spec in specs]
    for i, a in enumerate(names):
        for bname in names[i + 1:]:
            b = c = 0
            for key in plan.cells():
                ca, cb = cells[a][key], cells[bname][key]
                a_right = ca.pred == ca.gold
                b_right = cb.pred == cb.gold
                b += int(np.sum(~a_right & b_right))
                c += int(np.sum(a_right & ~b_right))
            result = mcnemar_test(b, c)
            record = {
                "first": a,
                "second": bname,
                **result.as_dict(),
                "significant": decide_hypothesis(result.p_value),
            }
            pairwise[f"{a}_vs_{bname}"] = record
            if out_dir is not None:
                (out_dir / "mcnemar" / f"{a}_vs_{bname}.json").write_text(
                    canonical_json(record) + "\n", encoding="utf-8")

    if out_dir is not None:
        manifest = {
            "corpus_hash": corpus.content_hash(),
            "config": asdict(config),
            "config_hash": config.config_hash,
            "seed": plan.seed,
            "repeats": plan.repeats,
            "k": plan.k,
            "models": names,
            "pretrained": str(pretrained_dir) if pretrained_dir else None,
        }
        (out_dir / "protocol.json").write_text(
            canonical_json(manifest) + "\n", encoding="utf-8")
    return ProtocolResult(plan, summaries, pairwise, out_dir)
