"""Command-line interface.

Trained models live in self-contained bundle directories (manifest plus
checkpoint plus any vocabularies the feature view needs), so `predict`
never has to guess how a model was produced. Commands print terse
summaries to stdout; failures exit with the code of the error class
(config 3, data 4, run 2).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (Corpus, corpus_stats, load_corpus, plan_balanced_split,
                     save_corpus)
from .encode import build_vocab, encode_corpus, save_encoded
from .errors import ConfigError, DataError, UsprivacyError
from .evaluation import (MODEL_ORDER, MODEL_SPECS, decide_hypothesis,
                         mcnemar_test, run_protocol, shallow_model_for)
from .lexicon import (aggregate_counts, load_dictionary,
                      load_seed_dictionary, match_story)
from .neuralkit import Network, train_network
from .pipelines import (PipelineConfig, batch_of, build_cnn_nlp,
                        build_cnn_pw, build_pd_tl, desk_config_path,
                        load_config, load_pretrained, pretrain)
from .report import render_report
from .shallow import (dictionary_features, load_model, text_features)
from .surrogate import generate_surrogate, recipe_counts
from .util import canonical_json

BUNDLE_MANIFEST = "manifest.json"
TRAINABLE = tuple(n for n in MODEL_ORDER if n not in ("pd_tl", "const0"))


def _load_dictionary(args):
    if getattr(args, "dictionary", None):
        return load_dictionary(args.dictionary)
    return load_seed_dictionary()


def _load_pipeline_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    if getattr(args, "desk", False):
        return load_config(desk_config_path())
    return PipelineConfig()


# -- corpus commands -----------------------------------------------------


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.input, fmt=args.format)
    if args.output:
        save_corpus(corpus, args.output)
    print(f"stories: {len(corpus)}")
    print(f"content hash: {corpus.content_hash()}")
    for dataset_id, stats in sorted(corpus_stats(corpus).items()):
        kinds = ", ".join(f"{k}={n}" for k, n in stats.kind_counts)
        print(f"dataset {dataset_id}: {stats.size} stories, "
              f"{stats.privacy_term_count} privacy terms ({kinds})")
    return 0


def cmd_gen_surrogate(args) -> int:
    corpus = generate_surrogate(args.n, args.seed,
                                dictionary=_load_dictionary(args))
    save_corpus(corpus, args.output)
    print(f"wrote {len(corpus)} stories to {args.output}")
    print(f"content hash: {corpus.content_hash()}")
    for name, count in recipe_counts(args.n).items():
        print(f"  {name}: {count}")
    return 0


def cmd_dict(args) -> int:
    dictionary = _load_dictionary(args)
    print(f"dictionary version: {dictionary.version}")
    for category in dictionary.categories:
        print(f"  {category.name}: {len(category.patterns)} patterns")
    if args.match:
        tokens = args.match.split()
        features = match_story(dictionary, tokens)
        counts = aggregate_counts(features, dictionary)
        if not counts:
            print("no matches")
        for category, count in counts:
            print(f"  {category}: {count}")
        if features.matched_words():
            print(f"  words: {', '.join(features.matched_words())}")
    return 0


def cmd_featurize(args) -> int:
    corpus = load_corpus(args.corpus)
    dictionary = _load_dictionary(args)
    config = _load_pipeline_config(args)
    token_vocab = build_vocab(corpus.stories, "token", config.min_count)
    dep_vocab = build_vocab(corpus.stories, "dep", config.min_count)
    samples = encode_corpus(corpus.stories, token_vocab, dep_vocab,
                            dictionary, config.sequence_length)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_encoded(samples, out, header={
        "corpus_hash": corpus.content_hash(),
        "config_hash": config.config_hash,
    })
    token_vocab.save(out.with_suffix(".token.vocab"))
    dep_vocab.save(out.with_suffix(".dep.vocab"))
    print(f"encoded {len(samples)} stories to {out}")
    print(f"token vocabulary: {token_vocab.size} symbols")
    print(f"dependency vocabulary: {dep_vocab.size} symbols")
    return 0


# -- training commands ------------------------------------------------------


def _write_bundle_manifest(out_dir: Path, name: str, config, corpus,
                           seed: int, extra: dict | None = None) -> None:
    spec = MODEL_SPECS[name]
    manifest = {
        "model": name,
        "family": spec.family,
        "view": spec.view,
        "config": asdict(config),
        "config_hash": config.config_hash,
        "corpus_hash": corpus.content_hash(),
        "seed": seed,
        "stories": len(corpus),
    }
    manifest.update(extra or {})
    (out_dir / BUNDLE_MANIFEST).write_text(canonical_json(manifest) + "\n",
                                           encoding="utf-8")


def cmd_pretrain(args) -> int:
    corpus = load_corpus(args.corpus)
    manifest = pretrain(corpus, _load_dictionary(args),
                        _load_pipeline_config(args), args.seed,
                        args.output, allow_small=args.allow_small)
    print(f"pretrained on {manifest['stories']} stories "
          f"({manifest['epochs_run']} epochs)")
    print(f"held-out accuracy: {manifest['held_out_accuracy']:.4f}")
    print(f"artifacts in {args.output}")
    return 0


def cmd_train(args) -> int:
    if args.model not in TRAINABLE:
        raise ConfigError(
            f"model {args.model!r} is not trainable here; choose from "
            f"{', '.join(TRAINABLE)} (pd_tl comes from `transfer`)"
        )
    corpus = load_corpus(args.corpus)
    dictionary = _load_dictionary(args)
    config = _load_pipeline_config(args)
    spec = MODEL_SPECS[args.model]
    token_vocab = build_vocab(corpus.stories, "token", config.min_count)
    dep_vocab = build_vocab(corpus.stories, "dep", config.min_count)
    samples = encode_corpus(corpus.stories, token_vocab, dep_vocab,
                            dictionary, config.sequence_length)
    y = np.array([s.label for s in samples], dtype=np.float64)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    if spec.family == "neural":
        if args.model == "cnn_nlp":
            net = build_cnn_nlp(token_vocab.size, dep_vocab.size, config,
                                args.seed)
            batch = batch_of(samples)
        else:
            net = build_cnn_pw(config, args.seed)
            batch = {"lexicon": np.stack([s.lexicon for s in samples])}
        result = train_network(net, batch, y,
                               config.to_train_config(args.seed))
        net.save(out_dir / "net.ckpt")
        extra = {"epochs_run": result.epochs_run,
                 "stopped_early": result.stopped_early}
    else:
        model = shallow_model_for(args.model, args.seed)
        if spec.view == "nlp":
            X = text_features(samples, token_vocab, dep_vocab).X
        else:
            X = dictionary_features(samples, dictionary).X
        model.fit(X, y)
        model.save(out_dir / "model.ckpt")
        extra = {}
    if spec.view in ("nlp", "both"):
        token_vocab.save(out_dir / "token.vocab")
        dep_vocab.save(out_dir / "dep.vocab")
    _write_bundle_manifest(out_dir, args.model, config, corpus, args.seed,
                           extra)
    print(f"trained {args.model} on {len(corpus)} stories")
    print(f"bundle in {out_dir}")
    return 0


def cmd_transfer(args) -> int:
    bundle = load_pretrained(args.pretrained)
    corpus = load_corpus(args.corpus)
    dictionary = _load_dictionary(args)
    config = bundle.config
    samples = encode_corpus(corpus.stories, bundle.token_vocab,
                            bundle.dep_vocab, dictionary,
                            config.sequence_length)
    y = np.array([s.label for s in samples], dtype=np.float64)
    net = build_pd_tl(bundle.net, config, args.seed)
    result = train_network(net, batch_of(samples), y,
                           config.to_train_config(args.seed))
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    net.save(out_dir / "net.ckpt")
    bundle.token_vocab.save(out_dir / "token.vocab")
    bundle.dep_vocab.save(out_dir / "dep.vocab")
    _write_bundle_manifest(out_dir, "pd_tl", config, corpus, args.seed,
                           {"pretrained": str(args.pretrained),
                            "epochs_run": result.epochs_run,
                            "stopped_early": result.stopped_early})
    print(f"fine-tuned transfer model on {len(corpus)} stories "
          f"({result.epochs_run} epochs)")
    print(f"bundle in {out_dir}")
    return 0


# -- inference and evaluation ---------------------------------------------------


def cmd_predict(args) -> int:
    model_dir = Path(args.model_dir)
    manifest_path = model_dir / BUNDLE_MANIFEST
    if not manifest_path.exists():
        raise ConfigError(f"{model_dir} has no {BUNDLE_MANIFEST}; "
                          "expected a bundle from `train` or `transfer`")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    try:
        config = PipelineConfig(**manifest["config"])
        name = manifest["model"]
        view = manifest["view"]
        family = manifest["family"]
    except (KeyError, TypeError):
        raise DataError(f"{manifest_path}: malformed bundle manifest") \
            from None
    corpus = load_corpus(args.corpus)
    dictionary = _load_dictionary(args)

    if view in ("nlp", "both"):
        from .encode import Vocabulary
        token_vocab = Vocabulary.load(model_dir / "token.vocab")
        dep_vocab = Vocabulary.load(model_dir / "dep.vocab")
    else:
        token_vocab = build_vocab(corpus.stories, "token")
        dep_vocab = build_vocab(corpus.stories, "dep")
    samples = encode_corpus(corpus.stories, token_vocab, dep_vocab,
                            dictionary, config.sequence_length)

    if family == "neural":
        net = Network.load(model_dir / "net.ckpt")
        if name == "cnn_pw":
            batch = {"lexicon": np.stack([s.lexicon for s in samples])}
        else:
            batch = batch_of(samples)
        scores = net.predict_proba(batch)
    else:
        model = load_model(model_dir / "model.ckpt")
        if view == "nlp":
            X = text_features(samples, token_vocab, dep_vocab).X
        else:
            X = dictionary_features(samples, dictionary).X
        scores = model.predict_score(X)

    lines = ["id\tscore\tpred"]
    for sample, score in zip(samples, scores):
        lines.append(f"{sample.id}\t{float(score)!r}\t{int(score > 0.5)}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {len(samples)} predictions to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args) -> int:
    corpus = load_corpus(args.corpus)
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    progress = print if args.verbose else None
    result = run_protocol(corpus, _load_dictionary(args),
                          _load_pipeline_config(args), models,
                          seed=args.seed, repeats=args.repeats, k=args.folds,
                          out_dir=args.output,
                          pretrained_dir=args.pretrained,
                          progress=progress)
    print(f"{'model':<10} {'mean acc':>9} {'pooled acc':>11} {'f1':>7}")
    for name, summary in result.summaries.items():
        print(f"{name:<10} {summary['mean']['accuracy']:>9.4f} "
              f"{summary['pooled']['accuracy']:>11.4f} "
              f"{summary['mean']['f1']:>7.4f}")
    if result.pairwise:
        significant = sum(r["significant"] for r in result.pairwise.values())
        print(f"pairwise tests: {len(result.pairwise)} "
              f"({significant} significant at 0.05)")
    print(f"artifacts in {args.output}")
    return 0


def cmd_mcnemar(args) -> int:
    if args.b is not None or args.c is not None:
        if args.b is None or args.c is None:
            raise ConfigError("--b and --c must be given together")
        b, c = args.b, args.c
    elif args.first and args.second:
        b = c = 0
        rows_a = [json.loads(x) for x in
                  Path(args.first).read_text().splitlines()]
        rows_b = [json.loads(x) for x in
                  Path(args.second).read_text().splitlines()]
        if [r["id"] for r in rows_a] != [r["id"] for r in rows_b]:
            raise DataError("run files score different stories")
        for ra, rb in zip(rows_a, rows_b):
            a_right = ra["pred"] == ra["gold"]
            b_right = rb["pred"] == rb["gold"]
            b += int(not a_right and b_right)
            c += int(a_right and not b_right)
    else:
        raise ConfigError("give either --b/--c or --first/--second")
    result = mcnemar_test(b, c)
    print(f"b={result.b} c={result.c} method={result.method}")
    if result.statistic is not None:
        print(f"statistic={result.statistic!r}")
    print(f"p={result.p_value!r}"
          + (f" ({result.p_exact})" if result.p_exact else ""))
    print("significant at 0.05: "
          + ("yes" if decide_hypothesis(result.p_value) else "no"))
    return 0


def cmd_report(args) -> int:
    paths = render_report(args.protocol, args.output)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usprivacy",
        description="Detect privacy disclosures in agile user stories.")
    parser.add_argument("--version", action="version",
                        version=f"usprivacy {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("ingest", cmd_ingest, "Validate a story corpus file and "
            "report per-dataset statistics.")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="rewrite the corpus in canonical form")
    p.add_argument("--format", choices=("jsonl", "csv"),
                   help="force the input format instead of sniffing")

    p = add("gen-surrogate", cmd_gen_surrogate,
            "Generate the deterministic surrogate corpus.")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=11)
    p.add_argument("--output", required=True)
    p.add_argument("--dictionary")

    p = add("dict", cmd_dict, "Inspect the privacy dictionary and "
            "optionally match a token sequence.")
    p.add_argument("--dictionary")
    p.add_argument("--match", help="whitespace-separated tokens to match")

    p = add("featurize", cmd_featurize, "Encode a corpus into the binary "
            "sample cache plus vocabularies.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--dictionary")
    p.add_argument("--config")

    p = add("pretrain", cmd_pretrain, "Train the text pipeline on raw "
            "disclosure labels and save the transfer source.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dictionary")
    p.add_argument("--config")
    p.add_argument("--desk", action="store_true",
                   help="use the bundled desk-scale configuration")
    p.add_argument("--allow-small", action="store_true")

    p = add("train", cmd_train, "Train one model on a corpus and save a "
            "prediction bundle.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dictionary")
    p.add_argument("--config")
    p.add_argument("--desk", action="store_true")

    p = add("transfer", cmd_transfer, "Fine-tune the pretrained text "
            "pipeline with the dictionary branch.")
    p.add_argument("--pretrained", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dictionary")

    p = add("predict", cmd_predict, "Score a corpus with a trained bundle.")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", help="write TSV here instead of stdout")
    p.add_argument("--dictionary")

    p = add("evaluate", cmd_evaluate, "Run the balanced repeated k-fold "
            "protocol over chosen models.")
    p.add_argument("--corpus", required=True)
    p.add_argument("--models", default="all",
                   help="comma-separated model names or 'all'")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--pretrained",
                   help="pretrained directory, needed for pd_tl")
    p.add_argument("--dictionary")
    p.add_argument("--config")
    p.add_argument("--desk", action="store_true")
    p.add_argument("--verbose", action="store_true")

    p = add("mcnemar", cmd_mcnemar, "Paired McNemar test from counts or "
            "from two run files.")
    p.add_argument("--b", type=int)
    p.add_argument("--c", type=int)
    p.add_argument("--first", help="run rows of the first model")
    p.add_argument("--second", help="run rows of the second model")

    p = add("report", cmd_report, "Render tables, CSV, and figures from "
            "an evaluation directory.")
    p.add_argument("--protocol", required=True)
    p.add_argument("--output", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UsprivacyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
