"""Command-line front end: ``nstage-lda fit|eval|export|gen-synthetic``.

Exit codes: 0 success, 2 user or input error, 1 internal failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import synthetic
from .corpus import Corpus, CorpusError, PipelineConfig, build_corpus, read_corpus_file, reencode
from .evaluation import EvalError, EvalResult, classify
from .export import ExportError, export_arff, export_topics
from .inference import MAX_SEED, InferenceError, InvariantError, LdaConfig, TopicModel
from .nstage import NStageConfig, NStageError, run_nstage

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger("nstage_lda")

# Seed offset between parallel chains; stage seeds advance by 1 within a chain.
CHAIN_STRIDE = 1_000_003

DEFAULTS = {
    "topics": 10,
    "stages": 1,
    "alpha": None,
    "beta": 0.01,
    "sweeps": 1000,
    "burn_in": 0,
    "seed": 0,
    "chains": 1,
    "topn_support": None,
    "lowercase": True,
    "strip_punctuation": True,
    "min_token_len": 1,
    "stopwords": [],
    "stem_prefix": None,
    "drop_empty_docs": True,
}


class UsageError(Exception):
    """Bad arguments or input; maps to exit code 2."""


USER_ERRORS = (UsageError, CorpusError, InferenceError, NStageError, EvalError, ExportError,
               OSError, UnicodeDecodeError, ValueError, KeyError)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nstage-lda", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="train an n-stage LDA model")
    fit.add_argument("--input", required=True, help="corpus file: label<TAB>text or text per line")
    fit.add_argument("--config", help="TOML file with option defaults (flags override it)")
    # None means "not given", so config-file values can fill in.
    fit.add_argument("--topics", type=_positive_int, default=None)
    fit.add_argument("--stages", type=_positive_int, default=None)
    fit.add_argument("--alpha", type=_positive_float, default=None, help="default 50/topics")
    fit.add_argument("--beta", type=_positive_float, default=None)
    fit.add_argument("--sweeps", type=_positive_int, default=None)
    fit.add_argument("--burn-in", type=int, default=None)
    fit.add_argument("--seed", type=_seed, default=None)
    fit.add_argument("--chains", type=_positive_int, default=None)
    fit.add_argument("--topn-support", type=_positive_int, default=None,
                     help="threshold each topic over its M heaviest words only")
    fit.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=None)
    fit.add_argument("--strip-punctuation", action=argparse.BooleanOptionalAction, default=None)
    fit.add_argument("--min-token-len", type=_positive_int, default=None)
    fit.add_argument("--stopwords", help="file with one stopword per line")
    fit.add_argument("--stem-prefix", type=_positive_int, default=None, metavar="K")
    fit.add_argument("--drop-empty-docs", action=argparse.BooleanOptionalAction, default=None)
    fit.add_argument("--model-out", default="model.json")
    fit.add_argument("--report", help="write one JSON line per stage")
    fit.add_argument("--stage-models", help="directory for per-stage model files")

    ev = sub.add_parser("eval", help="dominant-topic classification accuracy")
    ev.add_argument("--model", action="append", required=True,
                    help="model file; repeat to score several stages in order")
    ev.add_argument("--input", required=True)
    ev.add_argument("--labeling", choices=("majority", "hungarian"), default="majority")
    ev.add_argument("--test-fraction", type=float, default=None,
                    help="learn topic labels on a split, score the held-out documents")
    ev.add_argument("--split-seed", type=int, default=0)
    ev.add_argument("--json-out", help="write the evaluation result as JSON")

    ex = sub.add_parser("export", help="write ARFF and topic tables")
    ex.add_argument("--model", required=True)
    ex.add_argument("--input")
    ex.add_argument("--arff")
    ex.add_argument("--arff-mode", choices=("doc-topics", "topic-words"), default="doc-topics")
    ex.add_argument("--topics-table")
    ex.add_argument("--top-m", type=_positive_int, default=10)

    gen = sub.add_parser("gen-synthetic", help="write a seeded synthetic labeled corpus")
    gen.add_argument("--kind", choices=("clean", "noisy"), default="noisy")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", required=True)
    return parser


def _settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        with open(args.config, "rb") as fh:
            try:
                loaded = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise UsageError(f"bad config file: {exc}") from exc
        flat = {}
        for key, value in loaded.items():
            if isinstance(value, dict):
                flat.update(value)
            else:
                flat[key] = value
        flat = {k.replace("-", "_"): v for k, v in flat.items()}
        unknown = set(flat) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        settings.update(flat)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and key != "stopwords":
            settings[key] = value
    if args.stopwords:
        settings["stopwords"] = Path(args.stopwords).read_text(encoding="utf-8").split()
    if settings["stages"] < 1:
        raise UsageError("stages must be >= 1")
    return settings


def _pipeline(settings: dict) -> PipelineConfig:
    return PipelineConfig(
        lowercase=settings["lowercase"],
        strip_punctuation=settings["strip_punctuation"],
        min_token_len=settings["min_token_len"],
        stopwords=frozenset(settings["stopwords"]),
        stem_prefix=settings["stem_prefix"],
        drop_empty_docs=settings["drop_empty_docs"],
    )


def _run_chain(corpus: Corpus, config: NStageConfig):
    models: list[TopicModel] = []
    model, reports = run_nstage(corpus, config, lambda i, m, s, c: models.append(m))
    return model, reports, models


def cmd_fit(args: argparse.Namespace) -> int:
    settings = _settings(args)
    pipeline = _pipeline(settings)
    corpus = build_corpus(read_corpus_file(args.input), pipeline)
    lda = LdaConfig(num_topics=settings["topics"], alpha=settings["alpha"], beta=settings["beta"],
                    burn_in_sweeps=settings["burn_in"], total_sweeps=settings["sweeps"],
                    seed=settings["seed"])
    configs = [NStageConfig(settings["stages"], lda.with_seed(lda.seed + c * CHAIN_STRIDE),
                            settings["topn_support"])
               for c in range(settings["chains"])]
    logger.info("corpus: %d documents, %d words", len(corpus), len(corpus.vocabulary))
    if len(configs) == 1:
        results = [_run_chain(corpus, configs[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(configs)) as pool:
            results = list(pool.map(lambda c: _run_chain(corpus, c), configs))
    best = min(range(len(results)), key=lambda c: (results[c][1][-1].model_perplexity, c))
    model, reports, stage_models = results[best]
    if len(results) > 1:
        logger.info("kept chain %d of %d", best, len(results))

    pipe = pipeline.to_dict()
    replace(model, pipeline=pipe).save(args.model_out)
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(r.to_json() + "\n" for r in reports)
    if args.stage_models:
        out = Path(args.stage_models)
        out.mkdir(parents=True, exist_ok=True)
        for i, m in enumerate(stage_models, start=1):
            replace(m, pipeline=pipe).save(out / f"stage{i}.json")
    for r in reports:
        print(f"stage {r.stage_index}: vocabulary {r.vocab_size_before} -> {r.vocab_size_after}, "
              f"perplexity {r.model_perplexity:.4f}")
    return 0


def corpus_for_model(model: TopicModel, path: str) -> Corpus:
    """Rebuild the training corpus from ``path`` and restrict it to the model's dictionary."""
    pipeline = PipelineConfig.from_dict(model.pipeline) if model.pipeline else PipelineConfig()
    corpus = build_corpus(read_corpus_file(path), pipeline)
    missing = [w for w in model.vocabulary.words if w not in corpus.vocabulary]
    if missing or len(corpus) != model.theta.shape[0]:
        raise UsageError("vocabulary mismatch: model was not trained on this input")
    return reencode(corpus, model.vocabulary)


def cmd_eval(args: argparse.Namespace) -> int:
    results: list[EvalResult] = []
    for path in args.model:
        model = TopicModel.load(path)
        corpus = corpus_for_model(model, args.input)
        results.append(classify(model, corpus, args.labeling, args.test_fraction, args.split_seed))
    final = results[-1]
    if len(results) > 1:
        final.per_stage = [(i, r.accuracy) for i, r in enumerate(results, start=1)]
        for i, r in final.per_stage:
            print(f"stage {i} accuracy {r:.4f}")
    else:
        print(f"accuracy {final.accuracy:.4f}")
    print(final.confusion_table())
    if args.json_out:
        Path(args.json_out).write_text(final.to_json() + "\n", encoding="utf-8")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    if not args.arff and not args.topics_table:
        raise UsageError("nothing to export: give --arff and/or --topics-table")
    model = TopicModel.load(args.model)
    if args.arff:
        if args.arff_mode == "doc-topics":
            if not args.input:
                raise UsageError("--input is required for doc-topics ARFF export")
            corpus = corpus_for_model(model, args.input)
        else:
            corpus = None
        export_arff(model, corpus, args.arff, args.arff_mode)
    if args.topics_table:
        export_topics(model, args.top_m, args.topics_table)
    return 0


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    spec = synthetic.CLEAN if args.kind == "clean" else synthetic.NOISY
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    Path(args.out).write_text(synthetic.generate(spec).to_tsv(), encoding="utf-8")
    return 0


COMMANDS = {"fit": cmd_fit, "eval": cmd_eval, "export": cmd_export,
            "gen-synthetic": cmd_gen_synthetic}


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("NSTAGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (InvariantError, RuntimeError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except USER_ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
