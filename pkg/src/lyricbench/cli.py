"""Command line entry point: ``lyricbench <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from importlib import resources
from pathlib import Path

from . import agreement, corpus as corpus_mod, retrieval
from .harness import (PipelineConfig, SynthSpec, eval_instances, generate_synthetic, read_hyp,
                      run_pipeline, write_hyp)
from .metrics import MetricConfig, SynonymLexicon, build_report, format_report, load_profanity


def bundled_config() -> Path:
    return Path(str(resources.files("lyricbench") / "data" / "synthetic_5k.cfg"))


# -- corpus ------------------------------------------------------------------

def cmd_ingest(args) -> int:
    c = corpus_mod.load_corpus(args.input)
    before = len(c)
    if args.english_only:
        c = corpus_mod.filter_english(c)
    if args.strip_links:
        c = corpus_mod.strip_link_only(c)
    corpus_mod.save_corpus(c, args.out)
    print(f"kept {len(c)} of {before} pairs -> {args.out}")
    return 0


def cmd_split(args) -> int:
    c = corpus_mod.load_corpus(args.input)
    test, dev, train = corpus_mod.make_splits(c, corpus_mod.SplitSpec(args.test, args.dev, args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_split_manifest(out / "splits.tsv", test, dev, train)
    for name, part in (("test", test), ("dev", dev), ("train", train)):
        corpus_mod.save_corpus(part, out / f"{name}.jsonl")
    print(f"test={len(test)} dev={len(dev)} train={len(train)} -> {out}")
    return 0


def cmd_stats(args) -> int:
    c = corpus_mod.load_corpus(args.input)
    stats = corpus_mod.corpus_stats(c)
    for f in fields(stats):
        value = getattr(stats, f.name)
        print(f"{f.name}\t{value:.4f}" if isinstance(value, float) else f"{f.name}\t{value}")
    print(f"ci_fraction\t{corpus_mod.estimate_ci_fraction(c):.4f}")
    return 0


# -- evaluation ----------------------------------------------------------------

def cmd_evaluate(args) -> int:
    test = corpus_mod.load_corpus(args.test)
    hyps = read_hyp(args.hyp)
    synonyms = SynonymLexicon.load(args.syns) if args.syns else None
    lexicon = load_profanity(args.profanity)
    report = build_report(args.name, eval_instances(test, hyps), MetricConfig(), lexicon, synonyms)
    sys.stdout.write(format_report([report]))
    return 0


# -- systems -------------------------------------------------------------------

def cmd_retrieval_build(args) -> int:
    train = corpus_mod.load_corpus(args.train)
    if args.sentences:
        train = corpus_mod.expand_sentences(train)
    index = retrieval.build_index(train)
    index.save(args.out)
    print(f"indexed {len(train)} documents -> {args.out}")
    return 0


def cmd_retrieval_annotate(args) -> int:
    index = retrieval.TfIdfIndex.load(args.index)
    test = corpus_mod.load_corpus(args.test)
    write_hyp(args.out, retrieval.annotate_corpus(index, test))
    return 0


def _smt_overrides(model, args) -> None:
    if args.beam is not None:
        model.config.beam_size = args.beam
    if args.distortion is not None:
        model.config.distortion_limit = args.distortion


def cmd_smt_train(args) -> int:
    from .smt import SMTConfig, train_smt

    cfg = SMTConfig()
    if args.beam is not None:
        cfg.beam_size = args.beam
    if args.distortion is not None:
        cfg.distortion_limit = args.distortion
    if args.max_phrase_len is not None:
        cfg.max_phrase_len = args.max_phrase_len
    model = train_smt(corpus_mod.load_corpus(args.train), cfg, model_dir=args.out)
    print(f"phrase table: {len(model.table)} entries -> {args.out}")
    return 0


def cmd_smt_tune(args) -> int:
    from .smt import SMTModel

    model = SMTModel.load(args.model)
    _smt_overrides(model, args)
    result = model.tune(corpus_mod.load_corpus(args.dev), args.iters, args.nbest, args.restarts,
                        args.seed, workers=args.workers)
    model.weights.save(Path(args.model) / "weights.txt")
    print(f"dev BLEU {result.bleu:.2f} after {result.iterations} iterations")
    return 0


def cmd_smt_annotate(args) -> int:
    from .smt import SMTModel

    model = SMTModel.load(args.model)
    _smt_overrides(model, args)
    test = corpus_mod.load_corpus(args.test)
    write_hyp(args.out, model.annotate_corpus(test, workers=args.workers))
    return 0


# -- ratings -------------------------------------------------------------------

def cmd_agreement(args) -> int:
    for aspect, kappa in agreement.ratings_agreement(args.ratings).items():
        print(f"kappa_{aspect}\t{kappa:.4f}")
    return 0


def cmd_correlate(args) -> int:
    for (metric, aspect), r in agreement.correlate(args.ratings, args.scores).items():
        print(f"{metric}\t{aspect}\t{r:.4f}")
    return 0


# -- harness -------------------------------------------------------------------

def cmd_synth(args) -> int:
    spec = SynthSpec.load(args.spec, n_pairs=args.n_pairs, seed=args.seed)
    c = generate_synthetic(spec)
    corpus_mod.save_corpus(c, args.out)
    print(f"wrote {len(c)} pairs -> {args.out}")
    return 0


def cmd_run(args) -> int:
    config = PipelineConfig.load(args.config or bundled_config())
    config = config.updated({f.name: getattr(args, f.name) for f in fields(PipelineConfig)})
    result = run_pipeline(config, args.out)
    sys.stdout.write(result["report"])
    return 0


def _add_config_twins(p: argparse.ArgumentParser) -> None:
    """One flag per PipelineConfig field; unset flags leave the file value."""
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        default = getattr(PipelineConfig(), f.name)
        if isinstance(default, bool):
            p.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=None)
        else:
            p.add_argument(flag, dest=f.name, type=type(default), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lyricbench", description="Lyric annotation baselines and metrics.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="filter a JSONL corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--english-only", action="store_true")
    p.add_argument("--strip-links", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="test/dev/train split with a manifest")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--test", type=int, default=354)
    p.add_argument("--dev", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("evaluate", help="score a hypothesis file")
    p.add_argument("--test", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--name", default="system")
    p.add_argument("--syns")
    p.add_argument("--profanity")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("retrieval", help="TF-IDF nearest-lyric baseline")
    rsub = p.add_subparsers(dest="action", required=True)
    q = rsub.add_parser("build")
    q.add_argument("--train", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--sentences", action="store_true", help="index sentence-expanded pairs")
    q.set_defaults(func=cmd_retrieval_build)
    q = rsub.add_parser("annotate")
    q.add_argument("--index", required=True)
    q.add_argument("--test", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_retrieval_annotate)

    p = sub.add_parser("smt", help="phrase-based translation baseline")
    ssub = p.add_subparsers(dest="action", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beam", type=int)
    common.add_argument("--distortion", type=int)
    common.add_argument("--nbest", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    q = ssub.add_parser("train", parents=[common])
    q.add_argument("--train", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--max-phrase-len", type=int)
    q.set_defaults(func=cmd_smt_train)
    q = ssub.add_parser("tune", parents=[common])
    q.add_argument("--dev", required=True)
    q.add_argument("--model", required=True)
    q.add_argument("--iters", type=int, default=10)
    q.add_argument("--restarts", type=int, default=20)
    q.set_defaults(func=cmd_smt_tune)
    q = ssub.add_parser("annotate", parents=[common])
    q.add_argument("--model", required=True)
    q.add_argument("--test", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_smt_annotate)

    p = sub.add_parser("agreement", help="Fleiss kappa over a ratings CSV")
    p.add_argument("--ratings", required=True)
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("correlate", help="Pearson r between metric scores and ratings")
    p.add_argument("--ratings", required=True)
    p.add_argument("--scores", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--spec", help="JSON spec (default: bundled)")
    p.add_argument("--n-pairs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", help="key=value file (default: bundled synthetic run)")
    p.add_argument("--out", required=True)
    _add_config_twins(p)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, LookupError, OSError, RuntimeError) as exc:
        print(f"lyricbench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
