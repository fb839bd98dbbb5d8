"""Command line interface: ``catgen <subcommand> [flags]``.

Subcommands: build-vocab, train, tag, rerank, eval, trace. Every output file
starts with the resolved configuration as ``# key=value`` comment lines.
Option precedence is flags > ``--config`` JSON file > defaults.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional, Sequence

from . import __version__
from .category import CategoryParseError, parse_category, print_category
from .corpus import CorpusFormatError, LabelInventory, build_inventory, read_corpus
from .decode import Tagger, format_kbest, illegal_rate, parse_kbest
from .evaluation import evaluate, render_report
from .model import (
    FingerprintMismatch,
    ModelFormatError,
    TrainConfig,
    classifier_distribution,
    format_model,
    load_model,
    make_context,
    train_classifier,
    train_generator,
    train_transition,
)
from .oracle import OracleSpec, TagVocabulary, build_vocabulary, mean_sequence_length
from .rerank import DEFAULT_LAMBDA, DEFAULT_NU, rerank_position
from .transition import format_trace, oracle_actions, trace

log = logging.getLogger("catgen")

DEFAULT_SEED = 13


class CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except FileNotFoundError:
        raise CliError(f"file not found: {path}") from None


def _load_inventory(path: str) -> LabelInventory:
    return LabelInventory.from_text(_read(path))


def _load_vocab(path: str) -> TagVocabulary:
    return TagVocabulary.from_text(_read(path))


def _load_model(path: str, **expect):
    try:
        return load_model(path, **expect)
    except FileNotFoundError as err:
        raise CliError(str(err)) from None


def _write(path: Optional[str], header: str, body: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(header + body)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + body)


def config_header(args: argparse.Namespace) -> str:
    items = {k: v for k, v in vars(args).items() if k not in ("func", "config", "verbose")}
    lines = [f"# catgen {__version__} {args.command}"]
    lines += [f"# {k}={json.dumps(v, sort_keys=True)}" for k, v in sorted(items.items())]
    return "\n".join(lines) + "\n"


def _oracle_spec(args) -> OracleSpec:
    return OracleSpec(args.oracle, k=args.k, n=args.n, deterministic=not args.nondet)


def _train_config(args) -> TrainConfig:
    return TrainConfig(learning_rate=args.lr, epochs=args.epochs, seed=args.seed)


def _corpus(args, path=None):
    return read_corpus(path or args.corpus, args.format)


# -- subcommands ------------------------------------------------------------------

def cmd_build_vocab(args) -> int:
    corpus = _corpus(args)
    inv = build_inventory(corpus, args.threshold)
    spec = _oracle_spec(args)
    vocab = build_vocabulary(inv, spec)
    header = config_header(args)
    if args.inventory:
        _write(args.inventory, header, inv.to_text())
    if args.vocab:
        _write(args.vocab, header, vocab.to_text())
    mean_len = mean_sequence_length(inv.categories, vocab)
    stats = (f"{vocab.origin.header()}\n"
             f"categories={len(inv.frequencies)} kept={len(inv)} threshold={inv.threshold}\n"
             f"tags={len(vocab)}\n"
             f"mean_length={mean_len:.4f}\n")
    _write(args.out, header, stats)
    return 0


def cmd_train(args) -> int:
    corpus = _corpus(args)
    inv = _load_inventory(args.inventory) if args.inventory else build_inventory(corpus, args.threshold)
    hyper = _train_config(args)
    if args.component == "generator":
        vocab = _load_vocab(args.vocab) if args.vocab else build_vocabulary(inv, _oracle_spec(args))
        spec = OracleSpec(vocab.origin.kind, vocab.origin.k, vocab.origin.n, deterministic=not args.nondet)
        params = train_generator(corpus, inv, vocab, spec, hyper)
    elif args.component == "classifier":
        params = train_classifier(corpus, inv, hyper)
    else:
        params = train_transition(corpus, inv, hyper)
    for epoch, loss in enumerate(params.loss_history, 1):
        log.info("epoch %d loss %.6f", epoch, loss)
    if not args.model:
        raise CliError("--model output path is required")
    _write(args.model, config_header(args), format_model(params))
    return 0


def _tagger(args, mode: str) -> Tagger:
    inv = _load_inventory(args.inventory)
    vocab = _load_vocab(args.vocab) if args.vocab else None
    kw: Dict[str, object] = {}
    if mode == "tagwise":
        if vocab is None:
            raise CliError("tagwise mode needs --vocab")
        kw["generator"] = _load_model(args.model, vocab=vocab, inventory=inv, component="generator")
    elif mode == "classifier":
        kw["classifier"] = _load_model(args.model, inventory=inv, component="classifier")
    else:
        kw["transition"] = _load_model(args.model, inventory=inv, component="transition")
    kbest = args.kbest or args.beam
    return Tagger(inv, vocab, beam=max(args.beam, kbest), kbest=kbest, **kw)


def cmd_tag(args) -> int:
    if not args.inventory or not args.model:
        raise CliError("tag needs --inventory and --model")
    tagger = _tagger(args, args.mode)
    corpus = _corpus(args)
    out_lines, results = [], []
    for si, sent in enumerate(corpus):
        cats = []
        for i in range(len(sent)):
            if args.mode == "classifier":
                cats.append(tagger.classify(sent.words, i))
                continue
            res = tagger.decode(sent.words, i, args.mode)
            res.sentence_index = si
            results.append(res)
            cats.append(res.best_legal())
        pos = sent.pos or ["-"] * len(sent)
        out_lines.append(" ".join(f"{w}|{p}|{print_category(c) if c is not None else 'UNK'}"
                                  for w, p, c in zip(sent.words, pos, cats)))
    header = config_header(args)
    _write(args.out, header, "\n".join(out_lines) + "\n")
    if args.mode != "classifier":
        if args.kbest_out:
            _write(args.kbest_out, header, format_kbest(results))
        print(f"illegal_rate={illegal_rate(results, tagger.kbest)!r}")
    return 0


def cmd_rerank(args) -> int:
    if not args.kbest_file:
        raise CliError("rerank needs at least one --kbest-file")
    if not args.inventory or not args.model:
        raise CliError("rerank needs --inventory and a classifier --model")
    inv = _load_inventory(args.inventory)
    clf = _load_model(args.model, inventory=inv, component="classifier")
    corpus = _corpus(args)
    dumps = [parse_kbest(_read(path)) for path in args.kbest_file]
    expected = {(si, i) for si, sent in enumerate(corpus) for i in range(len(sent))}
    for path, dump in zip(args.kbest_file, dumps):
        if set(dump) != expected:
            raise CliError(f"k-best dump {path} does not cover the same corpus positions")
    pred_lines = []
    report = ["word\tgold\tchosen\tu\tv\tcombined\tsource"]
    for si, sent in enumerate(corpus):
        chosen = []
        for i in range(len(sent)):
            probs = classifier_distribution(make_context(sent.words, i), inv, clf)
            pool = [(path, e) for path, dump in zip(args.kbest_file, dumps) for e in dump[(si, i)].kbest]
            sc = rerank_position(pool, probs, args.lam, args.nu)
            chosen.append(sc.category)
            report.append(f"{sent.words[i]}\t{print_category(sent.gold[i])}\t{print_category(sc.category)}\t"
                          f"{sc.u!r}\t{sc.v!r}\t{sc.combined!r}\t{sc.source}")
        pos = sent.pos or ["-"] * len(sent)
        pred_lines.append(" ".join(f"{w}|{p}|{print_category(c)}" for w, p, c in zip(sent.words, pos, chosen)))
    header = config_header(args)
    _write(args.out, header, "\n".join(pred_lines) + "\n")
    if args.report:
        _write(args.report, header, "\n".join(report) + "\n")
    return 0


def cmd_eval(args) -> int:
    if not args.pred:
        raise CliError("eval needs --pred")
    gold_corpus = _corpus(args)
    pred_corpus = read_corpus(args.pred, args.format)
    if len(gold_corpus) != len(pred_corpus):
        raise CliError("prediction and gold files have different numbers of sentences")
    gold, pred = [], []
    for gs, ps in zip(gold_corpus, pred_corpus):
        if gs.words != ps.words:
            raise CliError("prediction and gold sentences are not aligned")
        gold += gs.gold
        pred += ps.gold
    inv = _load_inventory(args.inventory) if args.inventory else build_inventory(gold_corpus, 1)
    kbest = None
    if args.kbest_file:
        dump = parse_kbest(_read(args.kbest_file[0]))
        kbest = []
        for si, sent in enumerate(gold_corpus):
            for i in range(len(sent)):
                res = dump.get((si, i))
                kbest.append([e.category for e in res.kbest] if res else [])
    report = evaluate(pred, gold, inv, kbest)
    _write(args.out, config_header(args), render_report(report, args.report_format))
    return 0


def cmd_trace(args) -> int:
    if not args.category:
        raise CliError("trace needs --category")
    cat = parse_category(args.category)
    _write(args.out, "", format_trace(trace(oracle_actions(cat))))
    return 0


# -- argument parsing -----------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option defaults")
    p.add_argument("--corpus")
    p.add_argument("--format", choices=("pipe", "tsv"), default="pipe")
    p.add_argument("--oracle", choices=("ac", "pa", "ng", "or"), default="ac", type=str.lower)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--nondet", action="store_true")
    p.add_argument("--threshold", type=int, default=10)
    p.add_argument("--beam", type=int, default=4)
    p.add_argument("--kbest", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--nu", type=float, default=DEFAULT_NU)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--model")
    p.add_argument("--vocab")
    p.add_argument("--inventory")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catgen", description="CCG supertagging by category generation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="build label inventory and atomic tag vocabulary")
    _common(p)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train", help="train a generator, classifier or transition model")
    _common(p)
    p.add_argument("--component", choices=("generator", "classifier", "transition"), default="generator")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag a corpus")
    _common(p)
    p.add_argument("--mode", choices=("classifier", "tagwise", "transition"), default="tagwise")
    p.add_argument("--kbest-out")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("rerank", help="rerank pooled k-best dumps with a classifier")
    _common(p)
    p.add_argument("--kbest-file", action="append", default=[])
    p.add_argument("--report")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="evaluate predictions against gold")
    _common(p)
    p.add_argument("--pred")
    p.add_argument("--kbest-file", action="append", default=[])
    p.add_argument("--report-format", choices=("text", "tsv"), default="text")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("trace", help="print the oracle transition trace of a category")
    _common(p)
    p.add_argument("--category")
    p.set_defaults(func=cmd_trace)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: List[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    unknown = set(cfg) - known
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
    subparser.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        if args.command != "trace" and not args.corpus:
            raise CliError("--corpus is required")
        if args.kbest is not None and args.kbest > args.beam and args.command == "tag":
            raise CliError("--kbest may not exceed --beam")
        return args.func(args)
    except (CliError, CorpusFormatError, CategoryParseError, ModelFormatError, FingerprintMismatch,
            ValueError, OSError) as err:
        print(f"catgen: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
