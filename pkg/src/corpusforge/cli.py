"""``corpusforge`` command line: one subcommand per pipeline stage.

    corpusforge clean --in raw.txt --out clean.txt
    corpusforge stats --in wiki=clean.txt
    corpusforge sample-dev --in wiki=clean.txt --n 5000 --out dev.txt --train-dir train/
    corpusforge train-vocab --in train/wiki.txt --out vocab.txt --size 50000
    corpusforge measure --vocab vocab.txt --in dev.txt
    corpusforge tokenize --vocab vocab.txt --in dev.txt
    corpusforge prep --vocab vocab.txt --in train/wiki.txt --out-dir instances/

Exit status is 0 on success, 2 for usage errors (bad flags, missing input)
and 1 for failures while running. Logs go to stderr; data goes to files or
stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from ._parallel import ordered_map
from .cleaner import CleanAborted, clean_stream, open_input
from .config import PipelineConfig, load_config
from .pretrain import SpecialIds, masked_instances, shard_name, write_instances
from .stats import corpus_stats, sample_dev
from .tokenizer import WordPieceTokenizer, measure
from .vocab import (
    count_words,
    load_vocab,
    read_word_counts,
    save_vocab,
    train_bpe,
    write_word_counts,
)

log = logging.getLogger("corpusforge")


class UsageError(Exception):
    pass


def _text_lines(paths):
    """Decoded lines (without newline) from plain or gzipped files, in order."""
    for path in paths:
        with open_input(path) as raw:
            for line in io.TextIOWrapper(raw, encoding="utf-8", errors="replace", newline="\n"):
                yield line.rstrip("\n")


def _named_inputs(specs: list[str] | None, cfg: PipelineConfig) -> dict[str, str]:
    if not specs:
        if not cfg.inputs:
            raise UsageError("no inputs given (use --in NAME=PATH or an [inputs] config section)")
        return dict(cfg.inputs)
    named = {}
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = Path(spec).name.split(".")[0], spec
        if name in named:
            raise UsageError(f"duplicate corpus name {name!r}")
        named[name] = path
    return named


def _require_files(paths) -> None:
    for path in paths:
        if str(path) != "-" and not Path(path).is_file():
            raise UsageError(f"input not found: {path}")


def _override(obj, **changes):
    changes = {k: v for k, v in changes.items() if v is not None}
    return dataclasses.replace(obj, **changes) if changes else obj


# --- subcommands -----------------------------------------------------------------------


def cmd_clean(args, cfg: PipelineConfig) -> int:
    paths = args.inputs or list(cfg.inputs.values())
    if not paths:
        raise UsageError("no inputs given")
    _require_files(paths)
    clean_cfg = _override(
        cfg.clean,
        min_line_chars=args.min_line_chars,
        max_digit_ratio=args.max_digit_ratio,
        max_non_ascii_ratio=args.max_non_ascii_ratio,
        min_letter_ratio=args.min_letter_ratio,
        strip_urls=False if args.keep_urls else None,
        strip_emails=False if args.keep_emails else None,
        normalize_romanian_cedilla=False if args.keep_cedilla else None,
    )
    if args.forbid:
        clean_cfg = clean_cfg.with_forbidden(args.forbid)

    def records():
        for path in paths:
            with open_input(path) as f:
                yield from f

    to_stdout = args.out == "-"
    out = sys.stdout if to_stdout else open(args.out, "w", encoding="utf-8", newline="\n")
    try:
        report = clean_stream(records(), out, clean_cfg, workers=cfg.workers)
    except CleanAborted as exc:
        print(exc.report.to_json(), file=sys.stderr)
        raise
    finally:
        if not to_stdout:
            out.close()
    print(report.to_json(), file=sys.stderr if to_stdout else sys.stdout)
    if args.report:
        Path(args.report).write_text(report.to_json(indent=2) + "\n", encoding="utf-8")
    log.info("cleaned %d -> %d lines at %.2f MB/s", report.lines_in, report.lines_out, report.throughput_mb_s)
    return 0


def cmd_stats(args, cfg: PipelineConfig) -> int:
    named = _named_inputs(args.inputs, cfg)
    _require_files(named.values())
    stats = corpus_stats(named)
    print(stats.format_table() if args.table else stats.to_json(indent=2))
    return 0


def cmd_sample_dev(args, cfg: PipelineConfig) -> int:
    named = _named_inputs(args.inputs, cfg)
    _require_files(named.values())
    manifest = args.manifest or f"{args.out}.manifest.tsv"
    sample = sample_dev(
        named, n=args.n, seed=cfg.seed, dev_path=args.out, manifest_path=manifest, train_dir=args.train_dir, weight=args.weight
    )
    print(json.dumps({"dev": args.out, "manifest": manifest, "quotas": sample.quotas}))
    return 0


def cmd_train_vocab(args, cfg: PipelineConfig) -> int:
    vcfg = _override(
        cfg.vocab,
        vocab_size=args.size,
        alphabet_cap=args.alphabet_cap,
        casing=args.casing,
        strip_accents=True if args.strip_accents else None,
        min_pair_frequency=args.min_pair_frequency,
    )
    if args.word_counts:
        _require_files([args.word_counts])
        counts = read_word_counts(args.word_counts)
    else:
        paths = args.inputs or list(cfg.inputs.values())
        if not paths:
            raise UsageError("train-vocab needs --in or --word-counts")
        _require_files(paths)
        counts = count_words(_text_lines(paths), vcfg, workers=cfg.workers)
    if args.save_word_counts:
        write_word_counts(args.save_word_counts, counts)
    log.info("training on %d word types (vocab_size=%d, casing=%s)", len(counts), vcfg.vocab_size, vcfg.casing)
    vocab = train_bpe(counts, vcfg)
    save_vocab(vocab, args.out)
    print(json.dumps({"vocab": args.out, "pieces": len(vocab), "merges": len(vocab.merges), "alphabet": len(vocab.alphabet)}))
    return 0


def cmd_tokenize(args, cfg: PipelineConfig) -> int:
    _require_files([args.vocab, *args.inputs])
    tok = WordPieceTokenizer(load_vocab(args.vocab))
    out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8", newline="\n")
    try:
        for line in _text_lines(args.inputs):
            result = tok.tokenize_line(line)
            items = result.ids if args.ids else result.pieces
            out.write(" ".join(map(str, items)) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_measure(args, cfg: PipelineConfig) -> int:
    _require_files([args.vocab, *args.inputs])
    metrics = measure(_text_lines(args.inputs), load_vocab(args.vocab), workers=cfg.workers)
    print(metrics.to_json())
    return 0


def _prep_shard(batch, vocab_path: str, pcfg):
    # ordered_map hands over batches; each prep batch is a single shard
    (shard, path, out_path), = batch
    vocab = load_vocab(vocab_path)
    instances = masked_instances(lambda: _text_lines([path]), vocab, pcfg, stream=shard)
    return shard, write_instances(instances, out_path)


def cmd_prep(args, cfg: PipelineConfig) -> int:
    paths = args.inputs or list(cfg.inputs.values())
    if not paths:
        raise UsageError("no inputs given")
    _require_files([args.vocab, *paths])
    pcfg = _override(
        cfg.pretrain,
        max_seq_len=args.max_seq_len,
        mask_rate=args.mask_rate,
        short_seq_prob=args.short_seq_prob,
        dupe_factor=args.dupe_factor,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [[(i, str(p), str(out_dir / shard_name(pcfg.max_seq_len, i)))] for i, p in enumerate(paths)]
    counts = dict(ordered_map(_prep_shard, jobs, cfg.workers, str(args.vocab), pcfg))
    vocab = load_vocab(args.vocab)
    meta = {
        "max_seq_len": pcfg.max_seq_len,
        "mask_rate": pcfg.mask_rate,
        "special_ids": dataclasses.asdict(SpecialIds.from_vocab(vocab)),
        "shards": {shard_name(pcfg.max_seq_len, i): counts[i] for i in range(len(paths))},
    }
    meta_path = out_dir / f"instances-{pcfg.max_seq_len}.meta.json"
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(json.dumps({"instances": sum(counts.values()), "shards": len(paths), "meta": str(meta_path)}))
    return 0


# --- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file with [sections]")
    common.add_argument("--workers", type=int, help="worker processes (default 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="corpusforge", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", parents=[common], help="clean raw text line by line")
    p.add_argument("--in", dest="inputs", action="append", metavar="PATH")
    p.add_argument("--out", required=True, help="output path, or - for stdout")
    p.add_argument("--report", help="also write the report JSON here")
    p.add_argument("--min-line-chars", type=int)
    p.add_argument("--max-digit-ratio", type=float)
    p.add_argument("--max-non-ascii-ratio", type=float)
    p.add_argument("--min-letter-ratio", type=float)
    p.add_argument("--keep-urls", action="store_true")
    p.add_argument("--keep-emails", action="store_true")
    p.add_argument("--keep-cedilla", action="store_true", help="do not rewrite cedilla s/t to comma-below")
    p.add_argument("--forbid", metavar="CHARS", help="extra forbidden characters")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("stats", parents=[common], help="line/word/byte counts per corpus")
    p.add_argument("--in", dest="inputs", action="append", metavar="NAME=PATH")
    p.add_argument("--table", action="store_true", help="print a text table instead of JSON")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sample-dev", parents=[common], help="proportional held-out dev sample")
    p.add_argument("--in", dest="inputs", action="append", metavar="NAME=PATH")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest")
    p.add_argument("--train-dir", help="re-emit each corpus here without the sampled lines")
    p.add_argument("--weight", choices=["lines", "words", "bytes"], default="lines", help="what corpus size means for the quotas")
    p.set_defaults(func=cmd_sample_dev)

    p = sub.add_parser("train-vocab", parents=[common], help="train a BPE vocabulary in WordPiece format")
    p.add_argument("--in", dest="inputs", action="append", metavar="PATH")
    p.add_argument("--word-counts", help="train from a word<TAB>count file instead of text")
    p.add_argument("--save-word-counts")
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int)
    p.add_argument("--alphabet-cap", type=int)
    p.add_argument("--casing", choices=["cased", "uncased"])
    p.add_argument("--strip-accents", action="store_true")
    p.add_argument("--min-pair-frequency", type=int)
    p.set_defaults(func=cmd_train_vocab)

    p = sub.add_parser("tokenize", parents=[common], help="print pieces, one input line per output line")
    p.add_argument("--vocab", required=True)
    p.add_argument("--in", dest="inputs", action="append", required=True, metavar="PATH")
    p.add_argument("--out", default="-")
    p.add_argument("--ids", action="store_true", help="print ids instead of pieces")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("measure", parents=[common], help="tokens/word and UNK/word")
    p.add_argument("--vocab", required=True)
    p.add_argument("--in", dest="inputs", action="append", required=True, metavar="PATH")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("prep", parents=[common], help="write masked-LM instances")
    p.add_argument("--vocab", required=True)
    p.add_argument("--in", dest="inputs", action="append", metavar="PATH", help="one shard per input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--max-seq-len", type=int)
    p.add_argument("--mask-rate", type=float)
    p.add_argument("--short-seq-prob", type=float)
    p.add_argument("--dupe-factor", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_prep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.config and not Path(args.config).is_file():
            raise UsageError(f"config file not found: {args.config}")
        cfg = load_config(args.config)
        if args.workers is not None:
            cfg = dataclasses.replace(cfg, workers=args.workers)
        if getattr(args, "seed", None) is not None:
            if args.command == "prep":
                cfg = dataclasses.replace(cfg, pretrain=dataclasses.replace(cfg.pretrain, seed=args.seed))
            else:
                cfg = dataclasses.replace(cfg, seed=args.seed)
    except UsageError as exc:
        parser.error(str(exc))
    except ValueError as exc:
        print(f"corpusforge: configuration error: {exc}", file=sys.stderr)
        return 1
    seed = cfg.pretrain.seed if args.command == "prep" else cfg.seed
    log.info("command=%s config_digest=%s seed=%s", args.command, cfg.digest(), seed)
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError, KeyError) as exc:
        print(f"corpusforge {args.command}: {exc}", file=sys.stderr)
        return 1


run = main

if __name__ == "__main__":
    sys.exit(main())
