"""Multi-command front end wiring the segmentation pipelines together.

Exit codes: 0 success, 1 usage error, 2 data error. Data goes to the output
stream or files, diagnostics to stderr. Every run that writes to a file also
writes a flat key=value manifest of its resolved parameters next to the
primary output; re-running the command line rebuilt from a manifest yields
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import ExitStack
from typing import IO

from . import analysis, bpe, charseg, core, normalize, pospipe
from .core import CorpusFormatError, Sentinels, SubsegError
from .io import SegmentedLineCodec

THREADS_ENV_VAR = "SUBSEG_THREADS"


class UsageError(Exception):
    """Bad flags or flag combinations; exits with status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _open_input(path: str, stack: ExitStack) -> IO[bytes]:
    if path == "-":
        return sys.stdin.buffer
    return stack.enter_context(open(path, "rb"))


def _open_output(path: str, stack: ExitStack) -> IO[str]:
    if path == "-":
        return sys.stdout
    return stack.enter_context(open(path, "w", encoding="utf-8", newline=""))


def _display_name(path: str) -> str:
    return "stdin" if path == "-" else path


def _prefix_errors(path: str):
    """Context manager adding the input file name to data-error messages."""

    class _Wrap:
        def __enter__(self):
            return None

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, SubsegError):
                raise type(exc)(f"{_display_name(path)}: {exc}") from exc
            return False

    return _Wrap()


def _check_reserved(word: str, sentinels: Sentinels, line_no: int) -> None:
    for sentinel in sentinels.all():
        if sentinel in word:
            raise CorpusFormatError(
                f"line {line_no}: token {word!r} contains reserved string {sentinel!r}"
            )


def _write_manifest(output_path: str, command: str, params: dict[str, object]) -> None:
    if output_path == "-":
        return
    lines = [f"command={command}"]
    for key in sorted(params):
        value = params[key]
        if value is None or value is False:
            continue
        if value is True:
            value = "true"
        lines.append(f"{key}={value}")
    with open(output_path + ".manifest", "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")


def argv_from_manifest(text: str) -> list[str]:
    """Rebuild the command line recorded in a manifest."""
    command: str | None = None
    argv: list[str] = []
    for line in text.splitlines():
        if not line:
            continue
        key, _, value = line.partition("=")
        if key == "command":
            command = value
        elif value == "true":
            argv.append(f"--{key.replace('_', '-')}")
        else:
            argv.extend((f"--{key.replace('_', '-')}", value))
    if command is None:
        raise SubsegError("manifest has no command entry")
    return [command, *argv]


def _thread_cap() -> int:
    """Validate the parallelism cap; processing is sequential, so any cap holds."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return 0
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    if cap < 0:
        raise UsageError(f"{THREADS_ENV_VAR} must be non-negative, got {cap}")
    return cap


def _sentinels(args: argparse.Namespace) -> Sentinels:
    boundary = getattr(args, "boundary", core.DEFAULT_BOUNDARY)
    unk = getattr(args, "unk", core.DEFAULT_UNK)
    marker = getattr(args, "marker", core.DEFAULT_CONTINUATION)
    try:
        return Sentinels(boundary=boundary, unk=unk, continuation=marker)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _codec(args: argparse.Namespace) -> SegmentedLineCodec:
    try:
        return SegmentedLineCodec(
            continuation_marker=getattr(args, "marker", core.DEFAULT_CONTINUATION),
            boundary_symbol=getattr(args, "boundary", core.DEFAULT_BOUNDARY),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_ops(spec: str) -> list[analysis.OpRequest]:
    ops: list[analysis.OpRequest] = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if chunk == analysis.SATURATED:
            ops.append(analysis.SATURATED)
            continue
        try:
            ops.append(int(chunk))
        except ValueError:
            raise UsageError(
                f"--ops takes integers or '{analysis.SATURATED}', got {chunk!r}"
            ) from None
    if not ops:
        raise UsageError("--ops needs at least one value")
    return ops


def _manifest_params(args: argparse.Namespace, names: list[str]) -> dict[str, object]:
    return {name: getattr(args, name) for name in names}


# --- command handlers -------------------------------------------------------


def _cmd_train_bpe(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        with _prefix_errors(args.input):
            corpus = core.load_corpus(_open_input(args.input, stack))
        table = bpe.bpe_train(corpus, args.op)
        if table.op < args.op:
            print(
                f"training stopped early after {table.op} rules "
                f"(no pair occurs {bpe.MIN_PAIR_FREQUENCY} times)",
                file=sys.stderr,
            )
        out = _open_output(args.output, stack)
        bpe.write_merges(table, out)
        if args.write_vocab:
            vocab_out = _open_output(args.write_vocab, stack)
            bpe.write_vocab(bpe.BpeVocab.from_corpus(corpus), vocab_out)
    _write_manifest(
        args.output, "train-bpe", _manifest_params(args, ["input", "op", "output", "write_vocab"])
    )
    return 0


def _cmd_apply_bpe(args: argparse.Namespace) -> int:
    sentinels = _sentinels(args)
    codec = _codec(args)
    with ExitStack() as stack:
        with _prefix_errors(args.merges):
            table = bpe.read_merges(_open_input(args.merges, stack))
        k = table.op if args.k is None else args.k
        applier = bpe.BpeApplier(table, k)
        vocab = None
        if args.vocab:
            with _prefix_errors(args.vocab):
                vocab = bpe.read_vocab(_open_input(args.vocab, stack))
        unk_word = core.SegmentedWord((sentinels.unk,))
        unk_count = 0
        out = _open_output(args.output, stack)
        with _prefix_errors(args.input):
            for line_no, line in enumerate(
                core.iter_lines(_open_input(args.input, stack)), start=1
            ):
                row: list[core.SegmentedWord] = []
                for word in line.split():
                    _check_reserved(word, sentinels, line_no)
                    if vocab is not None and word not in vocab:
                        row.append(unk_word)
                        unk_count += 1
                    else:
                        row.append(applier.segment(word))
                out.write(codec.render_row(row))
                out.write("\n")
        if vocab is not None:
            print(f"unk_count={unk_count}", file=sys.stderr)
    args.k = k
    _write_manifest(
        args.output,
        "apply-bpe",
        _manifest_params(args, ["merges", "k", "input", "output", "vocab", "unk", "marker", "boundary"]),
    )
    return 0


def _cmd_segment_chars(args: argparse.Namespace) -> int:
    try:
        config = charseg.CharSegConfig(args.boundary, args.max_units)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sentinels = _sentinels(args)
    with ExitStack() as stack:
        out = _open_output(args.output, stack)
        with _prefix_errors(args.input):
            for line_no, line in enumerate(
                core.iter_lines(_open_input(args.input, stack)), start=1
            ):
                words = line.split()
                for word in words:
                    _check_reserved(word, sentinels, line_no)
                units = charseg.char_segment(words, config)
                if charseg.exceeds_unit_limit(units, config):
                    print(
                        f"line {line_no}: {len(units)} units exceed the limit of {args.max_units}",
                        file=sys.stderr,
                    )
                out.write(" ".join(units))
                out.write("\n")
    _write_manifest(
        args.output,
        "segment-chars",
        _manifest_params(args, ["input", "output", "boundary", "max_units"]),
    )
    return 0


def _cmd_desegment(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        out = _open_output(args.output, stack)
        lines = core.iter_lines(_open_input(args.input, stack))
        if args.chars:
            try:
                config = charseg.CharSegConfig(boundary_symbol=args.boundary)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            with _prefix_errors(args.input):
                for line_no, line in enumerate(lines, start=1):
                    try:
                        sentence = charseg.char_desegment(line.split(), config)
                    except charseg.CharSegError as exc:
                        raise charseg.CharSegError(f"line {line_no}: {exc}") from exc
                    out.write(" ".join(sentence))
                    out.write("\n")
        else:
            codec = _codec(args)
            with _prefix_errors(args.input):
                for line_no, line in enumerate(lines, start=1):
                    row = codec.parse_row(line, line_no)
                    words: list[str] = []
                    for position, word in enumerate(row, start=1):
                        if args.unk in word.units:
                            raise bpe.BpeError(
                                f"sentence {line_no}, word {position}: "
                                "UNK unit cannot be inverted"
                            )
                        words.append(word.surface)
                    out.write(" ".join(words))
                    out.write("\n")
    _write_manifest(
        args.output,
        "desegment",
        _manifest_params(args, ["input", "output", "marker", "boundary", "unk", "chars"]),
    )
    return 0


def _cmd_normalize(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        if args.no_normalize:
            config = normalize.NormalizationConfig.disabled()
        elif args.rules:
            with _prefix_errors(args.rules):
                config = normalize.load_rules(_open_input(args.rules, stack))
        else:
            config = normalize.NormalizationConfig()
        out = _open_output(args.output, stack)
        with _prefix_errors(args.input):
            for line in core.iter_lines(_open_input(args.input, stack)):
                text = normalize.normalize_text(line, config)
                if args.separate_punct:
                    text = " ".join(normalize.separate_punctuation(text))
                out.write(text)
                out.write("\n")
    _write_manifest(
        args.output,
        "normalize",
        _manifest_params(args, ["input", "output", "rules", "no_normalize", "separate_punct"]),
    )
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        with _prefix_errors(args.input):
            stats = core.stream_stats(_open_input(args.input, stack))
        out = _open_output(args.output, stack)
        out.write(f"tokens={stats.tokens}\n")
        out.write(f"types={stats.types}\n")
        out.write(f"sentences={stats.sentences}\n")
        out.write(f"mean_word_len_chars={stats.mean_word_len_chars:.4f}\n")
    _write_manifest(args.output, "stats", _manifest_params(args, ["input", "output"]))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    ops = _parse_ops(args.ops)
    with ExitStack() as stack:
        with _prefix_errors(args.src):
            src = core.load_corpus(_open_input(args.src, stack))
        with _prefix_errors(args.tgt):
            tgt = core.load_corpus(_open_input(args.tgt, stack))
        with _prefix_errors(args.merges):
            table = bpe.read_merges(_open_input(args.merges, stack))
        tgt_table = None
        if args.tgt_merges:
            with _prefix_errors(args.tgt_merges):
                tgt_table = bpe.read_merges(_open_input(args.tgt_merges, stack))
        elif args.tgt_k is not None:
            raise UsageError("--tgt-k needs --tgt-merges")
        points = analysis.op_sweep(
            src,
            tgt,
            table,
            ops,
            tgt_table=tgt_table,
            tgt_k=args.tgt_k,
            ratio_direction=args.ratio_direction,
        )
        out = _open_output(args.output, stack)
        out.write(analysis.emit_sweep_tsv(points))
    _write_manifest(
        args.output,
        "sweep",
        _manifest_params(
            args, ["src", "tgt", "merges", "ops", "tgt_merges", "tgt_k", "ratio_direction", "output"]
        ),
    )
    return 0


def _cmd_oov(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        with _prefix_errors(args.vocab):
            vocab = bpe.read_vocab(_open_input(args.vocab, stack))
        with _prefix_errors(args.input):
            test = core.load_corpus(_open_input(args.input, stack))
        report = analysis.oov_report(vocab, test, top_n=args.top_n)
        out = _open_output(args.output, stack)
        out.write(f"oov_types={report.oov_types}\n")
        out.write(f"oov_tokens={report.oov_tokens}\n")
        for word in report.examples:
            out.write(f"example={word} {test.type_counts[word]}\n")
    _write_manifest(
        args.output, "oov", _manifest_params(args, ["vocab", "input", "top_n", "output"])
    )
    return 0


def _cmd_consistency(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        with _prefix_errors(args.input):
            corpus = core.load_corpus(_open_input(args.input, stack))
        with _prefix_errors(args.merges):
            table = bpe.read_merges(_open_input(args.merges, stack))
        k = table.op if args.k is None else args.k
        applier = bpe.BpeApplier(table, k)
        segmented = {word: applier.segment(word) for word in corpus.type_counts}
        pairs = analysis.consistency_report(
            segmented, corpus.type_counts, min_lcp=args.min_lcp, top_n=args.top_n
        )
        out = _open_output(args.output, stack)
        out.write(analysis.emit_consistency_tsv(pairs, segmented))
    args.k = k
    _write_manifest(
        args.output,
        "consistency",
        _manifest_params(args, ["input", "merges", "k", "min_lcp", "top_n", "output"]),
    )
    return 0


def _cmd_pos_prep(args: argparse.Namespace) -> int:
    if args.scheme == "bpe" and not args.merges:
        raise UsageError("--scheme bpe needs --merges")
    if args.scheme != "bpe" and (args.merges or args.k is not None):
        raise UsageError("--merges/--k only apply to --scheme bpe")
    if args.scheme == "morph" and not args.morph_file:
        raise UsageError("--scheme morph needs --morph-file")
    if args.scheme != "morph" and args.morph_file:
        raise UsageError("--morph-file only applies to --scheme morph")

    codec = _codec(args)
    with ExitStack() as stack:
        with _prefix_errors(args.input):
            tagged = pospipe.load_tagged(_open_input(args.input, stack))
        table = None
        morph_rows = None
        if args.scheme == "unseg":
            scheme = core.SegmentationScheme.unsegmented()
        elif args.scheme == "char":
            scheme = core.SegmentationScheme.characters()
        elif args.scheme == "bpe":
            with _prefix_errors(args.merges):
                table = bpe.read_merges(_open_input(args.merges, stack))
            k = table.op if args.k is None else args.k
            if not 0 <= k <= table.op:
                raise bpe.BpeError(
                    f"k={k} exceeds the table's {table.op} rules; train a deeper table"
                )
            args.k = k
            scheme = core.SegmentationScheme.bpe(k)
        else:
            from .io import read_segmented

            with _prefix_errors(args.morph_file):
                morph_rows = list(read_segmented(_open_input(args.morph_file, stack), codec))
            scheme = core.SegmentationScheme.morph_imported(args.morph_file)
        instances = pospipe.gen_instances(
            tagged.sentences, scheme, table=table, morph_rows=morph_rows
        )
        src_out = _open_output(args.output_prefix + ".src", stack)
        tgt_out = _open_output(args.output_prefix + ".tgt", stack)
        count = pospipe.emit_seq2seq(instances, src_out, tgt_out, codec)
    print(f"instances={count}", file=sys.stderr)
    _write_manifest(
        args.output_prefix,
        "pos-prep",
        _manifest_params(
            args,
            ["input", "scheme", "merges", "k", "morph_file", "output_prefix", "marker", "boundary"],
        ),
    )
    return 0


# --- parser ------------------------------------------------------------------


def _add_io_flags(parser: argparse.ArgumentParser, output_default: str = "-") -> None:
    parser.add_argument("--input", "-i", default="-", help="input file (default: stdin)")
    parser.add_argument(
        "--output", "-o", default=output_default, help="output file (default: stdout)"
    )


def _add_marker_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--marker",
        default=core.DEFAULT_CONTINUATION,
        help="continuation marker for non-final units (default: %(default)s)",
    )
    parser.add_argument(
        "--boundary",
        default=core.DEFAULT_BOUNDARY,
        help="word-boundary symbol for character-level text (default: %(default)s)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("train-bpe", help="learn merge rules from a corpus")
    _add_io_flags(p)
    p.add_argument(
        "--op",
        type=int,
        default=30000,
        help="number of merge rules to learn; 30000 suits source-side pipelines, "
        "90000 target-side ones (default: %(default)s)",
    )
    p.add_argument("--write-vocab", default=None, help="also write the training word list here")
    p.set_defaults(handler=_cmd_train_bpe)

    p = sub.add_parser("apply-bpe", help="segment a corpus with learned merge rules")
    _add_io_flags(p)
    p.add_argument("--merges", "-m", required=True, help="merges file from train-bpe")
    p.add_argument(
        "--k", type=int, default=None, help="apply only the first K rules (default: all)"
    )
    p.add_argument(
        "--vocab",
        default=None,
        help="word list enabling constrained mode: words not listed become one UNK unit",
    )
    p.add_argument(
        "--unk", default=core.DEFAULT_UNK, help="UNK replacement string (default: %(default)s)"
    )
    _add_marker_flags(p)
    p.set_defaults(handler=_cmd_apply_bpe)

    p = sub.add_parser("segment-chars", help="split every word into characters")
    _add_io_flags(p)
    p.add_argument(
        "--boundary",
        default=core.DEFAULT_BOUNDARY,
        help="word-boundary symbol (default: %(default)s)",
    )
    p.add_argument(
        "--max-units",
        type=int,
        default=500,
        help="warn when a sentence exceeds this many units (default: %(default)s)",
    )
    p.set_defaults(handler=_cmd_segment_chars)

    p = sub.add_parser("desegment", help="invert a segmented file back to plain text")
    _add_io_flags(p)
    p.add_argument(
        "--chars",
        action="store_true",
        help="input is character-level (boundary symbols) rather than marker-joined",
    )
    p.add_argument(
        "--unk", default=core.DEFAULT_UNK, help="UNK string to reject (default: %(default)s)"
    )
    _add_marker_flags(p)
    p.set_defaults(handler=_cmd_desegment)

    p = sub.add_parser("normalize", help="rewrite characters and separate punctuation")
    _add_io_flags(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--rules", default=None, help="rules file (FROM<TAB>TO, U+XXXX escapes)")
    group.add_argument(
        "--no-normalize", action="store_true", help="disable the rewrite pass entirely"
    )
    p.add_argument(
        "--separate-punct",
        action="store_true",
        help="additionally split punctuation marks into their own tokens",
    )
    p.set_defaults(handler=_cmd_normalize)

    p = sub.add_parser("stats", help="token/type/sentence counts for a corpus")
    _add_io_flags(p)
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("sweep", help="token counts and ratio across merge-count settings")
    p.add_argument("--src", required=True, help="corpus segmented at each requested prefix")
    p.add_argument("--tgt", required=True, help="reference corpus for the token ratio")
    p.add_argument("--merges", "-m", required=True, help="merges file for the swept side")
    p.add_argument(
        "--ops",
        required=True,
        help=f"comma-separated merge counts, e.g. 0,15000,30000,{analysis.SATURATED}",
    )
    p.add_argument("--tgt-merges", default=None, help="optional merges file for the target side")
    p.add_argument(
        "--tgt-k", type=int, default=None, help="prefix applied to the target side (default: all)"
    )
    p.add_argument(
        "--ratio-direction",
        choices=["src/tgt", "tgt/src"],
        default="src/tgt",
        help="direction of the reported ratio (default: %(default)s)",
    )
    p.add_argument("--output", "-o", default="-", help="output TSV (default: stdout)")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("oov", help="out-of-vocabulary types and tokens of a test corpus")
    _add_io_flags(p)
    p.add_argument("--vocab", required=True, help="training word list (one word per line)")
    p.add_argument(
        "--top-n", type=int, default=10, help="how many example types to list (default: %(default)s)"
    )
    p.set_defaults(handler=_cmd_oov)

    p = sub.add_parser(
        "consistency", help="report word pairs with divergent boundaries in a shared prefix"
    )
    _add_io_flags(p)
    p.add_argument("--merges", "-m", required=True, help="merges file")
    p.add_argument(
        "--k", type=int, default=None, help="apply only the first K rules (default: all)"
    )
    p.add_argument(
        "--min-lcp",
        type=int,
        default=4,
        help="minimum shared-prefix length in characters (default: %(default)s)",
    )
    p.add_argument(
        "--top-n", type=int, default=20, help="report at most this many pairs (default: %(default)s)"
    )
    p.set_defaults(handler=_cmd_consistency)

    p = sub.add_parser("pos-prep", help="compile a tagged corpus into seq2seq tagging instances")
    p.add_argument("--input", "-i", default="-", help="tagged corpus (WORD|TAG1+TAG2 tokens)")
    p.add_argument(
        "--scheme",
        choices=["unseg", "char", "bpe", "morph"],
        default="unseg",
        help="segmentation applied to focus and context words (default: %(default)s)",
    )
    p.add_argument("--merges", "-m", default=None, help="merges file (with --scheme bpe)")
    p.add_argument(
        "--k", type=int, default=None, help="apply only the first K rules (default: all)"
    )
    p.add_argument(
        "--morph-file", default=None, help="externally segmented file (with --scheme morph)"
    )
    p.add_argument(
        "--output-prefix", required=True, help="writes PREFIX.src and PREFIX.tgt"
    )
    _add_marker_flags(p)
    p.set_defaults(handler=_cmd_pos_prep)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        _thread_cap()
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (SubsegError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
