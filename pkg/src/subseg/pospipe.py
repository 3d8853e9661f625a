"""Tagged-corpus loading and seq2seq tagging-instance generation."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from typing import IO

from .bpe import BpeApplier, MergeTable
from .core import (
    LineSource,
    SchemeKind,
    SegmentationScheme,
    SegmentedWord,
    SubsegError,
    check_token_text,
    iter_lines,
)
from .io import SegmentedLineCodec

#: Sentinel context entry used when the window extends past the sentence start.
BOS_TOKEN = "<BOS>"

#: Tags are namespaced in source lines so they can never collide with a word
#: unit that happens to share the surface form.
TAG_TOKEN_FORMAT = "<T:{}>"


class TaggedFormatError(SubsegError):
    """A tagged-corpus line is malformed."""


class PosPipeError(SubsegError):
    """Instance generation cannot proceed."""


@dataclass(frozen=True)
class TaggedWord:
    """A word with its native tag sequence, one tag per morpheme."""

    word: str
    tags: tuple[str, ...]

    def __post_init__(self) -> None:
        check_token_text(self.word, "word")
        if not self.tags:
            raise ValueError(f"word {self.word!r} has no tags")
        for tag in self.tags:
            check_token_text(tag, "tag")


@dataclass(frozen=True)
class TagInstance:
    """One training example: two left-context entries, the focus word, its tag sequence."""

    context: tuple[tuple[SegmentedWord, tuple[str, ...]], ...]
    focus: SegmentedWord
    target: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.context) != 2:
            raise ValueError("context holds exactly the two preceding words")
        if not self.target:
            raise ValueError("target tag sequence must be non-empty")


@dataclass(frozen=True)
class TaggedCorpus:
    sentences: tuple[tuple[TaggedWord, ...], ...]
    tag_set: frozenset[str]


def _split_token(token: str, line_no: int, position: int) -> tuple[str, str]:
    """Split WORD|TAGS on the first unescaped '|', resolving word escapes."""
    word_chars: list[str] = []
    i = 0
    while i < len(token):
        ch = token[i]
        if ch == "\\":
            escape = token[i : i + 2]
            if escape == "\\p":
                word_chars.append("|")
            elif escape == "\\+":
                word_chars.append("+")
            else:
                raise TaggedFormatError(
                    f"line {line_no}, token {position}: unknown escape {escape!r}"
                )
            i += 2
        elif ch == "|":
            return "".join(word_chars), token[i + 1 :]
        else:
            word_chars.append(ch)
            i += 1
    raise TaggedFormatError(f"line {line_no}, token {position}: missing '|' tag separator")


def load_tagged(reader: LineSource) -> TaggedCorpus:
    """Parse WORD|TAG1+TAG2... tokens, one sentence per line.

    Literal '|' and '+' inside words arrive escaped as '\\p' and '\\+'.
    Empty lines become empty sentences.
    """
    sentences: list[tuple[TaggedWord, ...]] = []
    tags_seen: set[str] = set()
    for line_no, line in enumerate(iter_lines(reader), start=1):
        row: list[TaggedWord] = []
        for position, token in enumerate(line.split(), start=1):
            word, tag_part = _split_token(token, line_no, position)
            if not word:
                raise TaggedFormatError(f"line {line_no}, token {position}: empty word")
            if "|" in tag_part:
                raise TaggedFormatError(
                    f"line {line_no}, token {position}: unexpected '|' in tags"
                )
            tags = tuple(tag_part.split("+"))
            if not tag_part or any(not tag for tag in tags):
                raise TaggedFormatError(f"line {line_no}, token {position}: empty tag")
            tags_seen.update(tags)
            row.append(TaggedWord(word, tags))
        sentences.append(tuple(row))
    return TaggedCorpus(tuple(sentences), frozenset(tags_seen))


_BOS_ENTRY = (SegmentedWord((BOS_TOKEN,)), ())


def gen_instances(
    sentences: Sequence[Sequence[TaggedWord]],
    scheme: SegmentationScheme,
    *,
    table: MergeTable | None = None,
    morph_rows: Sequence[Sequence[SegmentedWord]] | None = None,
) -> Iterator[TagInstance]:
    """One instance per word token, with a two-word left context.

    Sentence-initial positions are padded with BOS sentinel entries so the
    instance count always equals the token count. The focus and context
    words are segmented per the scheme; targets are always the native tags.
    """
    segment = None
    if scheme.kind is SchemeKind.UNSEG:
        segment = lambda word: SegmentedWord((word,))
    elif scheme.kind is SchemeKind.CHAR:
        segment = lambda word: SegmentedWord(tuple(word))
    elif scheme.kind is SchemeKind.BPE:
        if table is None:
            raise PosPipeError("BPE instance generation needs a merge table")
        segment = BpeApplier(table, scheme.op).segment
    else:
        if morph_rows is None:
            raise PosPipeError("imported segmentation needs pre-segmented rows")
        if len(morph_rows) != len(sentences):
            raise PosPipeError(
                f"{len(morph_rows)} segmented rows for {len(sentences)} sentences"
            )

    for index, sentence in enumerate(sentences):
        if segment is not None:
            row = [segment(tagged.word) for tagged in sentence]
        else:
            row = list(morph_rows[index])
            if len(row) != len(sentence) or any(
                seg.surface != tagged.word for seg, tagged in zip(row, sentence)
            ):
                raise PosPipeError(
                    f"sentence {index + 1}: imported segmentation does not match the tagged words"
                )
        for i, tagged in enumerate(sentence):
            context = tuple(
                _BOS_ENTRY if j < 0 else (row[j], sentence[j].tags) for j in (i - 2, i - 1)
            )
            yield TagInstance(context, row[i], tagged.tags)


def emit_seq2seq(
    instances: Iterable[TagInstance],
    src_out: IO[str],
    tgt_out: IO[str],
    codec: SegmentedLineCodec = SegmentedLineCodec(),
) -> int:
    """Write aligned source and target lines; returns the instance count.

    A source line interleaves each context word's units with its namespaced
    tag tokens, then ends with the focus units. BOS entries render as a bare
    BOS token with no tag block. A target line is the focus word's tags.
    """
    count = 0
    for instance in instances:
        tokens: list[str] = []
        for word, tags in instance.context:
            tokens.extend(codec.render_word(word))
            tokens.extend(TAG_TOKEN_FORMAT.format(tag) for tag in tags)
        tokens.extend(codec.render_word(instance.focus))
        src_out.write(" ".join(tokens))
        src_out.write("\n")
        tgt_out.write(" ".join(instance.target))
        tgt_out.write("\n")
        count += 1
    return count
