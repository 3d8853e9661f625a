"""Shared domain types: corpora, segmented words, schemes, and reserved sentinels."""

from __future__ import annotations

import hashlib
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import IO, Union

DEFAULT_BOUNDARY = "▁"
DEFAULT_UNK = "<unk>"
DEFAULT_CONTINUATION = "@@"

#: One word: a non-empty string without internal whitespace.
Word = str
#: One subword unit, treated as atomic.
Symbol = str
#: One sentence: an ordered list of words.
Sentence = tuple[str, ...]

LineSource = Union[IO[bytes], IO[str], Iterable[str]]


class SubsegError(Exception):
    """Base class for all data errors raised by this toolkit."""


class CorpusFormatError(SubsegError):
    """Input text violates the corpus format contract."""


def check_token_text(text: str, what: str) -> None:
    """Reject empty strings and strings containing whitespace."""
    if not text:
        raise ValueError(f"{what} must be non-empty")
    if any(ch.isspace() for ch in text):
        raise ValueError(f"{what} {text!r} contains whitespace")


@dataclass(frozen=True)
class Sentinels:
    """Reserved strings that may never occur verbatim inside input tokens.

    Keeping them out of the data is what makes every segmentation in this
    toolkit losslessly invertible.
    """

    boundary: str = DEFAULT_BOUNDARY
    unk: str = DEFAULT_UNK
    continuation: str = DEFAULT_CONTINUATION

    def __post_init__(self) -> None:
        values = (self.boundary, self.unk, self.continuation)
        for value in values:
            check_token_text(value, "sentinel")
        if len(set(values)) != 3:
            raise ValueError("sentinels must be pairwise distinct")

    def all(self) -> tuple[str, str, str]:
        return (self.boundary, self.unk, self.continuation)


@dataclass(frozen=True)
class SegmentedWord:
    """Subword units of one word; every unit except the last is joiner-marked.

    The continuation flag carries no independent state: it is set on exactly
    the non-final units, so only the unit sequence is stored.
    """

    units: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.units:
            raise ValueError("a segmented word needs at least one unit")
        for unit in self.units:
            check_token_text(unit, "unit")

    @property
    def surface(self) -> str:
        """The original word: unit texts concatenated."""
        return "".join(self.units)

    def split_positions(self) -> frozenset[int]:
        """Character offsets of the internal unit boundaries, counted from the word start."""
        positions = []
        total = 0
        for unit in self.units[:-1]:
            total += len(unit)
            positions.append(total)
        return frozenset(positions)


class SchemeKind(Enum):
    UNSEG = "unseg"
    CHAR = "char"
    BPE = "bpe"
    MORPH_IMPORTED = "morph"


@dataclass(frozen=True)
class SegmentationScheme:
    """Selector for how words map to subword units.

    A BPE scheme carries the number of merge rules applied; an imported
    scheme records the external file it was read from.
    """

    kind: SchemeKind
    op: int | None = None
    source: str | None = None

    def __post_init__(self) -> None:
        if self.kind is SchemeKind.BPE:
            if self.op is None or self.op < 0:
                raise ValueError("a BPE scheme carries a non-negative merge count")
        elif self.op is not None:
            raise ValueError(f"{self.kind.value} scheme takes no merge count")
        if self.kind is SchemeKind.MORPH_IMPORTED:
            if not self.source:
                raise ValueError("an imported scheme records the file it was read from")
        elif self.source is not None:
            raise ValueError(f"{self.kind.value} scheme takes no source file")

    @classmethod
    def unsegmented(cls) -> "SegmentationScheme":
        return cls(SchemeKind.UNSEG)

    @classmethod
    def characters(cls) -> "SegmentationScheme":
        return cls(SchemeKind.CHAR)

    @classmethod
    def bpe(cls, op: int) -> "SegmentationScheme":
        return cls(SchemeKind.BPE, op=op)

    @classmethod
    def morph_imported(cls, source: str) -> "SegmentationScheme":
        return cls(SchemeKind.MORPH_IMPORTED, source=source)


@dataclass(frozen=True)
class Corpus:
    """Immutable sentence list with cached token and type counts."""

    sentences: tuple[tuple[str, ...], ...]
    token_count: int
    type_counts: Mapping[str, int]

    @classmethod
    def from_sentences(cls, sentences: Iterable[Sequence[str]]) -> "Corpus":
        rows = tuple(tuple(sentence) for sentence in sentences)
        counts: Counter[str] = Counter()
        for row in rows:
            counts.update(row)
        return cls(rows, sum(counts.values()), dict(counts))

    def lines(self) -> Iterator[str]:
        """Canonical text form: words joined by single spaces, one sentence per line."""
        for row in self.sentences:
            yield " ".join(row)

    def fingerprint(self) -> str:
        """SHA-256 over the canonical text form."""
        digest = hashlib.sha256()
        for line in self.lines():
            digest.update(line.encode("utf-8"))
            digest.update(b"\n")
        return digest.hexdigest()


@dataclass(frozen=True)
class SegmentedCorpus:
    """Per-sentence segmented words plus the scheme that produced them."""

    scheme: SegmentationScheme
    rows: tuple[tuple[SegmentedWord, ...], ...]
    token_count: int

    @classmethod
    def build(
        cls, scheme: SegmentationScheme, rows: Iterable[Sequence[SegmentedWord]]
    ) -> "SegmentedCorpus":
        frozen = tuple(tuple(row) for row in rows)
        units = sum(len(word.units) for row in frozen for word in row)
        return cls(scheme, frozen, units)


def iter_lines(source: LineSource) -> Iterator[str]:
    """Yield lines with trailing newlines stripped.

    Accepts a binary stream, a text stream, or any iterable of strings.
    Binary input is decoded incrementally; a decode failure reports the
    absolute byte offset of the offending byte.
    """
    offset = 0
    for raw in source:
        if isinstance(raw, bytes):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CorpusFormatError(
                    f"invalid UTF-8 at byte offset {offset + exc.start}"
                ) from exc
            offset += len(raw)
        else:
            line = raw
        if line.endswith("\n"):
            line = line[:-1]
        if line.endswith("\r"):
            line = line[:-1]
        yield line


def _checked_rows(reader: LineSource, sentinels: Sentinels) -> Iterator[tuple[str, ...]]:
    reserved = sentinels.all()
    for line_no, line in enumerate(iter_lines(reader), start=1):
        words = tuple(line.split())
        for word in words:
            for sentinel in reserved:
                if sentinel in word:
                    raise CorpusFormatError(
                        f"line {line_no}: token {word!r} contains reserved string {sentinel!r}"
                    )
        yield words


def load_corpus(reader: LineSource, sentinels: Sentinels = Sentinels()) -> Corpus:
    """Read one sentence per line, whitespace-split into words.

    Empty lines become empty sentences and are preserved so that parallel
    corpora stay aligned. Tokens containing a reserved sentinel are rejected.
    """
    return Corpus.from_sentences(_checked_rows(reader, sentinels))


def write_corpus(corpus: Corpus, out: IO[str]) -> None:
    for line in corpus.lines():
        out.write(line)
        out.write("\n")


@dataclass(frozen=True)
class CorpusStats:
    tokens: int
    types: int
    sentences: int
    mean_word_len_chars: float


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Token, type and sentence counts plus mean word length in code points."""
    chars = sum(len(word) * count for word, count in corpus.type_counts.items())
    mean = chars / corpus.token_count if corpus.token_count else 0.0
    return CorpusStats(
        tokens=corpus.token_count,
        types=len(corpus.type_counts),
        sentences=len(corpus.sentences),
        mean_word_len_chars=mean,
    )


def stream_stats(reader: LineSource, sentinels: Sentinels = Sentinels()) -> CorpusStats:
    """Same numbers as corpus_stats, computed without materializing sentences."""
    tokens = 0
    sentences = 0
    chars = 0
    types: set[str] = set()
    for row in _checked_rows(reader, sentinels):
        sentences += 1
        tokens += len(row)
        for word in row:
            chars += len(word)
            types.add(word)
    mean = chars / tokens if tokens else 0.0
    return CorpusStats(tokens, len(types), sentences, mean)
