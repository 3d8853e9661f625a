"""Streaming line codec for segmented text with continuation markers."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from typing import IO

from .core import (
    DEFAULT_BOUNDARY,
    DEFAULT_CONTINUATION,
    LineSource,
    SegmentedWord,
    SubsegError,
    check_token_text,
    iter_lines,
)


class SegmentedFormatError(SubsegError):
    """A segmented-text line violates the codec contract."""


@dataclass(frozen=True)
class SegmentedLineCodec:
    """Continuation-marker rendering of segmented sentences, one per line.

    A token ending in the marker is a non-final unit of its word; the next
    token without the marker closes the word. A marker on the last token of
    a line is corrupt data and fails loudly rather than being joined.
    """

    continuation_marker: str = DEFAULT_CONTINUATION
    boundary_symbol: str = DEFAULT_BOUNDARY

    def __post_init__(self) -> None:
        check_token_text(self.continuation_marker, "continuation marker")
        check_token_text(self.boundary_symbol, "boundary symbol")
        if self.continuation_marker == self.boundary_symbol:
            raise ValueError("continuation marker and boundary symbol must differ")

    def render_word(self, word: SegmentedWord) -> list[str]:
        """Tokens for one word: the marker appended to every non-final unit."""
        marker = self.continuation_marker
        return [unit + marker for unit in word.units[:-1]] + [word.units[-1]]

    def render_row(self, row: Sequence[SegmentedWord]) -> str:
        return " ".join(token for word in row for token in self.render_word(word))

    def parse_row(self, line: str, line_no: int = 1) -> tuple[SegmentedWord, ...]:
        marker = self.continuation_marker
        words: list[SegmentedWord] = []
        current: list[str] = []
        for token in line.split():
            if token.endswith(marker):
                unit = token[: -len(marker)]
                if not unit:
                    raise SegmentedFormatError(f"line {line_no}: bare continuation marker")
                current.append(unit)
            else:
                current.append(token)
                words.append(SegmentedWord(tuple(current)))
                current = []
        if current:
            raise SegmentedFormatError(
                f"line {line_no}: dangling continuation marker at end of sentence"
            )
        return tuple(words)


def read_segmented(
    reader: LineSource, codec: SegmentedLineCodec = SegmentedLineCodec()
) -> Iterator[tuple[SegmentedWord, ...]]:
    """Incremental row reader; memory stays constant per line."""
    for line_no, line in enumerate(iter_lines(reader), start=1):
        yield codec.parse_row(line, line_no)


def write_segmented(
    rows: Iterable[Sequence[SegmentedWord]],
    out: IO[str],
    codec: SegmentedLineCodec = SegmentedLineCodec(),
) -> None:
    """Write rows with '\\n' line endings regardless of platform."""
    for row in rows:
        out.write(codec.render_row(row))
        out.write("\n")
