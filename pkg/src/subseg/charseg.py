"""Fully character-level segmentation with an explicit word-boundary unit."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .core import DEFAULT_BOUNDARY, Corpus, Sentence, SubsegError, check_token_text


class CharSegError(SubsegError):
    """Character segmentation contract violation."""


@dataclass(frozen=True)
class CharSegConfig:
    """Boundary unit plus the advisory per-sentence unit limit.

    Exceeding the limit is reported, never truncated: length limits are a
    downstream training concern, while segmentation must stay lossless.
    """

    boundary_symbol: str = DEFAULT_BOUNDARY
    max_sentence_units: int = 500

    def __post_init__(self) -> None:
        check_token_text(self.boundary_symbol, "boundary symbol")
        if self.max_sentence_units < 1:
            raise ValueError("max_sentence_units must be at least 1")


def char_segment(sentence: Sequence[str], config: CharSegConfig = CharSegConfig()) -> list[str]:
    """One unit per character, with a boundary unit between consecutive words.

    No leading or trailing boundary is emitted; an empty sentence yields an
    empty unit list.
    """
    units: list[str] = []
    for i, word in enumerate(sentence):
        if config.boundary_symbol in word:
            raise CharSegError(f"word {i + 1} ({word!r}) contains the boundary symbol")
        if i:
            units.append(config.boundary_symbol)
        units.extend(word)
    return units


def exceeds_unit_limit(units: Sequence[str], config: CharSegConfig) -> bool:
    """Advisory length check; what to do with long sentences is the caller's policy."""
    return len(units) > config.max_sentence_units


def char_segment_corpus(
    corpus: Corpus, config: CharSegConfig = CharSegConfig()
) -> tuple[list[list[str]], list[int]]:
    """Segment every sentence; returns unit rows plus indices of over-limit sentences."""
    rows: list[list[str]] = []
    flagged: list[int] = []
    for index, sentence in enumerate(corpus.sentences):
        units = char_segment(sentence, config)
        if exceeds_unit_limit(units, config):
            flagged.append(index)
        rows.append(units)
    return rows, flagged


def char_desegment(units: Sequence[str], config: CharSegConfig = CharSegConfig()) -> Sentence:
    """Invert char_segment; malformed boundary placement names the offending position."""
    words: list[str] = []
    current: list[str] = []
    for pos, unit in enumerate(units):
        if unit == config.boundary_symbol:
            if not current:
                raise CharSegError(f"unit {pos + 1}: boundary symbol without a preceding word")
            words.append("".join(current))
            current = []
        else:
            if len(unit) != 1:
                raise CharSegError(f"unit {pos + 1}: expected a single character, got {unit!r}")
            current.append(unit)
    if current:
        words.append("".join(current))
    elif units:
        raise CharSegError(f"unit {len(units)}: trailing boundary symbol")
    return tuple(words)
