"""Pre-tokenization passes: punctuation separation and configurable character rewrites."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .core import LineSource, Sentence, SubsegError, iter_lines


class RulesFormatError(SubsegError):
    """A normalization rules file line is malformed."""


# Built-in rewrite table for Arabic: alef variants to bare alef, alef maqsura
# to ya, tatweel deleted, Arabic-Indic digits to ASCII, short-vowel diacritics
# deleted. A stand-in for common MT practice; fully replaceable via a rules file.
_ALEF_VARIANTS = ("أ", "إ", "آ", "ٱ")
_ARABIC_INDIC_DIGITS = tuple(chr(0x0660 + i) for i in range(10))
_DIACRITICS = tuple(chr(cp) for cp in range(0x064B, 0x0653))

DEFAULT_ARABIC_RULES: tuple[tuple[str, str | None], ...] = (
    *((ch, "ا") for ch in _ALEF_VARIANTS),
    ("ى", "ي"),
    ("ـ", None),
    *((ch, str(i)) for i, ch in enumerate(_ARABIC_INDIC_DIGITS)),
    *((ch, None) for ch in _DIACRITICS),
)

# Arabic punctuation marks folded into the punctuation class alongside the
# Unicode P* categories.
_ARABIC_PUNCTUATION = frozenset("،؍؛؞؟٪٫٬٭۔")


@dataclass(frozen=True)
class NormalizationConfig:
    """Ordered single-codepoint rewrite rules; the first matching rule wins.

    Applying the rule set twice must equal applying it once, which is
    checked at construction time.
    """

    rules: tuple[tuple[str, str | None], ...] = DEFAULT_ARABIC_RULES
    enabled: bool = True

    def __post_init__(self) -> None:
        table: dict[int, int | None] = {}
        for src, dst in self.rules:
            if len(src) != 1:
                raise ValueError(f"rule source {src!r} is not a single codepoint")
            if dst is not None and len(dst) != 1:
                raise ValueError(f"rule replacement {dst!r} is not a single codepoint")
            table.setdefault(ord(src), None if dst is None else ord(dst))
        for src_cp, dst_cp in table.items():
            if dst_cp is not None and table.get(dst_cp, dst_cp) != dst_cp:
                raise ValueError(
                    f"rules are not idempotent: {chr(src_cp)!r} rewrites to "
                    f"{chr(dst_cp)!r}, which is itself rewritten"
                )
        object.__setattr__(self, "_table", table)

    @property
    def translation_table(self) -> dict[int, int | None]:
        return self._table  # type: ignore[attr-defined]

    @classmethod
    def disabled(cls) -> "NormalizationConfig":
        return cls(rules=(), enabled=False)


def normalize_text(s: str, config: NormalizationConfig) -> str:
    """Rewrite s codepoint by codepoint; identity when the pass is disabled."""
    if not config.enabled:
        return s
    return s.translate(config.translation_table)


def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P") or ch in _ARABIC_PUNCTUATION


def separate_punctuation(s: str) -> Sentence:
    """Split a raw sentence into words, isolating every punctuation mark.

    Each punctuation character becomes its own token; runs of letters and
    digits stay contiguous. Not required to be invertible.
    """
    words: list[str] = []
    current: list[str] = []
    for ch in s:
        if ch.isspace():
            if current:
                words.append("".join(current))
                current = []
        elif _is_punctuation(ch):
            if current:
                words.append("".join(current))
                current = []
            words.append(ch)
        else:
            current.append(ch)
    if current:
        words.append("".join(current))
    return tuple(words)


_CODEPOINT = re.compile(r"^U\+([0-9A-Fa-f]{4,6})$")


def _parse_codepoint(text: str, line_no: int) -> str:
    match = _CODEPOINT.match(text)
    if not match:
        raise RulesFormatError(f"line {line_no}: expected a U+XXXX escape, got {text!r}")
    return chr(int(match.group(1), 16))


def load_rules(reader: LineSource) -> NormalizationConfig:
    """Read a rules file: one rule per line as FROM<TAB>TO, empty TO means deletion.

    Both fields use U+XXXX escapes. Blank lines and lines starting with '#'
    are skipped.
    """
    rules: list[tuple[str, str | None]] = []
    for line_no, line in enumerate(iter_lines(reader), start=1):
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise RulesFormatError(f"line {line_no}: expected FROM<TAB>TO, got {line!r}")
        src = _parse_codepoint(parts[0], line_no)
        dst = _parse_codepoint(parts[1], line_no) if parts[1] else None
        rules.append((src, dst))
    try:
        return NormalizationConfig(rules=tuple(rules))
    except ValueError as exc:
        raise RulesFormatError(str(exc)) from exc
