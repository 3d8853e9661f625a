"""Granularity sweeps, out-of-vocabulary rates, and boundary-divergence reporting."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Final, Union

from .bpe import BpeApplier, BpeVocab, MergeTable
from .core import Corpus, SegmentedWord, SubsegError

#: Requests the full merge table, however deep it is.
SATURATED: Final = "saturated"

OpRequest = Union[int, str]

#: Below this many word types the divergence scan just compares all pairs.
ALL_PAIRS_THRESHOLD = 64


class AnalysisError(SubsegError):
    """Invalid analysis request."""


@dataclass(frozen=True)
class SweepPoint:
    """Token counts for one merge-count setting of the swept side."""

    op: OpRequest
    src_tokens: int
    tgt_tokens: int
    ratio: float


def _segmented_tokens(corpus: Corpus, table: MergeTable, k: int) -> int:
    applier = BpeApplier(table, k)
    return sum(
        freq * len(applier.segment(word).units) for word, freq in corpus.type_counts.items()
    )


def op_sweep(
    src: Corpus,
    tgt: Corpus,
    table: MergeTable,
    ops: Sequence[OpRequest],
    *,
    tgt_table: MergeTable | None = None,
    tgt_k: int | None = None,
    ratio_direction: str = "src/tgt",
) -> list[SweepPoint]:
    """Token counts and ratio at every requested merge-count prefix.

    src is re-segmented at each requested prefix. tgt is counted once:
    unsegmented by default, or segmented with tgt_table (at tgt_k, full
    table when omitted). Pass 0 for the character-level endpoint and
    SATURATED for the full table. Points come back in request order.
    """
    if ratio_direction not in ("src/tgt", "tgt/src"):
        raise AnalysisError(f"unknown ratio direction {ratio_direction!r}")
    if tgt_table is not None:
        tgt_tokens = _segmented_tokens(tgt, tgt_table, tgt_table.op if tgt_k is None else tgt_k)
    else:
        tgt_tokens = tgt.token_count
    if tgt_tokens == 0:
        raise AnalysisError("target corpus has no tokens")

    points: list[SweepPoint] = []
    for op in ops:
        if op == SATURATED:
            k = table.op
        elif isinstance(op, int):
            if op < 0:
                raise AnalysisError(f"op must be non-negative, got {op}")
            if op > table.op:
                raise AnalysisError(
                    f"op={op} exceeds the table's {table.op} rules; train a deeper table"
                )
            k = op
        else:
            raise AnalysisError(f"unknown op request {op!r}")
        src_tokens = _segmented_tokens(src, table, k)
        if ratio_direction == "src/tgt":
            ratio = src_tokens / tgt_tokens
        else:
            if src_tokens == 0:
                raise AnalysisError("source corpus has no tokens")
            ratio = tgt_tokens / src_tokens
        points.append(SweepPoint(op, src_tokens, tgt_tokens, ratio))
    return points


def emit_sweep_tsv(points: Sequence[SweepPoint]) -> str:
    """Plot-ready TSV with the ratio fixed to four decimal places."""
    lines = ["op\tsrc_tokens\ttgt_tokens\tratio"]
    for point in points:
        lines.append(f"{point.op}\t{point.src_tokens}\t{point.tgt_tokens}\t{point.ratio:.4f}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class OovReport:
    oov_types: int
    oov_tokens: int
    examples: tuple[str, ...]


def oov_report(train_vocab: BpeVocab, test: Corpus, top_n: int = 10) -> OovReport:
    """Count test word types and tokens absent from the training vocabulary.

    Examples are the most frequent missing types, ties broken
    lexicographically.
    """
    missing = {word: n for word, n in test.type_counts.items() if word not in train_vocab}
    ranked = sorted(missing, key=lambda word: (-missing[word], word))
    return OovReport(len(missing), sum(missing.values()), tuple(ranked[:top_n]))


@dataclass(frozen=True)
class DivergencePair:
    """Two word types whose unit boundaries disagree inside their shared prefix."""

    word_a: str
    word_b: str
    lcp_len: int
    boundaries_a: frozenset[int]
    boundaries_b: frozenset[int]
    combined_freq: int

    def __post_init__(self) -> None:
        if self.boundaries_a == self.boundaries_b:
            raise ValueError("a divergence pair must have differing boundary sets")


def _lcp_len(a: str, b: str) -> int:
    limit = min(len(a), len(b))
    i = 0
    while i < limit and a[i] == b[i]:
        i += 1
    return i


def _divergence(
    a: str,
    b: str,
    segmented: Mapping[str, SegmentedWord],
    counts: Mapping[str, int],
    min_lcp: int,
) -> DivergencePair | None:
    lcp = _lcp_len(a, b)
    if lcp < min_lcp:
        return None
    # Split positions at the prefix edge still count: a boundary at p == lcp
    # is visible inside the shared prefix.
    bounds_a = frozenset(p for p in segmented[a].split_positions() if p <= lcp)
    bounds_b = frozenset(p for p in segmented[b].split_positions() if p <= lcp)
    if bounds_a == bounds_b:
        return None
    return DivergencePair(a, b, lcp, bounds_a, bounds_b, counts.get(a, 0) + counts.get(b, 0))


def consistency_report(
    segmented: Mapping[str, SegmentedWord],
    counts: Mapping[str, int],
    *,
    min_lcp: int = 4,
    top_n: int = 20,
    all_pairs_threshold: int = ALL_PAIRS_THRESHOLD,
) -> list[DivergencePair]:
    """Divergent boundary pairs among word types sharing a prefix of min_lcp characters.

    Small inputs are compared all-pairs. Larger ones are grouped into blocks
    by their first min_lcp characters over a sorted type list; two types
    share a prefix of at least min_lcp exactly when they land in the same
    block, so the pruning loses nothing. Results are ranked by combined
    corpus frequency, then by the word pair.
    """
    if min_lcp < 2:
        raise AnalysisError("min_lcp must be at least 2")
    words = sorted(segmented)
    found: list[DivergencePair] = []
    if len(words) <= all_pairs_threshold:
        for i, a in enumerate(words):
            for b in words[i + 1 :]:
                pair = _divergence(a, b, segmented, counts, min_lcp)
                if pair is not None:
                    found.append(pair)
    else:
        eligible = [w for w in words if len(w) >= min_lcp]
        start = 0
        while start < len(eligible):
            prefix = eligible[start][:min_lcp]
            end = start
            while end < len(eligible) and eligible[end][:min_lcp] == prefix:
                end += 1
            block = eligible[start:end]
            for i, a in enumerate(block):
                for b in block[i + 1 :]:
                    pair = _divergence(a, b, segmented, counts, min_lcp)
                    if pair is not None:
                        found.append(pair)
            start = end
    found.sort(key=lambda d: (-d.combined_freq, d.word_a, d.word_b))
    return found[:top_n]


def emit_consistency_tsv(
    pairs: Sequence[DivergencePair], segmented: Mapping[str, SegmentedWord]
) -> str:
    """TSV report with each word's units joined by '|'."""
    lines = ["word_a\tword_b\tlcp_len\tseg_a\tseg_b\tcombined_freq"]
    for pair in pairs:
        seg_a = "|".join(segmented[pair.word_a].units)
        seg_b = "|".join(segmented[pair.word_b].units)
        lines.append(
            f"{pair.word_a}\t{pair.word_b}\t{pair.lcp_len}\t{seg_a}\t{seg_b}\t{pair.combined_freq}"
        )
    return "\n".join(lines) + "\n"
