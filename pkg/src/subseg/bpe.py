"""Merge-rule training and application with granularity control and lossless inversion."""

from __future__ import annotations

import heapq
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import IO

from .core import (
    Corpus,
    LineSource,
    SegmentationScheme,
    SegmentedCorpus,
    SegmentedWord,
    Sentinels,
    SubsegError,
    check_token_text,
    iter_lines,
)

MERGES_HEADER = "#subseg merges v1"

# Training stops once the best pair occurs only once: merging hapax pairs
# memorizes noise and would never generalize.
MIN_PAIR_FREQUENCY = 2


class BpeError(SubsegError):
    """Training or application contract violation."""


class MergesFormatError(SubsegError):
    """A merges file is malformed or internally inconsistent."""


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str
    rank: int

    def __post_init__(self) -> None:
        check_token_text(self.left, "merge rule part")
        check_token_text(self.right, "merge rule part")
        if self.rank < 0:
            raise ValueError("rank must be non-negative")

    @property
    def merged(self) -> str:
        return self.left + self.right


@dataclass(frozen=True)
class MergeTable:
    """Ordered merge rules; every prefix is itself a valid, finer-grained table.

    trained_on carries the content hash of the training corpus and is
    excluded from equality: the serialized format stores rules only.
    """

    rules: tuple[MergeRule, ...]
    trained_on: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        products: set[str] = set()
        for i, rule in enumerate(self.rules):
            if rule.rank != i:
                raise ValueError(f"rule {i} carries rank {rule.rank}")
            for part in (rule.left, rule.right):
                if len(part) > 1 and part not in products:
                    raise ValueError(
                        f"rule {i}: {part!r} is neither a character nor a prior merge product"
                    )
            products.add(rule.merged)

    @property
    def op(self) -> int:
        """Number of merge rules; the granularity hyperparameter."""
        return len(self.rules)


@dataclass(frozen=True)
class BpeVocab:
    """Full word-type vocabulary of a training corpus."""

    known_words: frozenset[str]

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "BpeVocab":
        return cls(frozenset(corpus.type_counts))

    def __contains__(self, word: str) -> bool:
        return word in self.known_words

    def __len__(self) -> int:
        return len(self.known_words)


def merge_pass(units: Sequence[str], left: str, right: str) -> list[str]:
    """One leftmost-first pass replacing every adjacent (left, right) with their concatenation.

    A single pass is complete: the merged unit can never recreate the same
    pair, so repeating the pass would find nothing.
    """
    out: list[str] = []
    i = 0
    n = len(units)
    merged = left + right
    while i < n:
        if i + 1 < n and units[i] == left and units[i + 1] == right:
            out.append(merged)
            i += 2
        else:
            out.append(units[i])
            i += 1
    return out


def bpe_train(corpus: Corpus, op: int) -> MergeTable:
    """Learn up to op merge rules by iterated most-frequent-pair replacement.

    Word types are weighted by corpus frequency and merging never crosses
    word boundaries. Ties break to the lexicographically smallest
    (left, right) pair, which makes training fully deterministic. Training
    stops early once no pair occurs at least MIN_PAIR_FREQUENCY times.
    """
    if op < 1:
        raise BpeError("op must be at least 1")
    if corpus.token_count == 0:
        raise BpeError("cannot train on an empty corpus")

    types = sorted(corpus.type_counts)
    freqs = [corpus.type_counts[w] for w in types]
    states: list[list[str]] = [list(w) for w in types]

    stats: dict[tuple[str, str], int] = {}
    where: dict[tuple[str, str], set[int]] = {}
    for idx, units in enumerate(states):
        freq = freqs[idx]
        for pair in zip(units, units[1:]):
            stats[pair] = stats.get(pair, 0) + freq
            where.setdefault(pair, set()).add(idx)

    # Lazy max-heap: an entry is live only while its count matches stats.
    heap: list[tuple[int, str, str]] = [(-n, l, r) for (l, r), n in stats.items()]
    heapq.heapify(heap)

    rules: list[MergeRule] = []
    while len(rules) < op:
        best = _pop_best(heap, stats)
        if best is None:
            break
        rules.append(MergeRule(best[0], best[1], len(rules)))
        _merge_everywhere(best, states, freqs, stats, where, heap)
    return MergeTable(tuple(rules), trained_on=corpus.fingerprint())


def _pop_best(
    heap: list[tuple[int, str, str]], stats: dict[tuple[str, str], int]
) -> tuple[str, str] | None:
    while heap:
        neg, left, right = heapq.heappop(heap)
        if stats.get((left, right), 0) != -neg:
            continue
        if -neg < MIN_PAIR_FREQUENCY:
            return None
        return (left, right)
    return None


def _merge_everywhere(
    pair: tuple[str, str],
    states: list[list[str]],
    freqs: list[int],
    stats: dict[tuple[str, str], int],
    where: dict[tuple[str, str], set[int]],
    heap: list[tuple[int, str, str]],
) -> None:
    left, right = pair
    for idx in sorted(where.get(pair, ())):
        old = states[idx]
        new = merge_pass(old, left, right)
        if len(new) == len(old):
            continue
        freq = freqs[idx]
        old_counts = Counter(zip(old, old[1:]))
        new_counts = Counter(zip(new, new[1:]))
        for p in old_counts.keys() | new_counts.keys():
            delta = new_counts.get(p, 0) - old_counts.get(p, 0)
            if delta == 0:
                continue
            total = stats.get(p, 0) + delta * freq
            if total > 0:
                stats[p] = total
                heapq.heappush(heap, (-total, p[0], p[1]))
            else:
                stats.pop(p, None)
            if new_counts.get(p, 0) == 0:
                bucket = where.get(p)
                if bucket is not None:
                    bucket.discard(idx)
            elif old_counts.get(p, 0) == 0:
                where.setdefault(p, set()).add(idx)
        states[idx] = new
    stats.pop(pair, None)
    where.pop(pair, None)


class BpeApplier:
    """Applies the first k rules of a table, replaying them in rank order.

    The replay is simulated with a rank heap so that only rules whose pair
    actually occurs in the word are visited; a pair that reappears after its
    rank has been passed is discarded, exactly as a linear replay would.
    Results are cached by word type, so corpus-scale application is
    dictionary-lookup bound. A shared instance is safe under concurrent
    readers: each key maps to one immutable value, so duplicated computation
    is benign.
    """

    def __init__(self, table: MergeTable, k: int | None = None):
        if k is None:
            k = table.op
        if not 0 <= k <= table.op:
            raise BpeError(f"k={k} exceeds the table's {table.op} rules; train a deeper table")
        self.table = table
        self.k = k
        self._rules = table.rules[:k]
        self._rank = {(rule.left, rule.right): rule.rank for rule in self._rules}
        self._cache: dict[str, SegmentedWord] = {}

    def segment(self, word: str) -> SegmentedWord:
        got = self._cache.get(word)
        if got is None:
            got = SegmentedWord(tuple(self._segment_units(word)))
            self._cache[word] = got
        return got

    def _segment_units(self, word: str) -> list[str]:
        units = list(word)
        if len(units) < 2 or not self._rank:
            return units
        rank_of = self._rank
        heap = [rank for pair in zip(units, units[1:]) if (rank := rank_of.get(pair)) is not None]
        heapq.heapify(heap)
        cursor = 0
        while heap:
            rank = heapq.heappop(heap)
            if rank < cursor:
                continue
            rule = self._rules[rank]
            merged = merge_pass(units, rule.left, rule.right)
            cursor = rank + 1
            if len(merged) != len(units):
                units = merged
                for pair in zip(units, units[1:]):
                    nxt = rank_of.get(pair)
                    if nxt is not None and nxt >= cursor:
                        heapq.heappush(heap, nxt)
        return units


def bpe_apply(table: MergeTable, k: int, word: str) -> SegmentedWord:
    """Segment one word using the first k merge rules.

    k=0 yields one unit per character. For bulk application, construct a
    BpeApplier once and reuse its per-type cache.
    """
    return BpeApplier(table, k).segment(word)


def bpe_apply_corpus(
    table: MergeTable,
    k: int,
    corpus: Corpus,
    vocab: BpeVocab | None = None,
    sentinels: Sentinels = Sentinels(),
) -> tuple[SegmentedCorpus, int]:
    """Segment every word of the corpus with the first k rules.

    Without a vocabulary every word is segmented. With one, only words it
    contains are segmented; any other word becomes a single UNK unit, never
    a partial segmentation. Returns the segmented corpus and the number of
    UNK substitutions performed.
    """
    applier = BpeApplier(table, k)
    unk_word = SegmentedWord((sentinels.unk,))
    unk_count = 0
    rows: list[tuple[SegmentedWord, ...]] = []
    for sentence in corpus.sentences:
        row: list[SegmentedWord] = []
        for word in sentence:
            if vocab is not None and word not in vocab:
                row.append(unk_word)
                unk_count += 1
            else:
                row.append(applier.segment(word))
        rows.append(tuple(row))
    segmented = SegmentedCorpus.build(SegmentationScheme.bpe(k), rows)
    return segmented, unk_count


def bpe_desegment(segmented: SegmentedCorpus, sentinels: Sentinels = Sentinels()) -> Corpus:
    """Invert segmentation by concatenating each word's units.

    UNK substitutions are lossy and cannot be inverted; encountering one
    raises an error naming the sentence and word position.
    """
    rows: list[tuple[str, ...]] = []
    for i, row in enumerate(segmented.rows, start=1):
        words: list[str] = []
        for j, word in enumerate(row, start=1):
            if sentinels.unk in word.units:
                raise BpeError(f"sentence {i}, word {j}: UNK unit cannot be inverted")
            words.append(word.surface)
        rows.append(tuple(words))
    return Corpus.from_sentences(rows)


def write_merges(table: MergeTable, out: IO[str]) -> None:
    """Serialize rules in rank order; output is byte-deterministic."""
    out.write(MERGES_HEADER + "\n")
    for rule in table.rules:
        out.write(f"{rule.left} {rule.right}\n")


def read_merges(reader: LineSource) -> MergeTable:
    """Parse and validate a merges file.

    Each rule line must hold exactly two space-separated symbols, and each
    symbol must be a single character or the product of an earlier rule.
    """
    lines = iter_lines(reader)
    header = next(lines, None)
    if header != MERGES_HEADER:
        raise MergesFormatError(f"line 1: expected header {MERGES_HEADER!r}")
    rules: list[MergeRule] = []
    products: set[str] = set()
    for line_no, line in enumerate(lines, start=2):
        parts = line.split(" ")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise MergesFormatError(f"line {line_no}: expected LEFT SPACE RIGHT, got {line!r}")
        left, right = parts
        for part in (left, right):
            if any(ch.isspace() for ch in part):
                raise MergesFormatError(f"line {line_no}: whitespace inside symbol {part!r}")
            if len(part) > 1 and part not in products:
                raise MergesFormatError(
                    f"line {line_no}: {part!r} is neither a character nor a prior merge product"
                )
        products.add(left + right)
        rules.append(MergeRule(left, right, len(rules)))
    return MergeTable(tuple(rules))


def write_vocab(vocab: BpeVocab, out: IO[str]) -> None:
    """One word per line, sorted, so output is byte-deterministic."""
    for word in sorted(vocab.known_words):
        out.write(word)
        out.write("\n")


def read_vocab(reader: LineSource) -> BpeVocab:
    words: set[str] = set()
    for line_no, line in enumerate(iter_lines(reader), start=1):
        if not line:
            continue
        if len(line.split()) != 1:
            raise MergesFormatError(f"line {line_no}: expected one word per line, got {line!r}")
        words.add(line)
    return BpeVocab(frozenset(words))
