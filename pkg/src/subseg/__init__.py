"""Corpus-scale subword segmentation toolkit.

Learn and apply merge rules at any granularity, segment to characters with
explicit word boundaries, invert every segmentation losslessly, normalize
Arabic text, analyze granularity and vocabulary coverage, and compile
tagged corpora into seq2seq tagging instances.
"""

from .analysis import (
    SATURATED,
    DivergencePair,
    OovReport,
    SweepPoint,
    consistency_report,
    emit_consistency_tsv,
    emit_sweep_tsv,
    oov_report,
    op_sweep,
)
from .bpe import (
    BpeApplier,
    BpeError,
    BpeVocab,
    MergeRule,
    MergeTable,
    MergesFormatError,
    bpe_apply,
    bpe_apply_corpus,
    bpe_desegment,
    bpe_train,
    read_merges,
    read_vocab,
    write_merges,
    write_vocab,
)
from .charseg import CharSegConfig, CharSegError, char_desegment, char_segment, char_segment_corpus
from .core import (
    Corpus,
    CorpusFormatError,
    CorpusStats,
    SchemeKind,
    SegmentationScheme,
    SegmentedCorpus,
    SegmentedWord,
    Sentinels,
    SubsegError,
    corpus_stats,
    load_corpus,
    stream_stats,
    write_corpus,
)
from .io import SegmentedFormatError, SegmentedLineCodec, read_segmented, write_segmented
from .normalize import (
    DEFAULT_ARABIC_RULES,
    NormalizationConfig,
    load_rules,
    normalize_text,
    separate_punctuation,
)
from .pospipe import (
    BOS_TOKEN,
    TagInstance,
    TaggedCorpus,
    TaggedFormatError,
    TaggedWord,
    emit_seq2seq,
    gen_instances,
    load_tagged,
)

__version__ = "0.1.0"
