"""Parallel corpus construction, alignment, filtering and evaluation."""

from ._core import (
    AlignmentResult,
    BleuBreakdown,
    BtkError,
    Corpus,
    Match,
    Sentence,
    SentencePair,
    Translator,
    __version__,
    align_documents,
    align_to_corpus,
    budget_ratio,
    corpus_bleu,
    dedup_against,
    dedup_within,
    export_corpus,
    identity_translator,
    ingest,
    lexicon_translator,
    lexicon_translator_from_file,
    make_corpus,
    make_pair,
    merge,
    normalize,
    pair_score,
    sample_test_set,
    select_top_k,
    sentence_bleu,
    stats,
    tokenize,
    tune_k,
)

__all__ = [
    "AlignmentResult",
    "BleuBreakdown",
    "BtkError",
    "Corpus",
    "Match",
    "Sentence",
    "SentencePair",
    "Translator",
    "__version__",
    "align_documents",
    "align_to_corpus",
    "budget_ratio",
    "corpus_bleu",
    "dedup_against",
    "dedup_within",
    "export_corpus",
    "identity_translator",
    "ingest",
    "lexicon_translator",
    "lexicon_translator_from_file",
    "make_corpus",
    "make_pair",
    "merge",
    "normalize",
    "pair_score",
    "sample_test_set",
    "select_top_k",
    "sentence_bleu",
    "stats",
    "tokenize",
    "tune_k",
]
