"""Corpus preparation for Romanian BERT-style pretraining.

Cleaning (:mod:`corpusforge.cleaner`), BPE vocabulary training in WordPiece
format (:mod:`corpusforge.vocab`), tokenization and fertility metrics
(:mod:`corpusforge.tokenizer`), corpus statistics and dev sampling
(:mod:`corpusforge.stats`) and masked-LM instance preparation
(:mod:`corpusforge.pretrain`).
"""

__version__ = "0.1.0"

from .cleaner import (
    CleanConfig,
    CleanReport,
    LineVerdict,
    clean_line,
    clean_stream,
    filter_line,
    fix_spacing_artifacts,
    normalize_chars,
    strip_patterns,
)
from .pretrain import (
    PretrainConfig,
    TrainingInstance,
    apply_mlm_mask,
    pack_sequences,
    read_instances,
    write_instances,
)
from .stats import CorpusStats, allocate_quotas, corpus_stats, sample_dev
from .tokenizer import (
    TokenizationResult,
    TokenizerMetrics,
    WordPieceTokenizer,
    detokenize,
    measure,
    normalize_word,
    tokenize_line,
    tokenize_word,
)
from .vocab import (
    VocabConfig,
    Vocabulary,
    build_alphabet,
    count_words,
    load_vocab,
    save_vocab,
    train_bpe,
)
