"""Greedy longest-match-first (WordPiece) tokenization and fertility metrics."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from typing import Iterable

from ._parallel import batched, ordered_map
from .pretokenize import normalize_text, pretokenize
from .vocab import CONTINUATION, Vocabulary

MAX_WORD_CHARS = 100


class MalformedPieces(ValueError):
    pass


@dataclass
class TokenizationResult:
    pieces: list[str] = field(default_factory=list)
    ids: list[int] = field(default_factory=list)
    unk_count: int = 0
    word_count: int = 0


@dataclass
class TokenizerMetrics:
    pieces_total: int
    unk_total: int
    words_measured: int

    @property
    def tokens_per_word(self) -> float:
        return self.pieces_total / self.words_measured

    @property
    def unk_per_word(self) -> float:
        return self.unk_total / self.words_measured

    def to_dict(self) -> dict:
        return {
            "tokens_per_word": round(self.tokens_per_word, 4),
            "unk_per_word": round(self.unk_per_word, 4),
            "words_measured": self.words_measured,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def normalize_word(word: str, vocab: Vocabulary) -> str:
    return normalize_text(word, vocab.lowercase, vocab.strip_accents)


def tokenize_word(word: str, vocab: Vocabulary) -> list[str]:
    """Split an already-normalized word into pieces, longest prefix first.

    If some position has no matching piece, or the word is longer than
    ``MAX_WORD_CHARS``, the whole word becomes ``[UNK]``.
    """
    if word in vocab.piece_to_id:
        return [word]
    n = len(word)
    if n > MAX_WORD_CHARS:
        return [vocab.unk_token]
    lookup = vocab.piece_to_id
    longest = vocab.max_piece_chars
    pieces = []
    start = 0
    while start < n:
        prefix = CONTINUATION if start else ""
        end = min(n, start + longest)
        while end > start:
            candidate = prefix + word[start:end]
            if candidate in lookup:
                pieces.append(candidate)
                break
            end -= 1
        else:
            return [vocab.unk_token]
        start = end
    return pieces


class WordPieceTokenizer:
    """Vocabulary-bound tokenizer with a per-word cache.

    Words repeat heavily in running text, so caching per normalized word
    makes corpus-scale tokenization several times faster.
    """

    def __init__(self, vocab: Vocabulary, cache_size: int = 1 << 18):
        self.vocab = vocab
        self._word = functools.lru_cache(maxsize=cache_size)(self._tokenize_raw_word)

    def _tokenize_raw_word(self, word: str) -> tuple[str, ...]:
        return tuple(tokenize_word(normalize_word(word, self.vocab), self.vocab))

    def tokenize_line(self, line: str) -> TokenizationResult:
        unk = self.vocab.unk_token
        result = TokenizationResult()
        for word in pretokenize(line):
            result.pieces.extend(self._word(word))
            result.word_count += 1
        lookup = self.vocab.piece_to_id
        result.ids = [lookup[p] for p in result.pieces]
        result.unk_count = result.pieces.count(unk)
        return result

    def encode(self, line: str) -> list[int]:
        return self.tokenize_line(line).ids

    def measure(self, corpus: Iterable[str]) -> TokenizerMetrics:
        pieces = unks = words = 0
        for line in corpus:
            r = self.tokenize_line(line)
            pieces += len(r.pieces)
            unks += r.unk_count
            words += r.word_count
        if words == 0:
            raise ValueError("cannot measure an empty corpus")
        return TokenizerMetrics(pieces, unks, words)


def tokenize_line(line: str, vocab: Vocabulary) -> TokenizationResult:
    return WordPieceTokenizer(vocab, cache_size=0).tokenize_line(line)


def detokenize(pieces: Iterable[str]) -> str:
    """Glue ``##`` continuations onto the preceding piece and space-join words."""
    words: list[str] = []
    for i, piece in enumerate(pieces):
        if piece.startswith(CONTINUATION):
            if not words:
                raise MalformedPieces(f"continuation piece {piece!r} at position {i} has nothing to attach to")
            words[-1] += piece[len(CONTINUATION):]
        else:
            words.append(piece)
    return " ".join(words)


def _measure_batch(lines: list[str], vocab: Vocabulary) -> tuple[int, int, int]:
    tok = WordPieceTokenizer(vocab)
    pieces = unks = words = 0
    for line in lines:
        r = tok.tokenize_line(line)
        pieces += len(r.pieces)
        unks += r.unk_count
        words += r.word_count
    return pieces, unks, words


def measure(corpus: Iterable[str], vocab: Vocabulary, workers: int = 1) -> TokenizerMetrics:
    """Tokens/word and UNK/word over every line of ``corpus``.

    Totals are exact integer sums, so the result is the same for any
    ``workers``.
    """
    if workers == 1:
        return WordPieceTokenizer(vocab).measure(corpus)
    pieces = unks = words = 0
    for p, u, w in ordered_map(_measure_batch, batched(corpus, 2000), workers, vocab):
        pieces += p
        unks += u
        words += w
    if words == 0:
        raise ValueError("cannot measure an empty corpus")
    return TokenizerMetrics(pieces, unks, words)
