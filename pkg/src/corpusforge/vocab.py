"""BPE vocabulary training with WordPiece-format output.

Training is classic greedy BPE over word types: every word starts as a
character sequence, with non-initial characters carrying the ``##``
continuation marker, and the most frequent adjacent pair is merged until the
inventory reaches ``vocab_size``. The result is saved as a BERT-style
``vocab.txt`` (one piece per line, id = line number) plus a JSON sidecar with
the casing flags, alphabet and merge history.

Pair counting is non-overlapping and left to right: the symbols
``##a ##a ##a`` hold one ``(##a, ##a)`` pair, not two, exactly as a merge would
rewrite them.
"""

from __future__ import annotations

import heapq
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from ._parallel import batched, ordered_map
from .pretokenize import normalize_text, pretokenize

CONTINUATION = "##"
DEFAULT_SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
CASINGS = ("cased", "uncased")


class ConfigError(ValueError):
    pass


class VocabFormatError(ValueError):
    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.line = line


@dataclass(frozen=True)
class VocabConfig:
    vocab_size: int = 50000
    alphabet_cap: int = 2000
    casing: str = "cased"
    strip_accents: bool = False
    special_tokens: tuple[str, ...] = DEFAULT_SPECIAL_TOKENS
    min_pair_frequency: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "special_tokens", tuple(self.special_tokens))
        if self.casing not in CASINGS:
            raise ConfigError(f"casing must be one of {CASINGS}, got {self.casing!r}")
        if self.alphabet_cap < 1:
            raise ConfigError("alphabet_cap must be >= 1")
        if len(set(self.special_tokens)) != len(self.special_tokens):
            raise ConfigError("special_tokens contains duplicates")
        if self.vocab_size <= len(self.special_tokens):
            raise ConfigError(
                f"vocab_size {self.vocab_size} leaves no room after {len(self.special_tokens)} special tokens"
            )
        if self.min_pair_frequency < 1:
            raise ConfigError("min_pair_frequency must be >= 1")

    @property
    def lowercase(self) -> bool:
        return self.casing == "uncased"


@dataclass
class Vocabulary:
    pieces: list[str]
    special_tokens: tuple[str, ...] = DEFAULT_SPECIAL_TOKENS
    merges: list[tuple[str, str]] = field(default_factory=list)
    alphabet: frozenset[str] = frozenset()
    casing: str = "cased"
    strip_accents: bool = False
    piece_to_id: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.special_tokens = tuple(self.special_tokens)
        self.alphabet = frozenset(self.alphabet)
        self.merges = [tuple(m) for m in self.merges]
        self.piece_to_id = {}
        for i, piece in enumerate(self.pieces):
            if piece in self.piece_to_id:
                raise ValueError(f"duplicate piece {piece!r} at id {i}")
            self.piece_to_id[piece] = i
        if tuple(self.pieces[: len(self.special_tokens)]) != self.special_tokens:
            raise ValueError("special tokens must occupy the lowest ids in configured order")
        self.max_piece_chars = max((len(p) for p in self.pieces), default=0)

    def __len__(self) -> int:
        return len(self.pieces)

    def __contains__(self, piece: str) -> bool:
        return piece in self.piece_to_id

    @property
    def lowercase(self) -> bool:
        return self.casing == "uncased"

    def special_id(self, token: str) -> int:
        if token not in self.special_tokens:
            raise KeyError(f"vocabulary has no special token {token}")
        return self.piece_to_id[token]

    @property
    def unk_token(self) -> str:
        return "[UNK]"

    @property
    def unk_id(self) -> int:
        return self.special_id("[UNK]")

    def check(self) -> None:
        """Verify merge bookkeeping; raises ValueError on the first inconsistency."""
        for left, right in self.merges:
            if not right.startswith(CONTINUATION):
                raise ValueError(f"merge right side {right!r} lacks the continuation marker")
            if merged_piece(left, right) not in self.piece_to_id:
                raise ValueError(f"merge output of {(left, right)} missing from pieces")


def merged_piece(left: str, right: str) -> str:
    return left + right[len(CONTINUATION):]


# --- counting ---------------------------------------------------------------------


def _count_batch(lines: list[str], lowercase: bool, remove_accents: bool) -> Counter:
    counts: Counter = Counter()
    for line in lines:
        counts.update(normalize_text(w, lowercase, remove_accents) for w in pretokenize(line))
    return counts


def count_words(corpus: Iterable[str], config: VocabConfig | None = None, workers: int = 1) -> Counter:
    """Exact word frequencies after casing/accent normalization.

    >>> dict(count_words(["Ana are mere. Ana"], VocabConfig(casing="uncased")))
    {'ana': 2, 'are': 1, 'mere': 1, '.': 1}
    """
    config = config or VocabConfig()
    total: Counter = Counter()
    for part in ordered_map(
        _count_batch, batched(corpus, 8192), workers, config.lowercase, config.strip_accents
    ):
        total.update(part)
    return total


def write_word_counts(path, counts: Mapping[str, int]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for word, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            f.write(f"{word}\t{count}\n")


def read_word_counts(path) -> Counter:
    counts: Counter = Counter()
    with open(path, encoding="utf-8", newline="\n") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            word, sep, count = line.rpartition("\t")
            if not sep or not word or not count.isdigit():
                raise VocabFormatError(path, lineno, "expected 'word<TAB>count'")
            counts[word] += int(count)
    return counts


def char_frequencies(word_freqs: Mapping[str, int]) -> Counter:
    chars: Counter = Counter()
    for word, freq in word_freqs.items():
        for ch, n in Counter(word).items():
            chars[ch] += n * freq
    return chars


def build_alphabet(word_freqs: Mapping[str, int], cap: int) -> frozenset[str]:
    """The ``cap`` most frequent characters, ties going to the lower codepoint."""
    if cap < 1:
        raise ConfigError("alphabet cap must be >= 1")
    ranked = sorted(char_frequencies(word_freqs).items(), key=lambda kv: (-kv[1], kv[0]))
    return frozenset(ch for ch, _ in ranked[:cap])


# --- training -----------------------------------------------------------------------


def word_symbols(word: str) -> list[str]:
    return [word[0]] + [CONTINUATION + ch for ch in word[1:]]


def pair_counts(symbols) -> Counter:
    """Adjacent-pair counts of one word, non-overlapping within runs."""
    counts: Counter = Counter()
    blocked = -1
    for i in range(len(symbols) - 1):
        a = symbols[i]
        b = symbols[i + 1]
        if a == b:
            if i == blocked:
                continue
            blocked = i + 1
        counts[a, b] += 1
    return counts


def apply_merge(symbols, left, right, merged) -> list:
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == left and symbols[i + 1] == right:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


class _Trainer:
    def __init__(self, words: list[tuple[str, int]]):
        self.names: list[str] = []
        self.ids: dict[str, int] = {}
        self.freqs = [f for _, f in words]
        self.words = [[self.intern(s) for s in word_symbols(w)] for w, _ in words]
        self.counts: defaultdict = defaultdict(int)
        self.where: defaultdict = defaultdict(set)
        for idx, (symbols, freq) in enumerate(zip(self.words, self.freqs)):
            for pair, n in pair_counts(symbols).items():
                self.counts[pair] += n * freq
                self.where[pair].add(idx)
        self.heap = [self._entry(pair) for pair in self.counts]
        heapq.heapify(self.heap)

    def intern(self, name: str) -> int:
        sid = self.ids.get(name)
        if sid is None:
            sid = self.ids[name] = len(self.names)
            self.names.append(name)
        return sid

    def _entry(self, pair):
        a, b = pair
        return (-self.counts[pair], self.names[a], self.names[b], a, b)

    def best(self):
        """Pop the most frequent live pair as ``(count, (a, b))``, or None."""
        while self.heap:
            neg, _, _, a, b = heapq.heappop(self.heap)
            if self.counts.get((a, b), 0) == -neg and neg < 0:
                return -neg, (a, b)
        return None

    def merge(self, pair) -> int:
        a, b = pair
        merged = self.intern(merged_piece(self.names[a], self.names[b]))
        touched = set()
        for idx in self.where.pop(pair, ()):
            old_symbols = self.words[idx]
            new_symbols = apply_merge(old_symbols, a, b, merged)
            self.words[idx] = new_symbols
            old = pair_counts(old_symbols)
            new = pair_counts(new_symbols)
            freq = self.freqs[idx]
            for p in old.keys() | new.keys():
                delta = new.get(p, 0) - old.get(p, 0)
                if delta:
                    self.counts[p] += delta * freq
                    touched.add(p)
                if p not in new:
                    if p != pair:
                        self.where[p].discard(idx)
                elif p not in old:
                    self.where[p].add(idx)
        self.counts.pop(pair, None)
        touched.discard(pair)
        for p in touched:
            if self.counts[p] > 0:
                heapq.heappush(self.heap, self._entry(p))
            else:
                del self.counts[p]
                self.where.pop(p, None)
        return merged


def base_pieces(words: Iterable[str], alphabet: Iterable[str]) -> list[str]:
    """Single-character pieces, in codepoint order, in whichever of the initial
    and ``##`` forms actually occur in ``words``."""
    initial, inner = set(), set()
    for w in words:
        initial.add(w[0])
        inner.update(w[1:])
    pieces = []
    for ch in sorted(alphabet):
        if ch in initial:
            pieces.append(ch)
        if ch in inner:
            pieces.append(CONTINUATION + ch)
    return pieces


def train_bpe(word_freqs: Mapping[str, int], config: VocabConfig | None = None) -> Vocabulary:
    """Learn merges over ``word_freqs`` until the vocabulary holds
    ``config.vocab_size`` pieces or the best pair falls below
    ``config.min_pair_frequency``.

    Words containing a character outside the alphabet are left out of the
    merge statistics. Equal-frequency pairs are broken by the lexicographic
    order of ``(left, right)``.
    """
    config = config or VocabConfig()
    if not word_freqs:
        raise ValueError("cannot train on an empty word-frequency map")
    alphabet = build_alphabet(word_freqs, config.alphabet_cap)
    words = sorted((w, f) for w, f in word_freqs.items() if w and f > 0 and alphabet.issuperset(w))
    base = base_pieces((w for w, _ in words), alphabet)
    specials = list(config.special_tokens)
    overlap = set(specials) & set(base)
    if overlap:
        raise ConfigError(f"special tokens collide with alphabet pieces: {sorted(overlap)}")
    floor = len(specials) + max(len(alphabet), len(base))
    if config.vocab_size <= floor:
        raise ConfigError(
            f"vocab_size {config.vocab_size} must exceed special tokens ({len(specials)}) "
            f"plus alphabet ({max(len(alphabet), len(base))})"
        )

    pieces = specials + base
    known = set(pieces)
    merges: list[tuple[str, str]] = []
    trainer = _Trainer(words)
    while len(pieces) < config.vocab_size:
        found = trainer.best()
        if found is None or found[0] < config.min_pair_frequency:
            break
        _, (a, b) = found
        merges.append((trainer.names[a], trainer.names[b]))
        piece = trainer.names[trainer.merge((a, b))]
        if piece not in known:
            known.add(piece)
            pieces.append(piece)

    return Vocabulary(
        pieces=pieces,
        special_tokens=config.special_tokens,
        merges=merges,
        alphabet=alphabet,
        casing=config.casing,
        strip_accents=config.strip_accents,
    )


# --- persistence ----------------------------------------------------------------------


def header_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def save_vocab(vocab: Vocabulary, path) -> None:
    """Write ``vocab.txt``-style pieces to ``path`` and the header next to it."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for piece in vocab.pieces:
            f.write(piece)
            f.write("\n")
    header = {
        "casing": vocab.casing,
        "strip_accents": vocab.strip_accents,
        "special_tokens": list(vocab.special_tokens),
        "alphabet": sorted(vocab.alphabet),
        "merges": [list(m) for m in vocab.merges],
    }
    with open(header_path(path), "w", encoding="utf-8", newline="\n") as f:
        json.dump(header, f, ensure_ascii=False, sort_keys=True)
        f.write("\n")


def load_vocab(path) -> Vocabulary:
    """Load a vocabulary saved by :func:`save_vocab`.

    A bare ``vocab.txt`` without its JSON header also loads, as a cased
    vocabulary whose special tokens are the bracketed defaults it starts with.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text:
        raise VocabFormatError(path, None, "empty vocabulary file (special tokens are required)")
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    seen: dict[str, int] = {}
    for lineno, piece in enumerate(lines, 1):
        if not piece or piece != piece.strip():
            raise VocabFormatError(path, lineno, f"invalid piece {piece!r}")
        if piece in seen:
            raise VocabFormatError(path, lineno, f"duplicate piece {piece!r} (first on line {seen[piece]})")
        seen[piece] = lineno

    hpath = header_path(path)
    if hpath.exists():
        try:
            header = json.loads(hpath.read_text(encoding="utf-8"))
            specials = tuple(header["special_tokens"])
            casing = header["casing"]
            strip = bool(header["strip_accents"])
            alphabet = frozenset(header["alphabet"])
            merges = [tuple(m) for m in header["merges"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise VocabFormatError(hpath, None, f"malformed header: {exc}") from exc
        if casing not in CASINGS:
            raise VocabFormatError(hpath, None, f"unknown casing {casing!r}")
        if any(len(m) != 2 for m in merges):
            raise VocabFormatError(hpath, None, "merges must be pairs")
    else:
        specials = []
        for piece in lines:
            if piece not in DEFAULT_SPECIAL_TOKENS:
                break
            specials.append(piece)
        specials = tuple(specials)
        casing, strip, merges = "cased", False, []
        alphabet = frozenset(p for p in lines if len(p) == 1)

    for i, token in enumerate(specials):
        if i >= len(lines) or lines[i] != token:
            raise VocabFormatError(path, i + 1, f"expected special token {token!r}")
    if "[UNK]" not in specials:
        raise VocabFormatError(path, None, "vocabulary lacks [UNK]")
    vocab = Vocabulary(
        pieces=lines,
        special_tokens=specials,
        merges=merges,
        alphabet=alphabet,
        casing=casing,
        strip_accents=strip,
    )
    try:
        vocab.check()
    except ValueError as exc:
        raise VocabFormatError(hpath, None, str(exc)) from exc
    return vocab
