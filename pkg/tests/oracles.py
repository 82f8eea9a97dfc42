"""Deliberately naive reference implementations used as test oracles.

Nothing here imports the package's training or tokenization code paths.
"""

from __future__ import annotations

import random


def naive_alphabet(word_freqs, cap):
    counts = {}
    for word, freq in word_freqs.items():
        for ch in word:
            counts[ch] = counts.get(ch, 0) + freq
    ranked = sorted(counts, key=lambda ch: (-counts[ch], ch))
    return set(ranked[:cap])


def count_pair_nonoverlapping(seq, pair):
    """Occurrences of ``pair`` in ``seq`` scanning left to right without reuse."""
    n = 0
    i = 0
    while i < len(seq) - 1:
        if (seq[i], seq[i + 1]) == pair:
            n += 1
            i += 2
        else:
            i += 1
    return n


def naive_bpe(word_freqs, vocab_size, alphabet_cap=2000, specials=("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"), min_pair_frequency=2):
    """Full recount every iteration. Returns ``(pieces, merges)``."""
    alphabet = naive_alphabet(word_freqs, alphabet_cap)
    words = {w: f for w, f in word_freqs.items() if w and all(ch in alphabet for ch in w)}
    segs = {w: [w[0]] + ["##" + ch for ch in w[1:]] for w in words}
    base = []
    for ch in sorted(alphabet):
        if any(w[0] == ch for w in words):
            base.append(ch)
        if any(ch in w[1:] for w in words):
            base.append("##" + ch)
    pieces = list(specials) + base
    merges = []
    while len(pieces) < vocab_size:
        counts = {}
        for w, seg in segs.items():
            for pair in set(zip(seg, seg[1:])):
                counts[pair] = counts.get(pair, 0) + words[w] * count_pair_nonoverlapping(seg, pair)
        if not counts:
            break
        pair, best = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if best < min_pair_frequency:
            break
        left, right = pair
        new = left + right[2:]
        merges.append(pair)
        if new not in pieces:
            pieces.append(new)
        for w, seg in segs.items():
            out = []
            i = 0
            while i < len(seg):
                if i + 1 < len(seg) and seg[i] == left and seg[i + 1] == right:
                    out.append(new)
                    i += 2
                else:
                    out.append(seg[i])
                    i += 1
            segs[w] = out
    return pieces, merges


def naive_greedy(word, pieces, unk="[UNK]"):
    """Longest-match-first over every possible prefix length."""
    vocab = set(pieces)
    out = []
    i = 0
    while i < len(word):
        for j in range(len(word), i, -1):
            cand = ("##" if i else "") + word[i:j]
            if cand in vocab:
                out.append(cand)
                i = j
                break
        else:
            return [unk]
    return out


def random_toy_corpus(rng: random.Random, max_words=50, letters="abcde"):
    n = rng.randint(1, max_words)
    corpus = {}
    while len(corpus) < n:
        word = "".join(rng.choice(letters) for _ in range(rng.randint(1, 7)))
        corpus[word] = rng.randint(1, 20)
    return corpus
