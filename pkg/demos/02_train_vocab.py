"""
Training a WordPiece vocabulary with BPE
========================================

Merges are learned bottom-up from character pieces. Continuation pieces carry
the ``##`` prefix so the result loads in any BERT-style tokenizer.
"""

from corpusforge.vocab import VocabConfig, count_words, load_vocab, save_vocab, train_bpe

from _data import OUT, sample_lines

# a toy corpus makes the merge order easy to follow
toy = {"abab": 10, "abc": 5}
vocab = train_bpe(toy, VocabConfig(vocab_size=12))
print(vocab.pieces)
print(vocab.merges)  # (a, ##b) first: it occurs 10 + 5 times

# word counts from real text; cased keeps "Craiova" and "craiova" apart
lines = sample_lines()
config = VocabConfig(vocab_size=800, casing="cased")
counts = count_words(lines, config)
print(len(counts), "word types,", sum(counts.values()), "tokens")
print(sorted(counts.items(), key=lambda kv: -kv[1])[:10])

vocab = train_bpe(counts, config)
print(len(vocab), "pieces,", len(vocab.merges), "merges,", len(vocab.alphabet), "characters")
print("first merges:", vocab.merges[:8])
print("longest pieces:", sorted(vocab.pieces, key=len)[-5:])

# vocab.txt is one piece per line; the header sidecar keeps merges and casing
save_vocab(vocab, OUT / "vocab.txt")
assert load_vocab(OUT / "vocab.txt") == vocab

# uncased with accent stripping folds diacritics away before training
flat = VocabConfig(vocab_size=800, casing="uncased", strip_accents=True)
print(sorted(count_words(["Șopârlița și Țara Românească"], flat)))
