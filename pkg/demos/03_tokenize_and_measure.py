"""
Tokenizing and measuring fertility
==================================

Greedy longest-match-first. A word that cannot be covered becomes a single
[UNK]; tokens/word and UNK/word summarize how well a vocabulary fits text.
"""

from corpusforge.tokenizer import WordPieceTokenizer, detokenize, measure
from corpusforge.vocab import VocabConfig, count_words, train_bpe

from _data import sample_lines

lines = sample_lines()
train, dev = lines[:80], lines[80:]

# 80 lines run out of pairs seen twice well before 1600 pieces, so the last rows agree
for size in (200, 400, 800, 1600):
    config = VocabConfig(vocab_size=size, casing="cased")
    vocab = train_bpe(count_words(train, config), config)
    m = measure(dev, vocab)
    print(f"{size:5d} pieces: {m.tokens_per_word:.3f} tokens/word, {m.unk_per_word:.4f} UNK/word")

tok = WordPieceTokenizer(vocab)
line = "Cinci bicicliști au plecat din Craiova spre Șopârlița."
result = tok.tokenize_line(line)
print(result.pieces)
print(result.ids)
print(detokenize(result.pieces))

# a character the vocabulary never saw turns the whole word into [UNK]
print(tok.tokenize_line("Ana vorbește 中文 acasă.").pieces)
