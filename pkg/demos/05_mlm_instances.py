"""
Masked-LM training instances
============================

Tokenized lines are packed into [CLS] ... [SEP] sequences padded to
``max_seq_len``; 15% of the pieces are chosen for prediction and of those
80% become [MASK], 10% a random piece and 10% stay as they are.
"""

from collections import Counter

from corpusforge.pretrain import (
    PretrainConfig,
    SpecialIds,
    apply_mlm_mask,
    masked_instances,
    pack_sequences,
    unmask,
    write_instances,
)
from corpusforge.vocab import VocabConfig, count_words, train_bpe

from _data import OUT, sample_lines

lines = sample_lines()
vocab = train_bpe(count_words(lines), VocabConfig(vocab_size=800))
ids = SpecialIds.from_vocab(vocab)

config = PretrainConfig(max_seq_len=32, short_seq_prob=0.0)
inst = next(pack_sequences(lines, vocab, config))
print(inst.attention_len, inst.token_ids)

masked = apply_mlm_mask(inst, vocab, config, ordinal=0)
print(masked.masked_positions, masked.masked_labels)
print([vocab.pieces[i] for i in masked.token_ids[: masked.attention_len]])
assert unmask(masked) == inst.token_ids

# the replacement split over many instances
kinds = Counter()
for m in masked_instances(lambda: lines * 30, vocab, PretrainConfig(max_seq_len=64)):
    original = unmask(m)
    for p in m.masked_positions:
        new = m.token_ids[p]
        kinds["mask" if new == ids.mask else "keep" if new == original[p] else "random"] += 1
total = sum(kinds.values())
print({k: round(v / total, 3) for k, v in kinds.items()}, total)

# JSON lines on disk, one instance per line
n = write_instances(masked_instances(lambda: lines, vocab, PretrainConfig(max_seq_len=64)), OUT / "instances-64-00000.jsonl")
print(n, "instances written")
