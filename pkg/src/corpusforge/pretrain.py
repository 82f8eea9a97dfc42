"""Masked-LM training instances: packing tokenized lines into fixed-length
sequences and applying BERT-style 80/10/10 masking."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .tokenizer import WordPieceTokenizer
from .vocab import Vocabulary


@dataclass(frozen=True)
class PretrainConfig:
    max_seq_len: int = 128
    mask_rate: float = 0.15
    mask_token_rate: float = 0.8
    random_token_rate: float = 0.1
    keep_rate: float = 0.1
    seed: int = 12345
    short_seq_prob: float = 0.1
    min_tail_pieces: int = 5
    dupe_factor: int = 1
    # reserved for two-segment instances; only single-segment packing exists
    next_sentence_prediction: bool = False

    def __post_init__(self) -> None:
        if self.max_seq_len < 3:
            raise ValueError("max_seq_len must leave room for [CLS], [SEP] and one token")
        if not 0.0 < self.mask_rate < 1.0:
            raise ValueError(f"mask_rate must lie in (0, 1), got {self.mask_rate}")
        rates = (self.mask_token_rate, self.random_token_rate, self.keep_rate)
        if any(r < 0 for r in rates) or not math.isclose(sum(rates), 1.0, abs_tol=1e-9):
            raise ValueError(f"mask/random/keep rates must be non-negative and sum to 1, got {rates}")
        if not 0.0 <= self.short_seq_prob <= 1.0:
            raise ValueError("short_seq_prob must lie in [0, 1]")
        if self.dupe_factor < 1:
            raise ValueError("dupe_factor must be >= 1")
        if self.next_sentence_prediction:
            raise ValueError("next_sentence_prediction is not supported: instances are single-segment")


@dataclass
class TrainingInstance:
    token_ids: list[int]
    attention_len: int
    masked_positions: list[int] = field(default_factory=list)
    masked_labels: list[int] = field(default_factory=list)
    # set when a line was cut across instances at a piece boundary
    split: bool = False

    def to_record(self) -> dict:
        record = {
            "ids": self.token_ids,
            "len": self.attention_len,
            "masked_positions": self.masked_positions,
            "masked_labels": self.masked_labels,
        }
        if self.split:
            record["split"] = True
        return record

    @classmethod
    def from_record(cls, record: dict) -> "TrainingInstance":
        return cls(
            token_ids=list(record["ids"]),
            attention_len=int(record["len"]),
            masked_positions=list(record["masked_positions"]),
            masked_labels=list(record["masked_labels"]),
            split=bool(record.get("split", False)),
        )


@dataclass(frozen=True)
class SpecialIds:
    pad: int
    cls: int
    sep: int
    mask: int
    first_regular: int
    vocab_size: int

    @classmethod
    def from_vocab(cls, vocab: Vocabulary) -> "SpecialIds":
        return cls(
            pad=vocab.special_id("[PAD]"),
            cls=vocab.special_id("[CLS]"),
            sep=vocab.special_id("[SEP]"),
            mask=vocab.special_id("[MASK]"),
            first_regular=len(vocab.special_tokens),
            vocab_size=len(vocab),
        )


def masked_count(maskable_len: int, mask_rate: float) -> int:
    """``max(1, round(mask_rate * maskable_len))`` with halves rounded up."""
    return max(1, math.floor(mask_rate * maskable_len + 0.5))


def _instance(content: list[int], specials: SpecialIds, max_seq_len: int, split: bool) -> TrainingInstance:
    ids = [specials.cls, *content, specials.sep]
    length = len(ids)
    ids.extend([specials.pad] * (max_seq_len - length))
    return TrainingInstance(ids, length, split=split)


def pack_sequences(
    lines: Iterable[str],
    vocab: Vocabulary,
    config: PretrainConfig | None = None,
    stream: int = 0,
    tokenizer: WordPieceTokenizer | None = None,
) -> Iterator[TrainingInstance]:
    """Greedily concatenate tokenized lines into unmasked instances.

    A line that would overflow the current instance starts a new one; a line
    longer than a whole instance is cut at piece boundaries and the affected
    instances are flagged ``split``. With probability ``short_seq_prob`` an
    instance gets a random shorter target length. A final instance with fewer
    than ``min_tail_pieces`` pieces is dropped.
    """
    config = config or PretrainConfig()
    tokenizer = tokenizer or WordPieceTokenizer(vocab)
    specials = SpecialIds.from_vocab(vocab)
    budget = config.max_seq_len - 2
    rng = random.Random(f"pack/{config.seed}/{stream}")

    def next_target() -> int:
        if config.short_seq_prob and rng.random() < config.short_seq_prob:
            return rng.randint(1, budget)
        return budget

    buf: list[int] = []
    split = False
    target = next_target()
    for line in lines:
        ids = tokenizer.encode(line)
        pos = 0
        while pos < len(ids):
            room = target - len(buf)
            if len(ids) - pos <= room:
                buf.extend(ids[pos:])
                pos = len(ids)
            elif buf:
                yield _instance(buf, specials, config.max_seq_len, split)
                buf, split, target = [], False, next_target()
            else:
                buf.extend(ids[pos : pos + room])
                pos += room
                yield _instance(buf, specials, config.max_seq_len, True)
                buf, split, target = [], True, next_target()
        if pos and not buf:
            split = False
    if len(buf) >= config.min_tail_pieces:
        yield _instance(buf, specials, config.max_seq_len, split)


def apply_mlm_mask(
    instance: TrainingInstance,
    vocab: Vocabulary,
    config: PretrainConfig | None = None,
    ordinal: int = 0,
    stream: int = 0,
) -> TrainingInstance:
    """Return a masked copy of ``instance``.

    The random stream is keyed on ``(seed, stream, ordinal)`` so any single
    instance can be re-masked reproducibly without replaying the others.
    """
    config = config or PretrainConfig()
    specials = SpecialIds.from_vocab(vocab)
    maskable = instance.attention_len - 2
    if maskable < 1:
        raise ValueError(f"instance of length {instance.attention_len} has nothing to mask")
    rng = np.random.default_rng([config.seed, stream, ordinal])
    k = masked_count(maskable, config.mask_rate)
    positions = np.sort(rng.choice(maskable, size=k, replace=False) + 1).tolist()
    draws = rng.random(k)
    if specials.first_regular < specials.vocab_size:
        replacements = rng.integers(specials.first_regular, specials.vocab_size, size=k).tolist()
    else:
        replacements = [specials.mask] * k
    ids = list(instance.token_ids)
    labels = []
    for pos, u, repl in zip(positions, draws, replacements):
        labels.append(ids[pos])
        if u < config.mask_token_rate:
            ids[pos] = specials.mask
        elif u < config.mask_token_rate + config.random_token_rate:
            ids[pos] = repl
    return TrainingInstance(ids, instance.attention_len, positions, labels, instance.split)


def unmask(instance: TrainingInstance) -> list[int]:
    """Token ids with the original labels written back at the masked positions."""
    ids = list(instance.token_ids)
    for pos, label in zip(instance.masked_positions, instance.masked_labels):
        ids[pos] = label
    return ids


def check_instance(instance: TrainingInstance, specials: SpecialIds, max_seq_len: int, mask_rate: float) -> list[str]:
    """List every layout or masking invariant the instance violates."""
    problems = []
    ids, n = instance.token_ids, instance.attention_len
    if len(ids) != max_seq_len:
        problems.append(f"length {len(ids)} != max_seq_len {max_seq_len}")
    if not 3 <= n <= len(ids):
        problems.append(f"attention_len {n} out of range")
        return problems
    if ids[0] != specials.cls:
        problems.append("first id is not [CLS]")
    if ids[n - 1] != specials.sep:
        problems.append("last attended id is not [SEP]")
    if any(i != specials.pad for i in ids[n:]):
        problems.append("non-[PAD] id past attention_len")
    positions, labels = instance.masked_positions, instance.masked_labels
    if len(positions) != len(labels):
        problems.append("masked_positions and masked_labels differ in length")
    if len(set(positions)) != len(positions):
        problems.append("duplicate masked position")
    if any(not 1 <= p <= n - 2 for p in positions):
        problems.append("masked position outside the maskable span")
    if positions and len(positions) != masked_count(n - 2, mask_rate):
        problems.append(f"{len(positions)} masked positions, expected {masked_count(n - 2, mask_rate)}")
    return problems


def shard_name(max_seq_len: int, shard: int) -> str:
    return f"instances-{max_seq_len}-{shard:05}.jsonl"


def write_instances(instances: Iterable[TrainingInstance], path) -> int:
    """Write one JSON record per line; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for inst in instances:
            f.write(json.dumps(inst.to_record(), separators=(",", ":")))
            f.write("\n")
            count += 1
    return count


def read_instances(path) -> Iterator[TrainingInstance]:
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                yield TrainingInstance.from_record(json.loads(line))


def masked_instances(
    lines_factory,
    vocab: Vocabulary,
    config: PretrainConfig | None = None,
    stream: int = 0,
) -> Iterator[TrainingInstance]:
    """Pack and mask ``dupe_factor`` passes over the corpus.

    ``lines_factory`` is called once per pass and must return a fresh line
    iterable. Each pass packs with its own short-sequence draws and every
    instance gets a distinct masking ordinal.
    """
    config = config or PretrainConfig()
    tokenizer = WordPieceTokenizer(vocab)
    ordinal = 0
    for dupe in range(config.dupe_factor):
        pass_stream = stream * config.dupe_factor + dupe
        for inst in pack_sequences(lines_factory(), vocab, config, pass_stream, tokenizer):
            yield apply_mlm_mask(inst, vocab, config, ordinal, stream)
            ordinal += 1
