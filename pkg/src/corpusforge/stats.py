"""Corpus bookkeeping: per-corpus line/word/byte tallies and the held-out
development sample drawn proportionally to each corpus's line count."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .cleaner import open_input


@dataclass(frozen=True)
class CorpusCounts:
    lines: int = 0
    words: int = 0
    bytes: int = 0

    def __add__(self, other: "CorpusCounts") -> "CorpusCounts":
        return CorpusCounts(self.lines + other.lines, self.words + other.words, self.bytes + other.bytes)

    def to_dict(self) -> dict:
        return {"lines": self.lines, "words": self.words, "bytes": self.bytes}


@dataclass
class CorpusStats:
    per_corpus: dict[str, CorpusCounts] = field(default_factory=dict)

    @property
    def total(self) -> CorpusCounts:
        return sum(self.per_corpus.values(), CorpusCounts())

    def to_dict(self) -> dict:
        return {
            "corpora": {name: c.to_dict() for name, c in self.per_corpus.items()},
            "total": self.total.to_dict(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def format_table(self) -> str:
        """Render as a fixed-width table with M/GB scaling."""
        rows = [("Corpus", "Lines", "Words", "Size")]
        for name, c in [*self.per_corpus.items(), ("Total", self.total)]:
            rows.append((name, f"{c.lines / 1e6:.1f} M", f"{c.words / 1e6:.1f} M", _human_bytes(c.bytes)))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = []
        for row in rows:
            cells = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
            lines.append("  ".join(cells))
        return "\n".join(lines)


def _human_bytes(n: int) -> str:
    for unit, scale in (("GB", 1e9), ("MB", 1e6), ("KB", 1e3)):
        if n >= scale:
            return f"{n / scale:.1f} {unit}"
    return f"{n} B"


def count_records(records: Iterable[bytes]) -> CorpusCounts:
    lines = words = size = 0
    for raw in records:
        lines += 1
        size += len(raw)
        words += len(raw.split())
    return CorpusCounts(lines, words, size)


def _records(source) -> Iterable[bytes]:
    if isinstance(source, (str, Path)):
        with open_input(source) as f:
            yield from f
    else:
        yield from source


def corpus_stats(inputs: Mapping[str, object]) -> CorpusStats:
    """Lines, whitespace-delimited words and UTF-8 bytes of each named input.

    Inputs are paths or iterables of raw byte records.
    """
    return CorpusStats({name: count_records(_records(src)) for name, src in inputs.items()})


def allocate_quotas(line_counts: Mapping[str, int], n: int) -> dict[str, int]:
    """Split ``n`` across corpora proportionally to their line counts.

    Largest-remainder rounding on exact integer arithmetic, so the quotas
    always sum to ``n``. Equal remainders go to the corpus listed first.

    >>> allocate_quotas({"opus": 551_000, "oscar": 336_000, "wiki": 15_000}, 5000)
    {'opus': 3054, 'oscar': 1863, 'wiki': 83}
    """
    total = sum(line_counts.values())
    if n < 0:
        raise ValueError("sample size must be non-negative")
    if n > total:
        raise ValueError(f"cannot sample {n} lines from {total}")
    if total == 0:
        return {name: 0 for name in line_counts}
    names = list(line_counts)
    quotas = {name: n * line_counts[name] // total for name in names}
    remainders = {name: n * line_counts[name] % total for name in names}
    short = n - sum(quotas.values())
    order = sorted(range(len(names)), key=lambda i: (-remainders[names[i]], i))
    for i in order[:short]:
        quotas[names[i]] += 1
    return quotas


def reservoir_sample(items: Iterable, k: int, rng: random.Random) -> list[tuple[int, object]]:
    """Uniform sample of ``k`` items without replacement in a single pass.

    Returns ``(index, item)`` pairs sorted by index.
    """
    reservoir: list[tuple[int, object]] = []
    if k <= 0:
        return reservoir
    for i, item in enumerate(items):
        if i < k:
            reservoir.append((i, item))
        else:
            j = rng.randrange(i + 1)
            if j < k:
                reservoir[j] = (i, item)
    reservoir.sort(key=lambda pair: pair[0])
    return reservoir


def corpus_rng(seed: int, name: str) -> random.Random:
    # str seeds are hashed with SHA-512, so this is stable across processes
    return random.Random(f"{seed}/{name}")


@dataclass
class DevSample:
    quotas: dict[str, int]
    manifest: list[tuple[str, int]]
    lines: list[str]


def _decode(raw: bytes) -> str:
    return raw.rstrip(b"\n").rstrip(b"\r").decode("utf-8", errors="replace")


WEIGHTS = ("lines", "words", "bytes")


def sample_dev(
    inputs: Mapping[str, object],
    n: int = 5000,
    seed: int = 0,
    dev_path=None,
    manifest_path=None,
    train_dir=None,
    weight: str = "lines",
) -> DevSample:
    """Draw an ``n``-line development sample spread over the corpora by size.

    Size is the line count by default; ``weight`` may also be ``"words"`` or
    ``"bytes"``. ``inputs`` maps corpus names to paths (they are read two or
    three times). The sample is written to ``dev_path`` and its provenance
    (``corpus<TAB>line_index``) to ``manifest_path`` when given; with
    ``train_dir`` every corpus is re-emitted there minus its sampled lines.
    """
    if weight not in WEIGHTS:
        raise ValueError(f"weight must be one of {WEIGHTS}, got {weight!r}")
    counts = {name: count_records(_records(src)) for name, src in inputs.items()}
    quotas = allocate_quotas({name: getattr(c, weight) for name, c in counts.items()}, n)
    for name, quota in quotas.items():
        if quota > counts[name].lines:
            raise ValueError(f"{name}: quota of {quota} lines exceeds its {counts[name].lines} lines")
    manifest: list[tuple[str, int]] = []
    lines: list[str] = []
    for name, src in inputs.items():
        for index, raw in reservoir_sample(_records(src), quotas[name], corpus_rng(seed, name)):
            manifest.append((name, index))
            lines.append(_decode(raw))

    if dev_path is not None:
        with open(dev_path, "w", encoding="utf-8", newline="\n") as f:
            f.writelines(line + "\n" for line in lines)
    if manifest_path is not None:
        with open(manifest_path, "w", encoding="utf-8", newline="\n") as f:
            f.writelines(f"{name}\t{index}\n" for name, index in manifest)
    if train_dir is not None:
        write_train_split(inputs, manifest, train_dir)
    return DevSample(quotas, manifest, lines)


def write_train_split(inputs: Mapping[str, object], manifest: Iterable[tuple[str, int]], train_dir) -> dict[str, Path]:
    """Copy each corpus to ``train_dir/<name>.txt`` without its held-out lines."""
    held_out: dict[str, set[int]] = {name: set() for name in inputs}
    for name, index in manifest:
        held_out[name].add(index)
    train_dir = Path(train_dir)
    train_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, src in inputs.items():
        out_path = train_dir / f"{name}.txt"
        skip = held_out[name]
        with open(out_path, "w", encoding="utf-8", newline="\n") as f:
            for index, raw in enumerate(_records(src)):
                if index not in skip:
                    f.write(_decode(raw) + "\n")
        written[name] = out_path
    return written


def read_manifest(path) -> list[tuple[str, int]]:
    entries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            name, sep, index = line.rstrip("\n").rpartition("\t")
            if not sep or not index.isdigit():
                raise ValueError(f"{path}:{lineno}: expected 'corpus<TAB>line_index'")
            entries.append((name, int(index)))
    return entries
