"""Line-level cleaning cascade for Romanian web and wiki text.

Every per-line function here is pure, so lines (or batches of lines) can be
farmed out to worker processes freely. ``clean_stream`` is the streaming
driver: it never holds more than the current line plus a bounded number of
in-flight batches in memory.
"""

from __future__ import annotations

import dataclasses
import functools
import gzip
import io
import json
import re
import string
import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, TextIO

from ._parallel import batched, ordered_map

DROP_RULES = (
    "too-short",
    "invalid-encoding",
    "forbidden-char",
    "digit-ratio",
    "non-ascii-ratio",
    "letter-ratio",
)
REPAIR_RULES = (
    "hyphen-join",
    "unit-join",
    "number-join",
    "soft-hyphen",
    "url",
    "email",
    "dash-norm",
    "char-norm",
    "space-collapse",
)


def default_forbidden_chars() -> frozenset[str]:
    """Control characters (C0, DEL, C1) except TAB and LF, plus U+FFFD."""
    chars = {chr(c) for c in range(0x20) if c not in (0x09, 0x0A)}
    chars.add("\x7f")
    chars.update(chr(c) for c in range(0x80, 0xA0))
    chars.add("\ufffd")
    return frozenset(chars)


@dataclass(frozen=True)
class CleanConfig:
    min_line_chars: int = 20
    max_digit_ratio: float = 0.25
    max_non_ascii_ratio: float = 0.40
    min_letter_ratio: float = 0.50
    forbidden_chars: frozenset[str] = field(default_factory=default_forbidden_chars)
    strip_urls: bool = True
    strip_emails: bool = True
    normalize_romanian_cedilla: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "forbidden_chars", frozenset(self.forbidden_chars))
        if self.min_line_chars < 1:
            raise ValueError(f"min_line_chars must be >= 1, got {self.min_line_chars}")
        for name in ("max_digit_ratio", "max_non_ascii_ratio", "min_letter_ratio"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if "\n" in self.forbidden_chars:
            raise ValueError("LF is the record separator and cannot be forbidden")
        if any(len(c) != 1 for c in self.forbidden_chars):
            raise ValueError("forbidden_chars must hold single characters")

    def with_forbidden(self, extra: Iterable[str]) -> "CleanConfig":
        return dataclasses.replace(self, forbidden_chars=self.forbidden_chars | frozenset(extra))


@dataclass(frozen=True)
class LineVerdict:
    kept: bool
    drop_rule: str | None = None
    repairs_applied: tuple[str, ...] = ()


@dataclass
class CleanReport:
    lines_in: int = 0
    lines_out: int = 0
    bytes_in: int = 0
    bytes_out: int = 0
    per_rule_drops: Counter = field(default_factory=Counter)
    per_rule_repairs: Counter = field(default_factory=Counter)
    elapsed: float = 0.0
    incomplete: bool = False

    @property
    def total_drops(self) -> int:
        return sum(self.per_rule_drops.values())

    @property
    def throughput_mb_s(self) -> float:
        return self.bytes_in / 1e6 / self.elapsed if self.elapsed > 0 else 0.0

    def merge(self, other: "CleanReport") -> None:
        self.lines_in += other.lines_in
        self.lines_out += other.lines_out
        self.bytes_in += other.bytes_in
        self.bytes_out += other.bytes_out
        self.per_rule_drops.update(other.per_rule_drops)
        self.per_rule_repairs.update(other.per_rule_repairs)
        self.incomplete = self.incomplete or other.incomplete

    def to_dict(self) -> dict:
        out: dict = {
            "lines_in": self.lines_in,
            "lines_out": self.lines_out,
            "bytes_in": self.bytes_in,
            "bytes_out": self.bytes_out,
        }
        for rule in DROP_RULES:
            out[f"drops.{rule}"] = self.per_rule_drops.get(rule, 0)
        for rule in REPAIR_RULES:
            out[f"repairs.{rule}"] = self.per_rule_repairs.get(rule, 0)
        out["elapsed_seconds"] = round(self.elapsed, 6)
        out["throughput_mb_per_s"] = round(self.throughput_mb_s, 3)
        out["incomplete"] = self.incomplete
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


class CleanAborted(OSError):
    """I/O failure mid-stream; ``report`` holds the counters up to that point."""

    def __init__(self, report: CleanReport, cause: BaseException):
        super().__init__(f"cleaning aborted after {report.lines_in} lines: {cause}")
        self.report = report


# --- character normalization -------------------------------------------------

_DASHES = "\u2010\u2011\u2012\u2013\u2014\u2015\u2212\ufe58\ufe63\uff0d"
_DASH_TABLE = str.maketrans({c: "-" for c in _DASHES})
_DASH_RE = re.compile(f"[{_DASHES}]")
_SOFT_HYPHEN = "\u00ad"
_CEDILLA_TABLE = str.maketrans({"\u015e": "\u0218", "\u015f": "\u0219", "\u0162": "\u021a", "\u0163": "\u021b"})
_CEDILLA_RE = re.compile("[\u015e\u015f\u0162\u0163]")
# zero-width junk that survives HTML extraction
_INVISIBLE_TABLE = str.maketrans({"\u200b": None, "\ufeff": None})
_QUOTE_TABLE = str.maketrans({"\u2018": "'", "\u2019": "'", "\u201c": '"', "\u201d": '"'})
_LOW_QUOTE = "\u201e"
_HIGH_CLOSE = "\u201d"
# anything the char-norm step could touch; lets clean lines skip it
_CHAR_NORM_RE = re.compile("[\u200b\ufeff\u2018\u2019\u201c\u201d\u015e\u015f\u0162\u0163]")


def _canonical_quotes(line: str) -> str:
    # A right double quote that closes a Romanian low quote is kept as-is.
    if _LOW_QUOTE not in line or _HIGH_CLOSE not in line:
        return line.translate(_QUOTE_TABLE)
    out = []
    open_low = False
    for ch in line:
        if ch == _LOW_QUOTE:
            open_low = True
            out.append(ch)
        elif ch == _HIGH_CLOSE and open_low:
            open_low = False
            out.append(ch)
        else:
            out.append(ch.translate(_QUOTE_TABLE))
    return "".join(out)


def _normalize(line: str, config: CleanConfig, repairs: list[str]) -> str:
    if _SOFT_HYPHEN in line:
        line = line.replace(_SOFT_HYPHEN, "")
        repairs.append("soft-hyphen")
    if _DASH_RE.search(line):
        line = line.translate(_DASH_TABLE)
        repairs.append("dash-norm")
    if not _CHAR_NORM_RE.search(line):
        return line
    before = line
    line = _canonical_quotes(line.translate(_INVISIBLE_TABLE))
    if config.normalize_romanian_cedilla and _CEDILLA_RE.search(line):
        line = line.translate(_CEDILLA_TABLE)
    if line != before:
        repairs.append("char-norm")
    return line


def normalize_chars(line: str, config: CleanConfig | None = None) -> str:
    """Map dash variants to ``-``, drop soft hyphens, canonicalize quotes and
    repair cedilla s/t to their comma-below forms."""
    return _normalize(line, config or DEFAULT_CONFIG, [])


# --- spacing repairs -----------------------------------------------------------

_LETTER = r"[^\W\d_]"
_HYPHEN_GAP = re.compile(rf"(?<={_LETTER})-\s+(?={_LETTER})")
# the right-hand unit is a lookahead so chains like "m/ s/ h" close in one pass
_UNIT_GAP = re.compile(rf"(?<!{_LETTER})({_LETTER}{{1,4}})(?:\s+/\s*|/\s+)(?={_LETTER}{{1,4}}(?!{_LETTER}))")
# anchored on the separator; a leading lookbehind would be tried at every offset
_NUMBER_GAP = re.compile(r"([,.])(?<=\d[,.])\s+(?=\d)")


def _join_hyphen(m: re.Match) -> str:
    return "-" if m.string[m.end()].islower() else m.group(0)


def _fix_spacing(line: str, repairs: list[str]) -> str:
    collapsed = " ".join(line.split())
    if collapsed != line:
        repairs.append("space-collapse")
    line = collapsed
    if "-" in line:
        fixed = _HYPHEN_GAP.sub(_join_hyphen, line)
        if fixed != line:
            repairs.append("hyphen-join")
            line = fixed
    if "/" in line:
        fixed = _UNIT_GAP.sub(r"\1/", line)
        if fixed != line:
            repairs.append("unit-join")
            line = fixed
    fixed = _NUMBER_GAP.sub(r"\1", line)
    if fixed != line:
        repairs.append("number-join")
        line = fixed
    return line


def fix_spacing_artifacts(line: str) -> str:
    """Rejoin "a- mi", "km/ h" and "12, 5" style breaks and collapse whitespace."""
    return _fix_spacing(line, [])


# --- URL / e-mail removal -----------------------------------------------------

_URL = re.compile(r"(?:(?:https?|ftp)://|www\.)\S*", re.IGNORECASE)
_EMAIL = re.compile(r"\S+@\S+\.[A-Za-z]{2,12}")


def _strip(line: str, config: CleanConfig, repairs: list[str]) -> str:
    changed = False
    if config.strip_urls and ("://" in line or "ww." in line.lower()):
        stripped = _URL.sub("", line)
        if stripped != line:
            repairs.append("url")
            line, changed = stripped, True
    if config.strip_emails and "@" in line:
        stripped = _EMAIL.sub("", line)
        if stripped != line:
            repairs.append("email")
            line, changed = stripped, True
    if changed:
        line = " ".join(line.split())
    return line


def strip_patterns(line: str, config: CleanConfig | None = None) -> str:
    """Delete URLs and e-mail addresses, then re-collapse the surrounding spaces."""
    return _strip(line, config or DEFAULT_CONFIG, [])


# --- filtering -------------------------------------------------------------------

_DIGIT = re.compile(r"\d")
_DELETE_DIGITS = str.maketrans("", "", string.digits)
_DELETE_ASCII_NON_LETTERS = str.maketrans("", "", "".join(chr(i) for i in range(128) if not chr(i).isalpha()))


@functools.lru_cache(maxsize=32)
def _forbidden_re(chars: frozenset[str]) -> re.Pattern | None:
    if not chars:
        return None
    return re.compile("[" + "".join(re.escape(c) for c in sorted(chars)) + "]")


def _failing_rule(line: str, config: CleanConfig) -> str | None:
    if len(line) < config.min_line_chars:
        return "too-short"
    content = "".join(line.split())
    nonspace = len(content)
    if nonspace == 0:
        return "too-short"
    forbidden = _forbidden_re(config.forbidden_chars)
    if forbidden is not None and forbidden.search(line):
        return "forbidden-char"
    if content.isascii():
        digits = nonspace - len(content.translate(_DELETE_DIGITS))
    else:
        digits = len(_DIGIT.findall(content))
    if digits > config.max_digit_ratio * nonspace:
        return "digit-ratio"
    non_ascii = nonspace - len(content.encode("ascii", "ignore"))
    if non_ascii > config.max_non_ascii_ratio * nonspace:
        return "non-ascii-ratio"
    # ASCII non-letters can go in bulk; only the remainder needs isalpha per char
    rest = content.translate(_DELETE_ASCII_NON_LETTERS)
    letters = len(rest) if rest.isalpha() or not rest else sum(map(str.isalpha, rest))
    if letters < config.min_letter_ratio * nonspace:
        return "letter-ratio"
    return None


def filter_line(line: str, config: CleanConfig | None = None) -> LineVerdict:
    """Apply the drop rules in order; the first failing rule wins."""
    rule = _failing_rule(line, config or DEFAULT_CONFIG)
    return LineVerdict(kept=rule is None, drop_rule=rule)


def drop_invalid_tokens(line: str) -> str:
    """Remove whitespace-delimited tokens that carry U+FFFD (undecodable bytes)."""
    if "\ufffd" not in line:
        return line
    return " ".join(tok for tok in line.split() if "\ufffd" not in tok)


def clean_line(line: str, config: CleanConfig | None = None) -> tuple[str | None, LineVerdict]:
    """Run the full cascade on one line.

    Returns ``(text, verdict)``; ``text`` is None when the line is dropped.
    The repair stages are iterated to a fixed point before the second filter
    pass, which is what makes the composition idempotent: a deleted URL can
    expose a new "a- mi" gap, and a re-joined unit can complete an address.
    """
    config = config or DEFAULT_CONFIG
    text = drop_invalid_tokens(line)
    if "\ufffd" in line and not text.strip():
        return None, LineVerdict(False, "invalid-encoding")
    rule = _failing_rule(text, config)
    if rule is not None:
        return None, LineVerdict(False, rule)

    repairs: list[str] = []
    while True:
        previous = text
        text = _normalize(text, config, repairs)
        text = _fix_spacing(text, repairs)
        text = _strip(text, config, repairs)
        if text == previous:
            break

    if not repairs:
        return text, LineVerdict(True, None, ())
    applied = tuple(r for r in REPAIR_RULES if r in repairs)
    rule = _failing_rule(text, config)
    if rule is not None:
        return None, LineVerdict(False, rule, applied)
    return text, LineVerdict(True, None, applied)


DEFAULT_CONFIG = CleanConfig()


# --- streaming -----------------------------------------------------------------------

GZIP_MAGIC = b"\x1f\x8b"


def open_input(path) -> BinaryIO:
    """Open a path (or ``-`` for stdin) for binary line reading, transparently
    gunzipping when the content starts with the gzip magic bytes."""
    if str(path) == "-":
        raw = sys.stdin.buffer
    else:
        raw = open(path, "rb")
    buffered = raw if hasattr(raw, "peek") else io.BufferedReader(raw)
    if buffered.peek(2)[:2] == GZIP_MAGIC:
        return gzip.GzipFile(fileobj=buffered, mode="rb")
    return buffered


def _decode_record(raw: bytes) -> str:
    if raw.endswith(b"\n"):
        raw = raw[:-1]
        if raw.endswith(b"\r"):
            raw = raw[:-1]
    return raw.decode("utf-8", errors="replace")


def _clean_batch(records: list[bytes], config: CleanConfig) -> tuple[list[str], CleanReport]:
    # output-side counters are filled in by _write, in order
    report = CleanReport()
    kept = []
    for raw in records:
        report.lines_in += 1
        report.bytes_in += len(raw)
        text, verdict = clean_line(_decode_record(raw), config)
        if text is None:
            report.per_rule_drops[verdict.drop_rule] += 1
            continue
        report.per_rule_repairs.update(verdict.repairs_applied)
        kept.append(text)
    return kept, report


def _write(kept: list[str], output: TextIO, report: CleanReport) -> None:
    for text in kept:
        output.write(text)
        output.write("\n")
        report.bytes_out += len(text.encode("utf-8")) + 1
    report.lines_out += len(kept)


def clean_stream(
    source: Iterable[bytes],
    output: TextIO,
    config: CleanConfig | None = None,
    workers: int = 1,
    batch_lines: int = 4096,
) -> CleanReport:
    """Clean newline-delimited byte records from ``source`` into ``output``.

    Kept lines are written in input order. With ``workers > 1`` batches are
    cleaned in a process pool, with at most ``2 * workers`` batches in flight
    so memory stays bounded regardless of input size.

    Raises :class:`CleanAborted` (carrying the partial, ``incomplete`` report)
    if reading or writing fails.
    """
    config = config or DEFAULT_CONFIG
    report = CleanReport()
    start = time.perf_counter()
    try:
        for kept, part in ordered_map(_clean_batch, batched(source, batch_lines), workers, config):
            report.merge(part)
            _write(kept, output, report)
    except OSError as exc:
        report.incomplete = True
        report.elapsed = time.perf_counter() - start
        raise CleanAborted(report, exc) from exc
    report.elapsed = time.perf_counter() - start
    return report


def clean_file(src, dst, config: CleanConfig | None = None, workers: int = 1) -> CleanReport:
    """Convenience wrapper: clean the file at ``src`` (plain or gzip) into ``dst``."""
    with open_input(src) as fin, open(dst, "w", encoding="utf-8", newline="\n") as fout:
        return clean_stream(fin, fout, config, workers=workers)
