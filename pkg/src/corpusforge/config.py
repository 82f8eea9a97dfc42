"""Pipeline configuration: an INI-style ``key = value`` file with sections,
overridable by ``CFORGE_<SECTION>_<KEY>`` environment variables and then by
command-line flags.

Example::

    [pipeline]
    output_dir = build
    workers = 2
    seed = 7

    [inputs]
    wiki = data/rowiki.txt
    oscar = data/oscar.txt.gz

    [clean]
    min_line_chars = 25

    [vocab]
    vocab_size = 50000
    casing = uncased

    [pretrain]
    max_seq_len = 512
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .cleaner import CleanConfig
from .pretrain import PretrainConfig
from .vocab import VocabConfig

ENV_PREFIX = "CFORGE_"
_SECTIONS = {"clean": CleanConfig, "vocab": VocabConfig, "pretrain": PretrainConfig}


@dataclass
class PipelineConfig:
    clean: CleanConfig = field(default_factory=CleanConfig)
    vocab: VocabConfig = field(default_factory=VocabConfig)
    pretrain: PretrainConfig = field(default_factory=PretrainConfig)
    inputs: dict[str, str] = field(default_factory=dict)
    output_dir: str = "."
    workers: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        clean = dataclasses.asdict(self.clean)
        clean["forbidden_chars"] = sorted(self.clean.forbidden_chars)
        return {
            "clean": clean,
            "vocab": dataclasses.asdict(self.vocab),
            "pretrain": dataclasses.asdict(self.pretrain),
            "inputs": dict(self.inputs),
            "output_dir": self.output_dir,
            "workers": self.workers,
            "seed": self.seed,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _coerce(cls, key: str, raw: str):
    defaults = cls()
    if key == "forbidden_extra" and cls is CleanConfig:
        return raw
    if not hasattr(defaults, key):
        raise ValueError(f"unknown key {key!r} for section of {cls.__name__}")
    default = getattr(defaults, key)
    if isinstance(default, bool):
        return _parse_bool(raw)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        return tuple(raw.replace(",", " ").split())
    if isinstance(default, frozenset):
        return frozenset(raw)
    return raw.strip()


def _section_values(parser: configparser.ConfigParser, section: str, env: Mapping[str, str]) -> dict[str, str]:
    values = dict(parser[section]) if parser.has_section(section) else {}
    prefix = f"{ENV_PREFIX}{section.upper()}_"
    for name, raw in env.items():
        if name.startswith(prefix):
            values[name[len(prefix):].lower()] = raw
    return values


def _build(cls, values: Mapping[str, str]):
    kwargs = {key: _coerce(cls, key, raw) for key, raw in values.items()}
    extra = kwargs.pop("forbidden_extra", None)
    obj = cls(**kwargs)
    if extra:
        obj = obj.with_forbidden(extra)
    return obj


def load_config(path=None, env: Mapping[str, str] | None = None) -> PipelineConfig:
    """Read ``path`` (if given), then apply ``CFORGE_*`` overrides from ``env``."""
    env = os.environ if env is None else env
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        parser.read_string(text, source=str(path))
    known = {"pipeline", "inputs", *_SECTIONS}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ValueError(f"unknown config section(s): {sorted(unknown)}")

    built = {name: _build(cls, _section_values(parser, name, env)) for name, cls in _SECTIONS.items()}
    pipeline = _section_values(parser, "pipeline", env)
    allowed = {"output_dir", "workers", "seed"}
    if set(pipeline) - allowed:
        raise ValueError(f"unknown [pipeline] key(s): {sorted(set(pipeline) - allowed)}")
    inputs = dict(parser["inputs"]) if parser.has_section("inputs") else {}
    return PipelineConfig(
        inputs=inputs,
        output_dir=pipeline.get("output_dir", "."),
        workers=int(pipeline.get("workers", 1)),
        seed=int(pipeline.get("seed", 0)),
        **built,
    )
