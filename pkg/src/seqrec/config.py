"""Run configuration: one flat mapping, five train/test layouts.

A configuration file is plain `key = value` text (# comments, blank
lines ignored); every key can also be set from the command line, and
command-line values win. config_type picks which split parts feed the
candidate index and which are held out; embeddings always train on
part A.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import FormatError, SeqRecError

# config_type -> (train parts, test parts)
PART_MAP: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "I": (("A",), ("B", "C", "D")),
    "II": (("A", "B"), ("C", "D")),
    "III": (("A", "B", "C"), ("D",)),
    "IV": (("B",), ("C", "D")),
    "V": (("B", "C"), ("D",)),
}

CONFIG_TYPES = tuple(PART_MAP)


@dataclass(frozen=True)
class EvalConfig:
    config_type: str = "I"
    mode: str = "sg"
    min_n: int = 1
    max_n: int = 5
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    lr: float = 0.025
    min_count: int = 1
    bucket_count: int = 2_000_000
    sample: float = 0.0
    with_boundaries: bool = True
    k: int = 10
    # carried for config compatibility; the full-scan path ignores it
    n_neighbors: int = 10
    gap_seconds: int = 28800
    boundary: float = 0.5
    coldstart_fraction: float = 0.5
    workers: int = 1
    seed: int | None = None

    def __post_init__(self):
        if self.config_type not in PART_MAP:
            raise SeqRecError(
                "config_type must be one of %s" % (", ".join(CONFIG_TYPES),)
            )

    @property
    def train_parts(self) -> tuple[str, ...]:
        return PART_MAP[self.config_type][0]

    @property
    def test_parts(self) -> tuple[str, ...]:
        return PART_MAP[self.config_type][1]

    def require_seed(self) -> int:
        if self.seed is None:
            raise SeqRecError("seed is required (pass --seed or set seed=)")
        return self.seed


_FIELD_TYPES = {f.name: f.type for f in fields(EvalConfig)}
_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def coerce_value(key: str, raw: str):
    """Parse a textual config value into the field's type."""
    if key not in _FIELD_TYPES:
        raise SeqRecError("unknown config key %r" % (key,))
    ftype = _FIELD_TYPES[key]
    raw = raw.strip()
    if ftype == "bool":
        low = raw.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise SeqRecError("config key %s expects a boolean, got %r" % (key, raw))
    try:
        if ftype == "int" or ftype == "int | None":
            return int(raw)
        if ftype == "float":
            return float(raw)
    except ValueError as exc:
        raise SeqRecError("config key %s: %s" % (key, exc)) from exc
    return raw


def parse_config_file(path) -> dict[str, object]:
    """Flat key=value text to a typed mapping."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError("cannot read %s: %s" % (path, exc)) from exc
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise FormatError("%s:%d: expected key = value" % (path, lineno))
        key, raw = stripped.split("=", 1)
        values[key.strip()] = coerce_value(key.strip(), raw)
    return values


def build_config(
    file_values: dict[str, object] | None = None,
    overrides: dict[str, object] | None = None,
) -> EvalConfig:
    """Defaults, then config file, then explicit overrides."""
    merged: dict[str, object] = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if key not in _FIELD_TYPES:
                raise SeqRecError("unknown config key %r" % (key,))
            if value is not None:
                merged[key] = value
    return EvalConfig(**merged)
