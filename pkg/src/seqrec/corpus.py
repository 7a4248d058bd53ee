"""Interaction logs, sequence construction and time-based eval splits.

Input is a TSV event log (`user_id  item_id  timestamp  [session_id]`,
`#` comments ignored). Events are grouped into per-user sequences by
session id when present, otherwise by a time-gap rule, and sequences
are split into four parts for evaluation:

* A: everything whose start time falls in the first `boundary`
  fraction of the global time range;
* per user, among the remaining sequences: B is the first, D the
  last, C everything in between. A user with exactly one second-half
  sequence contributes it to both B and D and is flagged so the
  harness never trains and tests on it in the same configuration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import FormatError, SeqRecError
from .subseq import ITEM_SEP, deserialize, validate_item_id

logger = logging.getLogger(__name__)

DEFAULT_GAP_SECONDS = 28800  # 8 hours
PART_NAMES = ("A", "B", "C", "D")

FORMAT_EVENTS = "tsv_events"
FORMAT_SESSIONS = "tsv_sessions"
_FORMATS = (FORMAT_EVENTS, FORMAT_SESSIONS)

_FLAG_DUP = "B_EQ_D"
_NO_FLAG = "-"


@dataclass(frozen=True)
class Interaction:
    user_id: str
    item_id: str
    timestamp: int
    session_id: str | None = None


@dataclass(frozen=True)
class Sequence:
    """A temporally ordered run of one user's items."""

    items: tuple[str, ...]
    user_id: str
    start_time: int
    seq_index: int


@dataclass
class UserProfile:
    user_id: str
    sequences: list[Sequence] = field(default_factory=list)


@dataclass
class EvalSplit:
    """Four-way A/B/C/D split of a corpus.

    part_a keeps whole profiles (it is the embedding training corpus);
    B, C and D are per-user sequence groups. flagged_users lists users
    whose single second-half sequence serves as both B and D.
    """

    part_a: list[UserProfile]
    part_b: dict[str, list[Sequence]]
    part_c: dict[str, list[Sequence]]
    part_d: dict[str, list[Sequence]]
    flagged_users: tuple[str, ...] = ()

    def part(self, name: str) -> dict[str, list[Sequence]]:
        """Sequences of one part as a per-user mapping."""
        if name == "A":
            return {p.user_id: list(p.sequences) for p in self.part_a if p.sequences}
        if name == "B":
            return {u: list(s) for u, s in self.part_b.items()}
        if name == "C":
            return {u: list(s) for u, s in self.part_c.items()}
        if name == "D":
            return {u: list(s) for u, s in self.part_d.items()}
        raise SeqRecError("unknown part %r" % (name,))


def parse_log(path, fmt: str = FORMAT_EVENTS) -> tuple[list[Interaction], int]:
    """Read an interaction log.

    Returns (events, skipped) where skipped counts malformed rows
    (wrong column count, empty fields, bad timestamp). Rows whose ids
    contain reserved characters are fatal, not skipped: they would
    corrupt token serialization downstream.
    """
    if fmt not in _FORMATS:
        raise SeqRecError("unknown log format %r (use %s)" % (fmt, "|".join(_FORMATS)))
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError("cannot read %s: %s" % (path, exc)) from exc

    events: list[Interaction] = []
    skipped = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if fmt == FORMAT_SESSIONS:
            ok_cols = len(cols) == 4
        else:
            ok_cols = len(cols) in (3, 4)
        if not ok_cols:
            skipped += 1
            continue
        user_id, item_id, ts_text = cols[0], cols[1], cols[2]
        if not user_id or not item_id:
            skipped += 1
            continue
        try:
            timestamp = int(ts_text)
        except ValueError:
            skipped += 1
            continue
        if timestamp < 0:
            skipped += 1
            continue
        validate_item_id(item_id)  # reserved character: fatal
        validate_item_id(user_id)
        session_id = cols[3] if fmt == FORMAT_SESSIONS else None
        if session_id == "":
            skipped += 1
            continue
        events.append(Interaction(user_id, item_id, timestamp, session_id))
    if skipped:
        logger.warning("parse_log(%s): skipped %d malformed rows", path, skipped)
    return events, skipped


def _boundary_between(prev: Interaction, cur: Interaction, gap_seconds: int) -> bool:
    # Session ids, when both present, override the gap rule entirely.
    if prev.session_id is not None and cur.session_id is not None:
        return cur.session_id != prev.session_id
    return cur.timestamp - prev.timestamp > gap_seconds


def build_sequences(
    events: Iterable[Interaction], gap_seconds: int = DEFAULT_GAP_SECONDS
) -> list[UserProfile]:
    """Group events into per-user sequences.

    Events are stably sorted by timestamp inside each user (ties keep
    input order), then cut where the session id changes or, without
    session ids, where the time gap exceeds gap_seconds.
    """
    if gap_seconds < 0:
        raise SeqRecError("gap_seconds must be >= 0")
    per_user: dict[str, list[Interaction]] = {}
    for ev in events:
        per_user.setdefault(ev.user_id, []).append(ev)

    profiles: list[UserProfile] = []
    for user_id in sorted(per_user):
        evs = sorted(per_user[user_id], key=lambda e: e.timestamp)
        runs: list[list[Interaction]] = []
        for ev in evs:
            if runs and not _boundary_between(runs[-1][-1], ev, gap_seconds):
                runs[-1].append(ev)
            else:
                runs.append([ev])
        sequences = [
            Sequence(
                items=tuple(e.item_id for e in run),
                user_id=user_id,
                start_time=run[0].timestamp,
                seq_index=idx,
            )
            for idx, run in enumerate(runs)
        ]
        profiles.append(UserProfile(user_id=user_id, sequences=sequences))
    return profiles


def make_split(profiles: Iterable[UserProfile], boundary: float = 0.5) -> EvalSplit:
    """Time-based four-way split.

    The cutoff is t_min + boundary * (t_max - t_min) over all sequence
    start times; start_time < cutoff goes to A. Every input sequence
    lands in exactly one part, except that a user whose second half
    holds a single sequence has it doubled into B and D (flagged).
    """
    if not (0.0 < boundary < 1.0):
        raise SeqRecError("boundary must lie strictly between 0 and 1")
    profiles = list(profiles)
    starts = [s.start_time for p in profiles for s in p.sequences]
    if not starts:
        raise SeqRecError("cannot split an empty corpus")
    t_min, t_max = min(starts), max(starts)
    cutoff = t_min + boundary * (t_max - t_min)

    part_a: list[UserProfile] = []
    part_b: dict[str, list[Sequence]] = {}
    part_c: dict[str, list[Sequence]] = {}
    part_d: dict[str, list[Sequence]] = {}
    flagged: list[str] = []
    for prof in sorted(profiles, key=lambda p: p.user_id):
        first = [s for s in prof.sequences if s.start_time < cutoff]
        second = [s for s in prof.sequences if s.start_time >= cutoff]
        second.sort(key=lambda s: (s.start_time, s.seq_index))
        if first:
            part_a.append(UserProfile(prof.user_id, first))
        if not second:
            continue
        if len(second) == 1:
            part_b[prof.user_id] = [second[0]]
            part_d[prof.user_id] = [second[0]]
            flagged.append(prof.user_id)
        else:
            part_b[prof.user_id] = [second[0]]
            part_d[prof.user_id] = [second[-1]]
            if len(second) > 2:
                part_c[prof.user_id] = second[1:-1]
    return EvalSplit(part_a, part_b, part_c, part_d, tuple(flagged))


# ---------------------------------------------------------------------------
# TSV serialization: sequences files and split directories
# ---------------------------------------------------------------------------

_SEQ_HEADER = "# user_id\tseq_index\tstart_time\ttoken\tpart\tflag"


def _seq_row(seq: Sequence, part: str, flag: str) -> str:
    return "\t".join(
        (
            seq.user_id,
            str(seq.seq_index),
            str(seq.start_time),
            ITEM_SEP.join(seq.items),
            part,
            flag,
        )
    )


def write_sequences(path, sequences: Iterable[Sequence], part: str = "-") -> None:
    """One sequence per row, sorted by (user_id, seq_index); bit-stable."""
    rows = sorted(sequences, key=lambda s: (s.user_id, s.seq_index))
    lines = [_SEQ_HEADER] + [_seq_row(s, part, _NO_FLAG) for s in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_sequences(path) -> list[Sequence]:
    seqs, _parts, _flags = _read_seq_file(path)
    return seqs


def _read_seq_file(path) -> tuple[list[Sequence], list[str], list[str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError("cannot read %s: %s" % (path, exc)) from exc
    seqs: list[Sequence] = []
    parts: list[str] = []
    flags: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 4:
            raise FormatError("%s:%d: expected >=4 columns" % (path, lineno))
        user_id, seq_index, start_time, token = cols[0], cols[1], cols[2], cols[3]
        try:
            seq = Sequence(
                items=deserialize(token),
                user_id=user_id,
                start_time=int(start_time),
                seq_index=int(seq_index),
            )
        except (ValueError, SeqRecError) as exc:
            raise FormatError("%s:%d: bad row (%s)" % (path, lineno, exc)) from exc
        seqs.append(seq)
        parts.append(cols[4] if len(cols) > 4 else "-")
        flags.append(cols[5] if len(cols) > 5 else _NO_FLAG)
    return seqs, parts, flags


def split_file(outdir, part: str) -> Path:
    return Path(outdir) / ("part_%s.tsv" % part.lower())


def write_split(split: EvalSplit, outdir) -> None:
    """Write part_a.tsv .. part_d.tsv; byte-identical for identical input."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    flagged = set(split.flagged_users)
    for part in PART_NAMES:
        per_user = split.part(part)
        rows: list[Sequence] = [s for seqs in per_user.values() for s in seqs]
        rows.sort(key=lambda s: (s.user_id, s.seq_index))
        lines = [_SEQ_HEADER]
        for s in rows:
            dup = part in ("B", "D") and s.user_id in flagged
            lines.append(_seq_row(s, part, _FLAG_DUP if dup else _NO_FLAG))
        split_file(outdir, part).write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )


def read_split(outdir) -> EvalSplit:
    outdir = Path(outdir)
    by_part: dict[str, dict[str, list[Sequence]]] = {}
    flagged: set[str] = set()
    for part in PART_NAMES:
        seqs, _parts, flags = _read_seq_file(split_file(outdir, part))
        per_user: dict[str, list[Sequence]] = {}
        for seq, flag in zip(seqs, flags):
            per_user.setdefault(seq.user_id, []).append(seq)
            if flag == _FLAG_DUP:
                flagged.add(seq.user_id)
        by_part[part] = per_user
    part_a = [
        UserProfile(user_id, sorted(seqs, key=lambda s: s.seq_index))
        for user_id, seqs in sorted(by_part["A"].items())
    ]
    return EvalSplit(
        part_a=part_a,
        part_b=by_part["B"],
        part_c=by_part["C"],
        part_d=by_part["D"],
        flagged_users=tuple(sorted(flagged)),
    )
