"""Reader and writer for the canonical aggregated cast-vote-record CSV.

Grammar::

    # truncation_level=3           optional comment lines, before the header
    # candidates=Alice,Bob,Carol   optional; when present, unknown tokens are errors
    # write_ins=Carol              optional; marks named write-in candidates
    # ballots_cast=140             optional; total electorate when some ballots
    #                              ranked none of the listed candidates
    count,rank_1,rank_2,rank_3
    120,Alice,Bob,
    5,Bob,$SKIP,Carol
    3,$WRITEIN,Alice,$OVERVOTE

``count`` must be a positive integer.  Trailing empty cells are allowed;
interior empty cells are not (use ``$SKIP``).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, TextIO, Union

from .model import WRITE_IN_ID, Candidate, PreferenceProfile, restrict_profile

WRITE_IN = WRITE_IN_ID
OVERVOTE = "$OVERVOTE"
SKIP = "$SKIP"
TOKENS = (WRITE_IN, OVERVOTE, SKIP)


class CVRParseError(ValueError):
    """A located parse failure."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        where = source or "<input>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class MalformedHeaderError(CVRParseError):
    pass


class UnknownCandidateError(CVRParseError):
    pass


class BadCountError(CVRParseError):
    pass


class MalformedRowError(CVRParseError):
    pass


class EmptyCVRError(CVRParseError):
    pass


@dataclass(frozen=True)
class SanitationPolicy:
    """Per-ballot cleaning rules, applied as duplicates, then skips, then overvotes.

    Defaults: a repeated candidate keeps its first mark, skipped positions are
    compressed out, an overvote ends the ballot, and write-ins are removed
    from the election before analysis.
    """

    overvote_rule: Literal["truncate_at", "skip_position"] = "truncate_at"
    skip_rule: Literal["compress", "truncate_after_two_consecutive"] = "compress"
    duplicate_rule: Literal["keep_first"] = "keep_first"
    write_in_rule: Literal["keep", "eliminate_before_analysis"] = "eliminate_before_analysis"

    def __post_init__(self):
        allowed = {
            "overvote_rule": ("truncate_at", "skip_position"),
            "skip_rule": ("compress", "truncate_after_two_consecutive"),
            "duplicate_rule": ("keep_first",),
            "write_in_rule": ("keep", "eliminate_before_analysis"),
        }
        for name, options in allowed.items():
            if getattr(self, name) not in options:
                raise ValueError(f"{name} must be one of {options}, got {getattr(self, name)!r}")


DEFAULT_SANITATION = SanitationPolicy()


def sanitize(cells: list[str], policy: SanitationPolicy = DEFAULT_SANITATION) -> tuple[str, ...]:
    """Turn one raw ballot into a clean ranking (possibly empty)."""
    seen: set[str] = set()
    deduped = []
    for cell in cells:
        if cell not in (OVERVOTE, SKIP):
            if cell in seen:
                cell = SKIP
            else:
                seen.add(cell)
        deduped.append(cell)

    compressed = []
    for i, cell in enumerate(deduped):
        if cell == SKIP:
            if (
                policy.skip_rule == "truncate_after_two_consecutive"
                and i + 1 < len(deduped)
                and deduped[i + 1] == SKIP
            ):
                break
            continue
        compressed.append(cell)

    ranking = []
    for cell in compressed:
        if cell == OVERVOTE:
            if policy.overvote_rule == "truncate_at":
                break
            continue
        ranking.append(cell)
    return tuple(ranking)


def _parse_comment(text: str, lineno: int, source: str | None, meta: dict):
    body = text[1:].strip()
    if not body or "=" not in body:
        return
    key, value = (s.strip() for s in body.split("=", 1))
    if key in ("truncation_level", "ballots_cast"):
        number = int(value) if value.isdigit() else 0
        if number < 1:
            raise MalformedHeaderError(
                f"{key} must be a positive integer, got {value!r}", lineno, source
            )
        meta[key] = number
    elif key in ("candidates", "write_ins"):
        names = [v.strip() for v in value.split(",") if v.strip()]
        for name in names:
            if name.startswith("$") and name != WRITE_IN:
                raise MalformedHeaderError(f"reserved token {name!r} in {key}", lineno, source)
        meta[key] = names


def parse_cvr(
    stream: Union[TextIO, str],
    policy: SanitationPolicy = DEFAULT_SANITATION,
    *,
    source: str | None = None,
) -> PreferenceProfile:
    """Parse canonical CSV text (a stream or a string) into a profile.

    Ballots that end up empty after sanitation are left out of
    ``ballots_cast`` and reported in ``profile.discarded``.
    """
    text = stream if isinstance(stream, str) else stream.read()
    lines = text.splitlines()
    meta: dict = {}
    lineno = 0
    header = None
    while lineno < len(lines):
        raw = lines[lineno]
        lineno += 1
        if raw.startswith("\ufeff"):
            raw = raw[1:]
        if raw.startswith("#"):
            _parse_comment(raw, lineno, source, meta)
            continue
        if not raw.strip():
            continue
        header = next(csv.reader([raw]))
        break
    if header is None:
        raise MalformedHeaderError("missing header row", lineno or 1, source)
    header = [h.strip() for h in header]
    while len(header) > 1 and header[-1] == "":
        header.pop()
    expected = ["count"] + [f"rank_{i}" for i in range(1, len(header))]
    if len(header) < 2 or header != expected:
        raise MalformedHeaderError(
            f"header must be count,rank_1,...,rank_k; got {','.join(header)!r}", lineno, source
        )
    width = len(header) - 1
    header_line = lineno

    declared = meta.get("candidates")
    write_ins = set(meta.get("write_ins", ()))
    level = meta.get("truncation_level")
    if declared is not None and not write_ins <= set(declared) | {WRITE_IN}:
        raise MalformedHeaderError(
            f"write_ins not among candidates: {sorted(write_ins - set(declared))}",
            header_line,
            source,
        )

    seen_candidates: set[str] = set(declared or ())
    counts: dict[tuple[str, ...], int] = {}
    discarded = 0
    rows = 0
    body = "\n".join(lines[header_line:])
    for offset, row in enumerate(csv.reader(io.StringIO(body))):
        where = header_line + offset + 1
        cells = [c.strip() for c in row]
        if not any(cells):
            continue
        while cells and cells[-1] == "":
            cells.pop()
        if len(cells) - 1 > width:
            raise MalformedRowError(
                f"row has {len(cells) - 1} rank cells but the header declares {width}",
                where,
                source,
            )
        try:
            count = int(cells[0])
        except ValueError:
            count = 0
        if count < 1 or not cells[0].isdigit():
            raise BadCountError(f"count must be a positive integer, got {cells[0]!r}", where, source)
        marks = cells[1:]
        if "" in marks:
            raise MalformedRowError("empty interior cell; mark skipped ranks with $SKIP", where, source)
        if level is not None and len(marks) > level:
            raise MalformedRowError(
                f"{len(marks)} ranks exceed truncation_level={level}", where, source
            )
        for mark in marks:
            if mark.startswith("$"):
                if mark not in TOKENS:
                    raise UnknownCandidateError(f"unknown token {mark!r}", where, source)
                if mark == WRITE_IN:
                    seen_candidates.add(WRITE_IN)
                continue
            if declared is not None and mark not in declared:
                raise UnknownCandidateError(f"unknown candidate {mark!r}", where, source)
            seen_candidates.add(mark)
        rows += 1
        ranking = sanitize(marks, policy)
        if ranking:
            counts[ranking] = counts.get(ranking, 0) + count
        else:
            discarded += count

    if rows == 0:
        raise EmptyCVRError("no ballot rows", max(len(lines), 1), source)
    candidates = [
        Candidate(cid, is_write_in=(cid == WRITE_IN or cid in write_ins))
        for cid in sorted(seen_candidates)
    ]
    total = meta.get("ballots_cast")
    if total is not None and total < sum(counts.values()):
        raise MalformedHeaderError(
            f"ballots_cast={total} is below the {sum(counts.values())} ballots listed",
            header_line,
            source,
        )
    profile = PreferenceProfile.build(
        candidates, counts, truncation_level=level, ballots_cast=total, discarded=discarded
    )
    if policy.write_in_rule == "eliminate_before_analysis":
        flagged = [c.id for c in profile.candidates if c.is_write_in]
        if flagged and len(flagged) < profile.candidate_count:
            profile = restrict_profile(profile, flagged, keep_ballots_cast=total is not None)
        elif flagged:
            raise CVRParseError("every candidate is a write-in", header_line, source)
    return profile


def load_cvr(path: Union[str, Path], policy: SanitationPolicy = DEFAULT_SANITATION) -> PreferenceProfile:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        return parse_cvr(fh, policy, source=str(path))


def eliminate_write_ins(profile: PreferenceProfile) -> PreferenceProfile:
    """Drop every write-in candidate, transferring their ballots onward."""
    flagged = [c.id for c in profile.candidates if c.is_write_in]
    if not flagged:
        return profile
    if len(flagged) == profile.candidate_count:
        raise ValueError("every candidate is a write-in")
    return restrict_profile(profile, flagged)


def serialize_profile(profile: PreferenceProfile) -> str:
    """Canonical CSV for a normalized profile; ``parse_cvr`` inverts it."""
    for c in profile.candidates:
        if c.id != WRITE_IN and (c.id.startswith("$") or "," in c.id or "\n" in c.id):
            raise ValueError(f"candidate id {c.id!r} cannot be written to canonical CSV")
    out = io.StringIO()
    out.write("# candidates=" + ",".join(profile.candidate_ids) + "\n")
    named_write_ins = [c.id for c in profile.candidates if c.is_write_in and c.id != WRITE_IN]
    if named_write_ins:
        out.write("# write_ins=" + ",".join(named_write_ins) + "\n")
    if profile.truncation_level is not None:
        out.write(f"# truncation_level={profile.truncation_level}\n")
    if profile.ballots_cast != profile.total_ranked:
        out.write(f"# ballots_cast={profile.ballots_cast}\n")
    width = max([len(bt.ranking) for bt in profile.ballot_types] or [1])
    if profile.truncation_level is not None and width > profile.truncation_level:
        raise ValueError(
            f"a ranking of length {width} exceeds truncation_level={profile.truncation_level}"
        )
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["count"] + [f"rank_{i}" for i in range(1, width + 1)])
    for bt in profile.ballot_types:
        writer.writerow([bt.count, *bt.ranking] + [""] * (width - len(bt.ranking)))
    return out.getvalue()


def write_cvr(profile: PreferenceProfile, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_profile(profile), encoding="utf-8")
