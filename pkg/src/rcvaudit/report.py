"""Per-election audit reports and corpus summaries.

Reports serialize to JSON with a fixed key order; exact rationals are written
as ``"num/den"`` next to a display percentage so reruns are byte-identical.
The corpus summary is a flat CSV with columns
``section,label,numerator,denominator,value,display``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

from .certificates import FlawCertificate, FlawKind
from .detectors import DEFAULT_BUDGET, FAIL, NOT_APPLICABLE, PASS, SearchBudget, run_all_detectors
from .ingest import DEFAULT_SANITATION, CVRParseError, SanitationPolicy, load_cvr
from .model import PreferenceProfile
from .tabulation import (
    DEFAULT_POLICY,
    EliminationPolicy,
    TabulationRecord,
    classify_truncated,
    percent_display,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AuditConfig:
    sanitation: SanitationPolicy = DEFAULT_SANITATION
    budget: SearchBudget = DEFAULT_BUDGET
    elimination: EliminationPolicy = DEFAULT_POLICY
    strict_compromise: bool = False


DEFAULT_CONFIG = AuditConfig()


def parse_config(text: str, source: str = "<config>") -> AuditConfig:
    """Read ``key=value`` lines; keys are SanitationPolicy and SearchBudget field names.

    ``elimination_mode`` and ``strict_compromise`` are also accepted.  Blank
    lines and ``#`` comments are ignored.
    """
    sanitation_keys = {f.name for f in fields(SanitationPolicy)}
    budget_keys = {f.name for f in fields(SearchBudget)}
    san: dict[str, str] = {}
    bud: dict[str, int] = {}
    mode = DEFAULT_POLICY.mode
    strict = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in sanitation_keys:
            san[key] = value
        elif key in budget_keys:
            if not value.isdigit():
                raise ConfigError(f"{source}:{lineno}: {key} needs a positive integer")
            bud[key] = int(value)
        elif key == "elimination_mode":
            mode = value
        elif key == "strict_compromise":
            if value.lower() not in ("true", "false"):
                raise ConfigError(f"{source}:{lineno}: strict_compromise must be true or false")
            strict = value.lower() == "true"
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    try:
        return AuditConfig(
            SanitationPolicy(**san), SearchBudget(**bud), EliminationPolicy(mode), strict
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: Union[str, Path]) -> AuditConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))


def _rational(value: Fraction | None) -> dict | None:
    if value is None:
        return None
    return {"exact": f"{value.numerator}/{value.denominator}", "display": percent_display(value)}


def _rounds(record: TabulationRecord) -> list[dict]:
    return [
        {
            "round": i,
            "tallies": {c: r.tallies[c] for c in sorted(r.tallies)},
            "eliminated": list(r.eliminated),
            "exhausted": r.exhausted_this_round,
            "tie_broken": r.tie_broken,
        }
        for i, r in enumerate(record.rounds, 1)
    ]


@dataclass(frozen=True)
class AuditReport:
    election_id: str
    candidate_count: int
    ballots_cast: int
    truncated: bool
    majority_candidate: bool
    winner: str
    winner_votes: int | None
    winners_vote_share: Fraction | None
    flags: dict[FlawKind, str] = field(hash=False)
    certificates: tuple[FlawCertificate, ...]
    no_condorcet_winner: bool
    condorcet_winner: str | None
    rounds: TabulationRecord

    @property
    def failed(self) -> list[FlawKind]:
        return [k for k, v in self.flags.items() if v == FAIL]

    @property
    def share_display(self) -> str | None:
        if self.winners_vote_share is None:
            return None
        return percent_display(self.winners_vote_share)

    def to_dict(self) -> dict:
        return {
            "election_id": self.election_id,
            "candidate_count": self.candidate_count,
            "ballots_cast": self.ballots_cast,
            "truncated": self.truncated,
            "majority_candidate": self.majority_candidate,
            "winner": self.winner,
            "winner_votes": self.winner_votes,
            "winners_vote_share": _rational(self.winners_vote_share),
            "no_condorcet_winner": self.no_condorcet_winner,
            "condorcet_winner": self.condorcet_winner,
            "flags": {k.value: self.flags[k] for k in FlawKind},
            "certificates": [c.to_dict() for c in self.certificates],
            "rounds": _rounds(self.rounds),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def audit_profile(
    profile: PreferenceProfile, election_id: str, config: AuditConfig = DEFAULT_CONFIG
) -> AuditReport:
    results = run_all_detectors(
        profile, config.budget, config.elimination, config.strict_compromise
    )
    share = results.vote_share
    return AuditReport(
        election_id=election_id,
        candidate_count=profile.candidate_count,
        ballots_cast=profile.ballots_cast,
        truncated=classify_truncated(profile),
        majority_candidate=results.record.majority_candidate,
        winner=results.record.winner,
        winner_votes=share.winner_votes if share else None,
        winners_vote_share=share.share if share else None,
        flags=dict(results.flags),
        certificates=results.certificates,
        no_condorcet_winner=results.no_condorcet_winner,
        condorcet_winner=results.condorcet_winner,
        rounds=results.record,
    )


def audit_file(path: Union[str, Path], config: AuditConfig = DEFAULT_CONFIG) -> AuditReport:
    """Parse one canonical CSV and audit it; parse and I/O errors propagate."""
    path = Path(path)
    profile = load_cvr(path, config.sanitation)
    return audit_profile(profile, path.stem, config)


# --- corpus --------------------------------------------------------------

SUMMARY_COLUMNS = ("section", "label", "numerator", "denominator", "value", "display")


@dataclass(frozen=True)
class SummaryRow:
    section: str
    label: str
    numerator: int | None
    denominator: int | None
    value: Fraction | None
    # optional override for the display column
    note: str | None = None

    def cells(self) -> list[str]:
        def num(x):
            return "" if x is None else str(x)

        if self.value is None:
            value, display = "na", "na"
        else:
            value = f"{self.value.numerator}/{self.value.denominator}"
            display = percent_display(self.value)
        return [
            self.section,
            self.label,
            num(self.numerator),
            num(self.denominator),
            value,
            self.note or display,
        ]


@dataclass(frozen=True)
class CorpusError:
    path: str
    kind: str  # "parse" or "io"
    message: str


@dataclass
class CorpusSummary:
    reports: list[AuditReport]
    errors: list[CorpusError]
    rows: list[SummaryRow]

    def rate(self, kind: FlawKind) -> SummaryRow:
        for row in self.rows:
            if row.section == "rate" and row.label == kind.value:
                return row
        raise KeyError(kind)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in self.rows:
            writer.writerow(row.cells())
        return out.getvalue()

    def to_json(self) -> str:
        doc = {
            "reports": [r.to_dict() for r in self.reports],
            "errors": [{"path": e.path, "kind": e.kind, "message": e.message} for e in self.errors],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else None


def summarize(reports: Sequence[AuditReport], bottom: int = 5) -> list[SummaryRow]:
    """Fold per-election reports into summary rows, ordered by election id.

    Each flaw rate counts fail flags over elections where the flaw applies
    (pass or fail), so the Condorcet denominator leaves out elections with no
    Condorcet winner.
    """
    reports = sorted(reports, key=lambda r: r.election_id)
    rows: list[SummaryRow] = [SummaryRow("corpus", "elections", len(reports), None, None, "")]
    for kind in FlawKind:
        fails = sum(1 for r in reports if r.flags[kind] == FAIL)
        applicable = sum(1 for r in reports if r.flags[kind] in (PASS, FAIL))
        rows.append(SummaryRow("rate", kind.value, fails, applicable, _ratio(fails, applicable)))
    no_cw = sum(1 for r in reports if r.no_condorcet_winner)
    rows.append(SummaryRow("rate", "no_condorcet_winner", no_cw, len(reports), _ratio(no_cw, len(reports))))

    groups = {
        "all": reports,
        "truncated": [r for r in reports if r.truncated],
        "untruncated": [r for r in reports if not r.truncated],
    }
    for label, group in groups.items():
        with_share = [r for r in group if r.flags[FlawKind.MAJORITARIAN] != NOT_APPLICABLE]
        failing = [r for r in with_share if r.flags[FlawKind.MAJORITARIAN] == FAIL]
        rows.append(
            SummaryRow("majoritarian_rate", label, len(failing), len(with_share), _ratio(len(failing), len(with_share)))
        )
        mean = (
            sum((r.winners_vote_share for r in failing), Fraction(0)) / len(failing)
            if failing
            else None
        )
        rows.append(
            SummaryRow(
                "mean_failure_share",
                label,
                mean.numerator if mean is not None else None,
                mean.denominator if mean is not None else None,
                mean,
            )
        )
    for label in ("truncated", "untruncated"):
        ranked = sorted(
            (r for r in groups[label] if r.winners_vote_share is not None),
            key=lambda r: (r.winners_vote_share, r.election_id),
        )
        for r in ranked[:bottom]:
            rows.append(
                SummaryRow(f"lowest_share_{label}", r.election_id, r.winner_votes, r.ballots_cast, r.winners_vote_share)
            )
    return rows


def audit_corpus(directory: Union[str, Path], config: AuditConfig = DEFAULT_CONFIG) -> CorpusSummary:
    """Audit every ``*.csv`` in ``directory``; unreadable files are recorded and skipped."""
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(str(directory))
    reports: list[AuditReport] = []
    errors: list[CorpusError] = []
    for path in sorted(directory.glob("*.csv")):
        try:
            reports.append(audit_file(path, config))
        except CVRParseError as exc:
            errors.append(CorpusError(str(path), "parse", str(exc)))
        except (OSError, UnicodeDecodeError) as exc:
            errors.append(CorpusError(str(path), "io", str(exc)))
    reports.sort(key=lambda r: r.election_id)
    return CorpusSummary(reports, errors, summarize(reports))


def with_budget(config: AuditConfig, retabulations: int) -> AuditConfig:
    return replace(config, budget=replace(config.budget, max_retabulations_per_target=retabulations))
