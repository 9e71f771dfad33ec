"""Flaw certificates: concrete profile edits that witness a failure.

A certificate is never trusted.  :func:`check_certificate` re-applies the
edit to the original profile, re-tabulates and checks the flaw-specific
predicate from scratch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Literal, Mapping

from .model import PreferenceProfile, Ranking, ranks_above, restrict_profile
from .tabulation import (
    DEFAULT_POLICY,
    EliminationPolicy,
    condorcet_winner,
    pairwise,
    tabulate,
    winners_vote_share,
)


class FlawKind(str, enum.Enum):
    CONDORCET = "condorcet"
    SPOILER = "spoiler"
    UPWARD_MONO = "upward_mono"
    DOWNWARD_MONO = "downward_mono"
    TRUNCATION = "truncation"
    NO_SHOW = "no_show"
    COMPROMISE = "compromise"
    MAJORITARIAN = "majoritarian"

    def __str__(self):
        return self.value


ModificationKind = Literal[
    "candidate_removal", "ballot_shift", "ballot_removal", "ballot_truncation", "none"
]


class CertificateError(AssertionError):
    """Raised when a certificate fails re-verification."""


@dataclass(frozen=True)
class BallotMove:
    """Change ``count`` ballots of ranking ``source`` into ``target``.

    An empty ``target`` removes the ballots from the election.
    """

    source: Ranking
    target: Ranking
    count: int

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        if self.count < 1:
            raise ValueError("a move needs a positive count")


@dataclass(frozen=True)
class Modification:
    kind: ModificationKind
    removed_candidates: tuple[str, ...] = ()
    moves: tuple[BallotMove, ...] = ()
    shifted: str | None = None

    @classmethod
    def none(cls) -> "Modification":
        return cls("none")

    @classmethod
    def removal_of_candidates(cls, removed) -> "Modification":
        return cls("candidate_removal", removed_candidates=tuple(sorted(removed)))

    @property
    def ballots_touched(self) -> int:
        return sum(m.count for m in self.moves)


def _strip(ranking: Ranking, c: str) -> Ranking:
    return tuple(x for x in ranking if x != c)


def _check_shape(mod: Modification) -> None:
    if mod.kind in ("none", "candidate_removal"):
        if mod.moves:
            raise CertificateError(f"{mod.kind} modification carries ballot moves")
        return
    if not mod.moves:
        raise CertificateError("ballot modification without moves")
    for m in mod.moves:
        if mod.kind == "ballot_shift":
            c = mod.shifted
            if c is None or c not in m.target:
                raise CertificateError("shift must name a shifted candidate present on the target")
            if m.source == m.target:
                raise CertificateError("shift leaves the ballot unchanged")
            if _strip(m.source, c) != _strip(m.target, c):
                raise CertificateError(
                    f"shift {m.source} -> {m.target} reorders candidates other than {c}"
                )
        elif mod.kind == "ballot_removal":
            if m.target:
                raise CertificateError("removal move has a target ranking")
        elif mod.kind == "ballot_truncation":
            if not m.target or len(m.target) >= len(m.source) or m.source[: len(m.target)] != m.target:
                raise CertificateError(f"{m.target} is not a proper nonempty prefix of {m.source}")
        else:
            raise CertificateError(f"unknown modification kind {mod.kind!r}")


def apply_modification(profile: PreferenceProfile, mod: Modification) -> PreferenceProfile:
    """Return the hypothetical profile produced by ``mod``.

    Removed ballots leave ``ballots_cast`` (those voters abstain); shifted and
    truncated ballots stay in it.
    """
    _check_shape(mod)
    if mod.kind == "none":
        return profile
    if mod.kind == "candidate_removal":
        return restrict_profile(profile, mod.removed_candidates)
    counts = profile.counts()
    removed = 0
    for m in mod.moves:
        have = counts.get(m.source, 0)
        if m.count > have:
            raise CertificateError(
                f"move takes {m.count} ballots of {m.source} but only {have} remain"
            )
        counts[m.source] = have - m.count
        if m.target:
            if set(m.target) - set(profile.candidate_ids):
                raise CertificateError(f"target {m.target} names unknown candidates")
            counts[m.target] = counts.get(m.target, 0) + m.count
        else:
            removed += m.count
    return profile.with_counts(counts, ballots_cast=profile.ballots_cast - removed)


@dataclass(frozen=True)
class FlawCertificate:
    flaw_kind: FlawKind
    modification: Modification
    original_winner: str
    resulting_winner: str
    details: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def to_dict(self) -> dict:
        mod = self.modification
        return {
            "flaw_kind": self.flaw_kind.value,
            "original_winner": self.original_winner,
            "resulting_winner": self.resulting_winner,
            "modification": {
                "kind": mod.kind,
                "shifted": mod.shifted,
                "removed_candidates": list(mod.removed_candidates),
                "moves": [
                    {"source": list(m.source), "target": list(m.target), "count": m.count}
                    for m in mod.moves
                ],
            },
            "details": {k: self.details[k] for k in sorted(self.details)},
        }


_EXPECTED_KIND = {
    FlawKind.CONDORCET: "none",
    FlawKind.MAJORITARIAN: "none",
    FlawKind.SPOILER: "candidate_removal",
    FlawKind.UPWARD_MONO: "ballot_shift",
    FlawKind.DOWNWARD_MONO: "ballot_shift",
    FlawKind.COMPROMISE: "ballot_shift",
    FlawKind.NO_SHOW: "ballot_removal",
    FlawKind.TRUNCATION: "ballot_truncation",
}


def check_certificate(
    profile: PreferenceProfile,
    cert: FlawCertificate,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> None:
    """Raise :class:`CertificateError` unless ``cert`` witnesses its flaw on ``profile``."""
    kind = FlawKind(cert.flaw_kind)
    mod = cert.modification
    if mod.kind != _EXPECTED_KIND[kind]:
        raise CertificateError(f"{kind} certificates need a {_EXPECTED_KIND[kind]} modification")
    w = tabulate(profile, policy).winner
    if cert.original_winner != w:
        raise CertificateError(f"certificate claims winner {cert.original_winner}, tabulation gives {w}")

    if kind is FlawKind.CONDORCET:
        cw = condorcet_winner(pairwise(profile))
        if cw is None or cw == w or cert.resulting_winner != cw:
            raise CertificateError("no Condorcet failure: winner is the Condorcet winner or none exists")
        return
    if kind is FlawKind.MAJORITARIAN:
        share = winners_vote_share(profile, policy)
        if not share.majoritarian_failure or cert.resulting_winner != w:
            raise CertificateError(f"winner's vote share {share.display} is a majority")
        return

    modified = apply_modification(profile, mod)
    new = tabulate(modified, policy).winner
    if new != cert.resulting_winner:
        raise CertificateError(f"modified profile elects {new}, certificate says {cert.resulting_winner}")
    if new == w:
        raise CertificateError("winner unchanged")

    if kind is FlawKind.SPOILER:
        if w in mod.removed_candidates or not mod.removed_candidates:
            raise CertificateError("spoiler removal must delete losing candidates only")
    elif kind is FlawKind.UPWARD_MONO:
        if mod.shifted != w:
            raise CertificateError("upward shift must move the original winner")
        for m in mod.moves:
            before = m.source.index(w) if w in m.source else len(m.source)
            if m.target.index(w) >= before:
                raise CertificateError(f"{m.source} -> {m.target} does not raise {w}")
    elif kind is FlawKind.DOWNWARD_MONO:
        loser = mod.shifted
        if loser != new:
            raise CertificateError("downward shift must move the candidate who then wins")
        for m in mod.moves:
            if loser not in m.source or m.target.index(loser) <= m.source.index(loser):
                raise CertificateError(f"{m.source} -> {m.target} does not lower {loser}")
    elif kind is FlawKind.COMPROMISE:
        a = mod.shifted
        if a != new:
            raise CertificateError("compromise must elect the shifted candidate")
        for m in mod.moves:
            if not ranks_above(m.source, a, w) or m.source[0] == a or m.target[0] != a:
                raise CertificateError(f"{m.source} -> {m.target} is not a compromise for {a}")
        if cert.details.get("strict"):
            eligible = {
                bt.ranking: bt.count
                for bt in profile.ballot_types
                if ranks_above(bt.ranking, a, w) and bt.ranking[0] != a
            }
            used = {}
            for m in mod.moves:
                used[m.source] = used.get(m.source, 0) + m.count
            if used != eligible:
                raise CertificateError("strict compromise must shift every eligible ballot")
    elif kind in (FlawKind.NO_SHOW, FlawKind.TRUNCATION):
        for m in mod.moves:
            if not ranks_above(m.source, new, w):
                raise CertificateError(
                    f"voters casting {m.source} do not prefer {new} to {w}"
                )


def verify_certificate(
    profile: PreferenceProfile,
    cert: FlawCertificate,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> bool:
    try:
        check_certificate(profile, cert, policy)
    except CertificateError:
        return False
    return True
