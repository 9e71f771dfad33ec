"""Exact-integer data model for ranked ballots and preference profiles.

Everything here is immutable.  Counts are plain Python ints; nothing in the
tabulation path ever touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

Ranking = tuple[str, ...]

WRITE_IN_ID = "$WRITEIN"


@dataclass(frozen=True, order=True)
class Candidate:
    id: str
    display_name: str = field(default="", compare=False)
    is_write_in: bool = False

    def __post_init__(self):
        if not self.id:
            raise ValueError("candidate id must be non-empty")
        if not self.display_name:
            object.__setattr__(self, "display_name", self.id)


@dataclass(frozen=True)
class BallotType:
    """A ranking together with the number of ballots cast with exactly that ranking."""

    ranking: Ranking
    count: int

    def __post_init__(self):
        if len(set(self.ranking)) != len(self.ranking):
            raise ValueError(f"ranking {self.ranking!r} repeats a candidate")
        if not isinstance(self.count, int) or self.count < 0:
            raise ValueError(f"count must be a nonnegative int, got {self.count!r}")

    def position(self, candidate: str) -> int | None:
        """Zero-based rank position of ``candidate``, or None when unranked."""
        try:
            return self.ranking.index(candidate)
        except ValueError:
            return None


def ranks_above(ranking: Sequence[str], a: str, b: str) -> bool:
    """True if ``a`` beats ``b`` on this ballot under the weak-order model.

    Unranked candidates share the bottom position, so a ranked candidate beats
    every unranked one and two unranked candidates are tied.
    """
    if a not in ranking:
        return False
    if b not in ranking:
        return True
    return ranking.index(a) < ranking.index(b)


CandidateLike = Union[Candidate, str]


@dataclass(frozen=True)
class PreferenceProfile:
    candidates: tuple[Candidate, ...]
    ballot_types: tuple[BallotType, ...]
    ballots_cast: int
    truncation_level: int | None = None
    # ballots dropped while building this profile (empty after sanitation);
    # bookkeeping only, not part of profile identity
    discarded: int = field(default=0, compare=False)

    def __post_init__(self):
        ids = [c.id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError("candidate ids must be unique")
        if ids != sorted(ids):
            raise ValueError("candidates must be sorted by id; use PreferenceProfile.build")
        known = set(ids)
        seen = set()
        total = 0
        for bt in self.ballot_types:
            if not bt.ranking:
                raise ValueError("profiles never store empty rankings")
            if bt.count < 1:
                raise ValueError("stored ballot types need count >= 1")
            if bt.ranking in seen:
                raise ValueError(f"duplicate ranking {bt.ranking!r}; merge counts first")
            unknown = set(bt.ranking) - known
            if unknown:
                raise ValueError(f"ranking mentions unknown candidates {sorted(unknown)}")
            seen.add(bt.ranking)
            total += bt.count
        if self.ballots_cast < total:
            raise ValueError(
                f"ballots_cast={self.ballots_cast} is below the ballot total {total}"
            )
        if self.truncation_level is not None and self.truncation_level < 1:
            raise ValueError("truncation_level must be a positive integer")

    @classmethod
    def build(
        cls,
        candidates: Iterable[CandidateLike],
        ballots: Union[Mapping[Sequence[str], int], Iterable[tuple[Sequence[str], int]]],
        *,
        truncation_level: int | None = None,
        ballots_cast: int | None = None,
        discarded: int = 0,
    ) -> "PreferenceProfile":
        """Normalize loose input into a profile.

        Identical rankings are merged, zero counts are dropped and the ballot
        types are stored in lexicographic ranking order.  ``ballots_cast``
        defaults to the sum of counts.
        """
        cands = sorted(
            (c if isinstance(c, Candidate) else Candidate(c) for c in candidates),
            key=lambda c: c.id,
        )
        items = ballots.items() if isinstance(ballots, Mapping) else ballots
        merged: dict[Ranking, int] = {}
        for ranking, count in items:
            ranking = tuple(ranking)
            if not isinstance(count, int) or count < 0:
                raise ValueError(f"count must be a nonnegative int, got {count!r}")
            if count == 0:
                continue
            if not ranking:
                raise ValueError("empty ranking; drop it and account for it in ballots_cast")
            merged[ranking] = merged.get(ranking, 0) + count
        types = tuple(BallotType(r, n) for r, n in sorted(merged.items()))
        total = sum(merged.values())
        return cls(
            candidates=tuple(cands),
            ballot_types=types,
            ballots_cast=total if ballots_cast is None else ballots_cast,
            truncation_level=truncation_level,
            discarded=discarded,
        )

    @property
    def candidate_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.candidates)

    @property
    def candidate_count(self) -> int:
        return len(self.candidates)

    @property
    def total_ranked(self) -> int:
        """Sum of ballot-type counts (equals ballots_cast unless a restriction kept the old total)."""
        return sum(bt.count for bt in self.ballot_types)

    def candidate(self, cid: str) -> Candidate:
        for c in self.candidates:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def counts(self) -> dict[Ranking, int]:
        return {bt.ranking: bt.count for bt in self.ballot_types}

    def count_of(self, ranking: Sequence[str]) -> int:
        ranking = tuple(ranking)
        for bt in self.ballot_types:
            if bt.ranking == ranking:
                return bt.count
        return 0

    def first_preferences(self) -> dict[str, int]:
        tallies = {cid: 0 for cid in self.candidate_ids}
        for bt in self.ballot_types:
            tallies[bt.ranking[0]] += bt.count
        return tallies

    def with_counts(
        self, counts: Mapping[Ranking, int], *, ballots_cast: int | None = None
    ) -> "PreferenceProfile":
        """Same candidates and metadata, new ballot counts."""
        return PreferenceProfile.build(
            self.candidates,
            counts,
            truncation_level=self.truncation_level,
            ballots_cast=ballots_cast,
            discarded=self.discarded,
        )


def merge_ballot_types(profile: PreferenceProfile) -> PreferenceProfile:
    """Complete every ranking that leaves out exactly one candidate.

    ``A > B`` over ``{A, B, C}`` becomes ``A > B > C``.  Under instant runoff
    the omitted candidate could only receive that vote once it is the sole
    survivor, so the winner is unaffected.
    """
    ids = profile.candidate_ids
    n = len(ids)
    counts: dict[Ranking, int] = {}
    for bt in profile.ballot_types:
        ranking = bt.ranking
        if n >= 2 and len(ranking) == n - 1:
            (missing,) = set(ids) - set(ranking)
            ranking = ranking + (missing,)
        counts[ranking] = counts.get(ranking, 0) + bt.count
    return profile.with_counts(counts, ballots_cast=profile.ballots_cast)


def restrict_profile(
    profile: PreferenceProfile,
    removed: Iterable[str],
    *,
    keep_ballots_cast: bool = False,
) -> PreferenceProfile:
    """Delete candidates from the election as if they had never run.

    Ballots left with no ranked candidate are dropped.  By default
    ``ballots_cast`` is recomputed over the surviving ballots; pass
    ``keep_ballots_cast=True`` to hold the original electorate fixed, in which
    case the dropped ballots behave as exhausted from round one.
    """
    removed = set(removed)
    ids = set(profile.candidate_ids)
    if not removed <= ids:
        raise ValueError(f"cannot remove unknown candidates {sorted(removed - ids)}")
    if removed == ids:
        raise ValueError("cannot remove every candidate")
    counts: dict[Ranking, int] = {}
    dropped = 0
    for bt in profile.ballot_types:
        ranking = tuple(c for c in bt.ranking if c not in removed)
        if not ranking:
            dropped += bt.count
            continue
        counts[ranking] = counts.get(ranking, 0) + bt.count
    survivors = [c for c in profile.candidates if c.id not in removed]
    return PreferenceProfile.build(
        survivors,
        counts,
        truncation_level=profile.truncation_level,
        ballots_cast=profile.ballots_cast if keep_ballots_cast else None,
        discarded=profile.discarded + dropped,
    )
