"""Instant-runoff tabulation, head-to-head counts and vote-share metrics."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Mapping, Sequence

from .model import PreferenceProfile, Ranking, restrict_profile


class EmptyProfileError(ValueError):
    pass


@dataclass(frozen=True)
class EliminationPolicy:
    """How the lowest candidate(s) leave the count.

    ``tie_break`` lists candidates from strongest to weakest; among candidates
    tied for the fewest votes the weakest one is eliminated.  When left as
    ``None`` the order is lexicographic on candidate id, so the
    lexicographically greatest id goes first.
    """

    mode: Literal["single_lowest", "batch_all_tied_lowest"] = "single_lowest"
    tie_break: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.mode not in ("single_lowest", "batch_all_tied_lowest"):
            raise ValueError(f"unknown elimination mode {self.mode!r}")
        if self.tie_break is not None:
            object.__setattr__(self, "tie_break", tuple(self.tie_break))

    def order(self, candidate_ids: Sequence[str]) -> dict[str, int]:
        """Priority index per candidate (lower survives ties)."""
        if self.tie_break is None:
            return {c: i for i, c in enumerate(sorted(candidate_ids))}
        missing = set(candidate_ids) - set(self.tie_break)
        if missing:
            raise ValueError(f"tie_break order omits {sorted(missing)}")
        return {c: i for i, c in enumerate(self.tie_break)}


DEFAULT_POLICY = EliminationPolicy()


@dataclass(frozen=True)
class RoundRecord:
    tallies: Mapping[str, int] = field(hash=False)
    eliminated: tuple[str, ...]
    exhausted_this_round: int
    tie_broken: bool = False

    @property
    def continuing(self) -> frozenset[str]:
        return frozenset(self.tallies)

    @property
    def active_votes(self) -> int:
        return sum(self.tallies.values())


@dataclass(frozen=True)
class TabulationRecord:
    rounds: tuple[RoundRecord, ...]
    winner: str
    majority_candidate: bool

    @property
    def elimination_order(self) -> tuple[str, ...]:
        return tuple(c for r in self.rounds for c in r.eliminated)

    @property
    def final_tallies(self) -> Mapping[str, int]:
        return self.rounds[-1].tallies

    def exhausted_through(self, index: int) -> int:
        """Cumulative exhausted ballots as of round ``index`` (zero based)."""
        return sum(r.exhausted_this_round for r in self.rounds[: index + 1])


def top_choice(ranking: Ranking, continuing) -> str | None:
    for c in ranking:
        if c in continuing:
            return c
    return None


def _count_round(profile: PreferenceProfile, continuing) -> dict[str, int]:
    tallies = {c: 0 for c in continuing}
    for bt in profile.ballot_types:
        top = top_choice(bt.ranking, continuing)
        if top is not None:
            tallies[top] += bt.count
    return tallies


def _pick_eliminated(
    tallies: Mapping[str, int], policy: EliminationPolicy, priority: Mapping[str, int]
) -> tuple[tuple[str, ...], bool]:
    low = min(tallies.values())
    tied = sorted((c for c, v in tallies.items() if v == low), key=priority.__getitem__)
    if policy.mode == "single_lowest" or len(tied) == len(tallies):
        # batch mode falls back to the tie break when it would empty the field
        if policy.mode == "single_lowest":
            return (tied[-1],), len(tied) > 1
        return tuple(tied[1:]), True
    return tuple(tied), False


def _run(profile: PreferenceProfile, policy: EliminationPolicy, stop_at: int | None):
    """Shared elimination loop.

    With ``stop_at=None`` this is ordinary instant runoff.  Otherwise the
    majority stop is ignored and eliminations continue until exactly
    ``stop_at`` candidates remain.
    """
    if not profile.candidates:
        raise EmptyProfileError("profile has no candidates")
    priority = policy.order(profile.candidate_ids)
    continuing = set(profile.candidate_ids)
    rounds: list[RoundRecord] = []
    exhausted_so_far = 0
    while True:
        tallies = _count_round(profile, continuing)
        active = sum(tallies.values())
        exhausted_now = profile.ballots_cast - active - exhausted_so_far
        exhausted_so_far += exhausted_now
        ordered = {c: tallies[c] for c in sorted(tallies)}
        if stop_at is None:
            leader = min(tallies, key=lambda c: (-tallies[c], priority[c]))
            if len(continuing) == 1 or 2 * tallies[leader] > active:
                rounds.append(RoundRecord(ordered, (), exhausted_now))
                return tuple(rounds), leader
        elif len(continuing) <= stop_at:
            rounds.append(RoundRecord(ordered, (), exhausted_now))
            return tuple(rounds), None
        out, tie = _pick_eliminated(tallies, policy, priority)
        if stop_at is not None and len(continuing) - len(out) < stop_at:
            out = tuple(sorted(out, key=priority.__getitem__))[-(len(continuing) - stop_at):]
            tie = True
        rounds.append(RoundRecord(ordered, out, exhausted_now, tie))
        continuing.difference_update(out)


def tabulate(
    profile: PreferenceProfile, policy: EliminationPolicy = DEFAULT_POLICY
) -> TabulationRecord:
    """Run instant runoff and return the full round-by-round trace.

    A candidate wins as soon as they hold strictly more than half of the
    non-exhausted votes in a round, or when they are the last one standing.
    Results are memoized per (profile, policy); both are immutable.
    """
    return _tabulate_cached(profile, policy)


@functools.lru_cache(maxsize=8192)
def _tabulate_cached(profile: PreferenceProfile, policy: EliminationPolicy) -> TabulationRecord:
    rounds, winner = _run(profile, policy, None)
    return TabulationRecord(rounds=rounds, winner=winner, majority_candidate=len(rounds) == 1)


def winner(profile: PreferenceProfile, policy: EliminationPolicy = DEFAULT_POLICY) -> str:
    return tabulate(profile, policy).winner


def reduce_to_n(
    profile: PreferenceProfile, n: int, policy: EliminationPolicy = DEFAULT_POLICY
) -> PreferenceProfile:
    """Eliminate candidates until ``n`` remain and return the restricted profile.

    Majority stops are ignored.  In batch mode a batch that would overshoot is
    trimmed by the tie break so exactly ``n`` survive.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n > profile.candidate_count:
        raise ValueError(f"cannot reduce {profile.candidate_count} candidates to {n}")
    if n == profile.candidate_count:
        return profile
    rounds, _ = _run(profile, policy, n)
    gone = [c for r in rounds for c in r.eliminated]
    return restrict_profile(profile, gone)


@dataclass(frozen=True)
class PairwiseMatrix:
    candidates: tuple[str, ...]
    counts: Mapping[tuple[str, str], int] = field(hash=False)

    def prefers(self, a: str, b: str) -> int:
        if a == b:
            return 0
        return self.counts[(a, b)]

    def beats(self, a: str, b: str) -> bool:
        return self.prefers(a, b) > self.prefers(b, a)


def pairwise(profile: PreferenceProfile) -> PairwiseMatrix:
    """Head-to-head counts with unranked candidates tied at the bottom."""
    ids = profile.candidate_ids
    counts = {(a, b): 0 for a in ids for b in ids if a != b}
    for bt in profile.ballot_types:
        ranked = bt.ranking
        unranked = [c for c in ids if c not in ranked]
        for i, a in enumerate(ranked):
            for b in ranked[i + 1:]:
                counts[(a, b)] += bt.count
            for b in unranked:
                counts[(a, b)] += bt.count
    return PairwiseMatrix(ids, counts)


def condorcet_winner(matrix: PairwiseMatrix) -> str | None:
    for a in matrix.candidates:
        if all(matrix.beats(a, b) for b in matrix.candidates if b != a):
            return a
    return None


def percent_display(share: Fraction) -> str:
    """Render a share in [0, 1] as a percentage rounded half-up to one decimal."""
    tenths = share * 1000
    rounded = (tenths.numerator * 2 + tenths.denominator) // (2 * tenths.denominator)
    return f"{rounded // 10}.{rounded % 10}%"


@dataclass(frozen=True)
class VoteShare:
    winner: str
    runner_up: str | None
    winner_votes: int
    ballots_cast: int

    @property
    def share(self) -> Fraction:
        return Fraction(self.winner_votes, self.ballots_cast)

    @property
    def majoritarian_failure(self) -> bool:
        return 2 * self.winner_votes <= self.ballots_cast

    @property
    def display(self) -> str:
        return percent_display(self.share)


def winners_vote_share(
    profile: PreferenceProfile, policy: EliminationPolicy = DEFAULT_POLICY
) -> VoteShare:
    """Winner's final-two vote count as a share of every ballot cast."""
    if profile.candidate_count < 2:
        raise ValueError("vote share needs at least two candidates")
    if profile.ballots_cast == 0:
        raise EmptyProfileError("no ballots cast")
    rcv_winner = tabulate(profile, policy).winner
    rounds, _ = _run(profile, policy, 2)
    final = rounds[-1].tallies
    (other,) = set(final) - {rcv_winner}
    return VoteShare(rcv_winner, other, final[rcv_winner], profile.ballots_cast)


def classify_truncated(profile: PreferenceProfile) -> bool:
    """True when voters could not rank every candidate but one."""
    level = profile.truncation_level
    return level is not None and profile.candidate_count > level + 1
