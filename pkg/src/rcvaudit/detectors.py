"""Heuristic searches for instant-runoff failures.

Every search works the same way.  Take a round of the actual count, pick
which elimination to flip, work out how many ballots must change to flip it,
and re-tabulate the whole profile for a bounded sample of ballot counts in
that range.  Outcomes are not monotone in the number of ballots changed, so
both ends of each range are always probed.

Searches are sound but not complete.  Any certificate returned has already
been re-verified with :func:`~rcvaudit.certificates.check_certificate`.  A
``None`` result means nothing was found, not that the flaw is absent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Mapping, Sequence

from .certificates import (
    BallotMove,
    FlawCertificate,
    FlawKind,
    Modification,
    apply_modification,
    check_certificate,
)
from .model import BallotType, PreferenceProfile, Ranking, ranks_above
from .tabulation import (
    DEFAULT_POLICY,
    EliminationPolicy,
    RoundRecord,
    TabulationRecord,
    VoteShare,
    condorcet_winner,
    pairwise,
    reduce_to_n,
    tabulate,
    top_choice,
    winners_vote_share,
)


@dataclass(frozen=True)
class SearchBudget:
    max_retabulations_per_target: int = 64
    spoiler_exhaustive_candidate_limit: int = 12
    spoiler_reduce_to: int = 10

    def __post_init__(self):
        for name in (
            "max_retabulations_per_target",
            "spoiler_exhaustive_candidate_limit",
            "spoiler_reduce_to",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.max_retabulations_per_target < 2:
            raise ValueError("max_retabulations_per_target must allow both interval endpoints")


DEFAULT_BUDGET = SearchBudget()


def sample_interval(lo: int, hi: int, limit: int) -> list[int]:
    """Up to ``limit`` evenly spread integers from ``[lo, hi]``, both ends included."""
    if lo > hi:
        return []
    width = hi - lo
    if width + 1 <= limit:
        return list(range(lo, hi + 1))
    picks = {lo + (width * i) // (limit - 1) for i in range(limit)}
    return sorted(picks)


def _thin(points: Sequence[int], limit: int) -> list[int]:
    points = sorted(set(points))
    if len(points) <= limit:
        return points
    idx = sample_interval(0, len(points) - 1, limit)
    return [points[i] for i in idx]


def _take(eligible: Sequence[BallotType], s: int) -> list[tuple[Ranking, int]]:
    taken = []
    for bt in eligible:
        if s <= 0:
            break
        n = min(bt.count, s)
        taken.append((bt.ranking, n))
        s -= n
    return taken


_UNRANKED = 1 << 30


def _rank_key(candidate: str):
    """Sort key: ballots ranking ``candidate`` highest first, unranked last, then lexicographic."""
    def key(bt: BallotType):
        pos = bt.position(candidate)
        return (_UNRANKED if pos is None else pos, bt.ranking)

    return key


def _to_first(ranking: Ranking, c: str) -> Ranking:
    return (c,) + tuple(x for x in ranking if x != c)


def _below(ranking: Ranking, c: str, anchor: str) -> Ranking:
    """Move ``c`` to sit immediately after ``anchor``."""
    rest = [x for x in ranking if x != c]
    rest.insert(rest.index(anchor) + 1, c)
    return tuple(rest)


def _elimination_rounds(record: TabulationRecord) -> Iterable[RoundRecord]:
    for rnd in record.rounds:
        if rnd.eliminated and len(rnd.tallies) >= 2:
            yield rnd


def _probe(
    profile: PreferenceProfile,
    policy: EliminationPolicy,
    kind: FlawKind,
    mod: Modification,
    original: str,
    accept: Callable[[str], bool],
    details: Mapping | None = None,
) -> FlawCertificate | None:
    new = tabulate(apply_modification(profile, mod), policy).winner
    if not accept(new):
        return None
    cert = FlawCertificate(kind, mod, original, new, dict(details or {}))
    check_certificate(profile, cert, policy)
    return cert


@dataclass(frozen=True)
class CondorcetCheck:
    status: Literal["no_cw", "pass", "fail"]
    condorcet_winner: str | None
    certificate: FlawCertificate | None = None


def detect_condorcet_failure(
    profile: PreferenceProfile, policy: EliminationPolicy = DEFAULT_POLICY
) -> CondorcetCheck:
    cw = condorcet_winner(pairwise(profile))
    if cw is None:
        return CondorcetCheck("no_cw", None)
    w = tabulate(profile, policy).winner
    if cw == w:
        return CondorcetCheck("pass", cw)
    cert = FlawCertificate(FlawKind.CONDORCET, Modification.none(), w, cw)
    check_certificate(profile, cert, policy)
    return CondorcetCheck("fail", cw, cert)


def detect_spoiler(
    profile: PreferenceProfile,
    budget: SearchBudget = DEFAULT_BUDGET,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> FlawCertificate | None:
    """Look for a set of losers whose withdrawal changes the winner.

    Singletons first, then pairs (large fields) or every subset (small
    fields), by size and then lexicographically.  Large fields are also
    searched after reducing the count to ``budget.spoiler_reduce_to``.
    """
    if profile.candidate_count < 2:
        return None
    w = tabulate(profile, policy).winner

    def search(base: PreferenceProfile, already_removed: tuple[str, ...]):
        losers = sorted(set(base.candidate_ids) - {w})
        if base.candidate_count > budget.spoiler_exhaustive_candidate_limit:
            sizes = [1, 2]
        else:
            sizes = range(1, len(losers))
        for size in sizes:
            for subset in itertools.combinations(losers, size):
                mod = Modification.removal_of_candidates(already_removed + subset)
                cert = _probe(profile, policy, FlawKind.SPOILER, mod, w, lambda new: new != w)
                if cert:
                    return cert
        return None

    cert = search(profile, ())
    if cert is None and profile.candidate_count > budget.spoiler_exhaustive_candidate_limit:
        reduced = reduce_to_n(profile, min(budget.spoiler_reduce_to, profile.candidate_count), policy)
        gone = tuple(sorted(set(profile.candidate_ids) - set(reduced.candidate_ids)))
        cert = search(reduced, gone)
    return cert


def detect_upward_mono(
    profile: PreferenceProfile,
    budget: SearchBudget = DEFAULT_BUDGET,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> FlawCertificate | None:
    """Try to make the winner lose by moving them to first on more ballots.

    For each round with three or more candidates and each survivor X other
    than the winner, take ballots currently counting for X and move the
    winner to the top of enough of them that X drops below the candidate
    actually eliminated.
    """
    record = tabulate(profile, policy)
    w = record.winner
    for rnd in _elimination_rounds(record):
        if len(rnd.tallies) < 3:
            continue
        cont = rnd.continuing
        low = rnd.tallies[rnd.eliminated[0]]
        for x in sorted(cont - {w} - set(rnd.eliminated)):
            eligible = sorted(
                (bt for bt in profile.ballot_types if top_choice(bt.ranking, cont) == x),
                key=_rank_key(w),
            )
            available = sum(bt.count for bt in eligible)
            lo = rnd.tallies[x] - low + 1
            for s in sample_interval(max(lo, 1), available, budget.max_retabulations_per_target):
                moves = tuple(BallotMove(r, _to_first(r, w), n) for r, n in _take(eligible, s))
                mod = Modification("ballot_shift", moves=moves, shifted=w)
                cert = _probe(profile, policy, FlawKind.UPWARD_MONO, mod, w, lambda new: new != w)
                if cert:
                    return cert
    return None


def detect_downward_mono(
    profile: PreferenceProfile,
    budget: SearchBudget = DEFAULT_BUDGET,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> FlawCertificate | None:
    """Try to make a loser win by moving them down on some of their own ballots.

    At a round where Y is eliminated and L survives, ballots whose next
    surviving preference after L is Y get L moved to just below Y.  That
    feeds Y until it overtakes some other survivor Z, changing who goes out.
    """
    record = tabulate(profile, policy)
    w = record.winner
    for loser in sorted(set(profile.candidate_ids) - {w}):
        for rnd in _elimination_rounds(record):
            cont = rnd.continuing
            y = rnd.eliminated[0]
            if loser not in cont or y == loser:
                continue

            def feeds_y(bt: BallotType) -> bool:
                surviving = [c for c in bt.ranking if c in cont]
                return len(surviving) >= 2 and surviving[0] == loser and surviving[1] == y

            eligible = sorted(filter(feeds_y, profile.ballot_types), key=_rank_key(loser))
            available = sum(bt.count for bt in eligible)
            for z in sorted(cont - {loser, y}):
                lo = rnd.tallies[z] - rnd.tallies[y] + 1
                for s in sample_interval(max(lo, 1), available, budget.max_retabulations_per_target):
                    moves = tuple(
                        BallotMove(r, _below(r, loser, y), n) for r, n in _take(eligible, s)
                    )
                    mod = Modification("ballot_shift", moves=moves, shifted=loser)
                    cert = _probe(
                        profile, policy, FlawKind.DOWNWARD_MONO, mod, w, lambda new: new == loser
                    )
                    if cert:
                        return cert
    return None


def _abstention_targets(profile: PreferenceProfile, record: TabulationRecord):
    """(round, X, B, eligible ballots, lower bound) for no-show style searches."""
    w = record.winner
    others = sorted(set(profile.candidate_ids) - {w})
    for rnd in _elimination_rounds(record):
        cont = rnd.continuing
        low = rnd.tallies[rnd.eliminated[0]]
        for x in sorted(cont - set(rnd.eliminated)):
            for b in others:
                eligible = [
                    bt
                    for bt in profile.ballot_types
                    if top_choice(bt.ranking, cont) == x and ranks_above(bt.ranking, b, w)
                ]
                if eligible:
                    yield rnd, x, b, eligible, rnd.tallies[x] - low + 1


def _prefers_new(moves: Sequence[BallotMove], w: str) -> Callable[[str], bool]:
    return lambda new: new != w and all(ranks_above(m.source, new, w) for m in moves)


def detect_no_show(
    profile: PreferenceProfile,
    budget: SearchBudget = DEFAULT_BUDGET,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> FlawCertificate | None:
    """Try to find voters who would get a preferred winner by staying home."""
    record = tabulate(profile, policy)
    w = record.winner
    for _, _, _, eligible, lo in _abstention_targets(profile, record):
        available = sum(bt.count for bt in eligible)
        for s in sample_interval(max(lo, 1), available, budget.max_retabulations_per_target):
            moves = tuple(BallotMove(r, (), n) for r, n in _take(eligible, s))
            mod = Modification("ballot_removal", moves=moves)
            cert = _probe(profile, policy, FlawKind.NO_SHOW, mod, w, _prefers_new(moves, w))
            if cert:
                return cert
    return None


def detect_truncation(
    profile: PreferenceProfile,
    budget: SearchBudget = DEFAULT_BUDGET,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> FlawCertificate | None:
    """Like :func:`detect_no_show`, but ballots are cut to a shorter prefix instead of removed."""
    record = tabulate(profile, policy)
    w = record.winner
    for _, _, _, eligible, lo in _abstention_targets(profile, record):
        longest = max(len(bt.ranking) for bt in eligible)
        for k in range(1, longest):
            cut = [bt for bt in eligible if len(bt.ranking) > k]
            available = sum(bt.count for bt in cut)
            for s in sample_interval(max(lo, 1), available, budget.max_retabulations_per_target):
                moves = tuple(BallotMove(r, r[:k], n) for r, n in _take(cut, s))
                mod = Modification("ballot_truncation", moves=moves)
                cert = _probe(profile, policy, FlawKind.TRUNCATION, mod, w, _prefers_new(moves, w))
                if cert:
                    return cert
    return None


def _gap_flips(
    eligible: Sequence[BallotType], rnd: RoundRecord, a: str, available: int
) -> list[int]:
    """Shift counts around every point where two round tallies cross.

    Shifting ``a`` to first on the first ``s`` eligible ballots moves votes
    between survivors at this round piecewise linearly in ``s``.  Walk the
    pieces and record each crossing of every pair, plus the two ends.
    """
    cont = rnd.continuing
    tallies = dict(rnd.tallies)
    points = {1, available}
    pairs = list(itertools.combinations(sorted(cont), 2))
    start = 0
    for bt in eligible:
        src = top_choice(bt.ranking, cont)
        slope = {c: 0 for c in cont}
        if src != a:
            slope[a] += 1
            if src is not None:
                slope[src] -= 1
        for p, q in pairs:
            m = slope[p] - slope[q]
            d0 = tallies[p] - tallies[q]
            if m == 0:
                continue
            # d0 + m*u == 0
            u = -d0 / m
            if 0 <= u <= bt.count:
                base = start + int(u)
                points.update({base - 1, base, base + 1, base + 2})
        for c in cont:
            tallies[c] += slope[c] * bt.count
        start += bt.count
    points = sorted(p for p in points if 1 <= p <= available)
    mids = [(x + y) // 2 for x, y in zip(points, points[1:]) if y - x > 1]
    return sorted(set(points) | set(mids))


def detect_compromise(
    profile: PreferenceProfile,
    budget: SearchBudget = DEFAULT_BUDGET,
    strict: bool = False,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> FlawCertificate | None:
    """Look for a loser A who wins if some voters preferring A to the winner rank A first.

    ``strict=True`` tries only the all-or-nothing version: every such voter
    moves A to the top.
    """
    record = tabulate(profile, policy)
    w = record.winner
    for a in sorted(set(profile.candidate_ids) - {w}):
        eligible = sorted(
            (
                bt
                for bt in profile.ballot_types
                if ranks_above(bt.ranking, a, w) and bt.ranking[0] != a
            ),
            key=_rank_key(a),
        )
        if not eligible:
            continue
        available = sum(bt.count for bt in eligible)
        if strict:
            trials = [available]
        else:
            trials = []
            for rnd in _elimination_rounds(record):
                if a in rnd.continuing:
                    trials.extend(
                        _thin(
                            _gap_flips(eligible, rnd, a, available),
                            budget.max_retabulations_per_target,
                        )
                    )
        tried = set()
        for s in trials:
            if s in tried:
                continue
            tried.add(s)
            moves = tuple(BallotMove(r, _to_first(r, a), n) for r, n in _take(eligible, s))
            mod = Modification("ballot_shift", moves=moves, shifted=a)
            cert = _probe(
                profile,
                policy,
                FlawKind.COMPROMISE,
                mod,
                w,
                lambda new: new == a,
                {"strict": strict},
            )
            if cert:
                return cert
    return None


def detect_majoritarian(
    profile: PreferenceProfile, policy: EliminationPolicy = DEFAULT_POLICY
) -> FlawCertificate | None:
    share = winners_vote_share(profile, policy)
    if not share.majoritarian_failure:
        return None
    cert = FlawCertificate(
        FlawKind.MAJORITARIAN,
        Modification.none(),
        share.winner,
        share.winner,
        {
            "winner_votes": share.winner_votes,
            "ballots_cast": share.ballots_cast,
            "share": f"{share.share.numerator}/{share.share.denominator}",
            "display": share.display,
        },
    )
    check_certificate(profile, cert, policy)
    return cert


PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "not_applicable"


@dataclass(frozen=True)
class DetectorResults:
    record: TabulationRecord
    flags: Mapping[FlawKind, str] = field(hash=False)
    certificates: tuple[FlawCertificate, ...]
    condorcet_winner: str | None
    vote_share: VoteShare | None

    @property
    def no_condorcet_winner(self) -> bool:
        return self.condorcet_winner is None

    def failed(self) -> list[FlawKind]:
        return [k for k, v in self.flags.items() if v == FAIL]

    def certificate(self, kind: FlawKind) -> FlawCertificate | None:
        for cert in self.certificates:
            if cert.flaw_kind is kind:
                return cert
        return None


def run_all_detectors(
    profile: PreferenceProfile,
    budget: SearchBudget = DEFAULT_BUDGET,
    policy: EliminationPolicy = DEFAULT_POLICY,
    strict_compromise: bool = False,
) -> DetectorResults:
    """Run every detector; tabulations are shared through the tabulate cache."""
    record = tabulate(profile, policy)
    flags: dict[FlawKind, str] = {}
    certs: list[FlawCertificate] = []

    def note(kind: FlawKind, cert: FlawCertificate | None):
        flags[kind] = FAIL if cert else PASS
        if cert:
            certs.append(cert)

    cond = detect_condorcet_failure(profile, policy)
    if cond.status == "no_cw":
        flags[FlawKind.CONDORCET] = NOT_APPLICABLE
    else:
        note(FlawKind.CONDORCET, cond.certificate)

    multi = profile.candidate_count >= 2
    if multi:
        note(FlawKind.SPOILER, detect_spoiler(profile, budget, policy))
    else:
        flags[FlawKind.SPOILER] = NOT_APPLICABLE
    note(FlawKind.UPWARD_MONO, detect_upward_mono(profile, budget, policy))
    note(FlawKind.DOWNWARD_MONO, detect_downward_mono(profile, budget, policy))
    note(FlawKind.TRUNCATION, detect_truncation(profile, budget, policy))
    note(FlawKind.NO_SHOW, detect_no_show(profile, budget, policy))
    note(FlawKind.COMPROMISE, detect_compromise(profile, budget, strict_compromise, policy))
    share = None
    if multi and profile.ballots_cast > 0:
        share = winners_vote_share(profile, policy)
        note(FlawKind.MAJORITARIAN, detect_majoritarian(profile, policy))
    else:
        flags[FlawKind.MAJORITARIAN] = NOT_APPLICABLE
    ordered = {k: flags[k] for k in FlawKind}
    return DetectorResults(record, ordered, tuple(certs), cond.condorcet_winner, share)
