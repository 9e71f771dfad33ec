"""Exact ground truth for small elections and a seeded profile generator.

The heuristic detectors only probe a handful of ballot counts.  The oracle
instead answers the existence question exactly, for profiles with at most
four candidates and twelve ballot types:

* spoiler: every subset of losers is removed in turn;
* ballot edits (monotonicity, no-show, truncation, compromise): for each
  possible elimination sequence, an integer program over "how many ballots
  of each type receive each allowed edit" decides whether that sequence can
  end with the target winner.  With a fixed sequence every round tally is
  linear in those counts, so the search is exact.

:func:`enumerate_detect` does the same job by literal enumeration of every
edit vector.  It only scales to toy profiles and exists to check the integer
programs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .certificates import (
    BallotMove,
    FlawCertificate,
    FlawKind,
    Modification,
    apply_modification,
    check_certificate,
)
from .detectors import (
    DEFAULT_BUDGET,
    SearchBudget,
    detect_compromise,
    detect_condorcet_failure,
    detect_downward_mono,
    detect_majoritarian,
    detect_no_show,
    detect_spoiler,
    detect_truncation,
    detect_upward_mono,
)
from .model import PreferenceProfile, Ranking, ranks_above, restrict_profile
from .tabulation import DEFAULT_POLICY, EliminationPolicy, tabulate, top_choice

MAX_CANDIDATES = 4
MAX_BALLOT_TYPES = 12


class OracleBoundsError(ValueError):
    pass


def _check_bounds(profile: PreferenceProfile, policy: EliminationPolicy) -> None:
    if profile.candidate_count > MAX_CANDIDATES or len(profile.ballot_types) > MAX_BALLOT_TYPES:
        raise OracleBoundsError(
            f"oracle handles at most {MAX_CANDIDATES} candidates and {MAX_BALLOT_TYPES} "
            f"ballot types, got {profile.candidate_count} and {len(profile.ballot_types)}"
        )
    if policy.mode != "single_lowest":
        raise OracleBoundsError("oracle models single_lowest elimination only")


# --- edit spaces ---------------------------------------------------------

@dataclass(frozen=True)
class _EditSpace:
    """Allowed edits for one (flaw, target) pair."""

    kind: FlawKind
    mod_kind: str
    shifted: str | None
    winners: tuple[str, ...]
    # (source ranking, source count, target ranking) per variable
    edits: tuple[tuple[Ranking, int, Ranking], ...]


def _without(ranking: Ranking, c: str) -> list[str]:
    return [x for x in ranking if x != c]


def _edit_spaces(profile: PreferenceProfile, kind: FlawKind, w: str) -> Iterator[_EditSpace]:
    others = sorted(set(profile.candidate_ids) - {w})
    types = profile.ballot_types
    if kind is FlawKind.UPWARD_MONO:
        edits = tuple(
            (bt.ranking, bt.count, (w, *_without(bt.ranking, w)))
            for bt in types
            if bt.ranking[0] != w
        )
        yield _EditSpace(kind, "ballot_shift", w, tuple(others), edits)
    elif kind is FlawKind.DOWNWARD_MONO:
        for loser in others:
            edits = []
            for bt in types:
                if loser not in bt.ranking:
                    continue
                i = bt.ranking.index(loser)
                rest = _without(bt.ranking, loser)
                for j in range(i + 1, len(bt.ranking)):
                    edits.append((bt.ranking, bt.count, tuple(rest[:j] + [loser] + rest[j:])))
            yield _EditSpace(kind, "ballot_shift", loser, (loser,), tuple(edits))
    elif kind is FlawKind.COMPROMISE:
        for a in others:
            edits = tuple(
                (bt.ranking, bt.count, (a, *_without(bt.ranking, a)))
                for bt in types
                if ranks_above(bt.ranking, a, w) and bt.ranking[0] != a
            )
            yield _EditSpace(kind, "ballot_shift", a, (a,), edits)
    elif kind is FlawKind.NO_SHOW:
        for b in others:
            edits = tuple((bt.ranking, bt.count, ()) for bt in types if ranks_above(bt.ranking, b, w))
            yield _EditSpace(kind, "ballot_removal", None, (b,), edits)
    elif kind is FlawKind.TRUNCATION:
        for b in others:
            edits = tuple(
                (bt.ranking, bt.count, bt.ranking[:k])
                for bt in types
                if ranks_above(bt.ranking, b, w)
                for k in range(1, len(bt.ranking))
            )
            yield _EditSpace(kind, "ballot_truncation", None, (b,), edits)
    else:
        raise ValueError(f"{kind} has no ballot-edit space")


def _elimination_paths(
    ids: Sequence[str], winners: Sequence[str]
) -> Iterator[tuple[list[frozenset[str]], list[str], str]]:
    """Every (continuing sets per round, eliminated per round, winner) sequence."""

    def walk(cont: frozenset[str], sets: list, gone: list):
        sets = sets + [cont]
        for w in sorted(cont):
            if w in winners:
                yield sets, gone, w
        if len(cont) > 1:
            for e in sorted(cont):
                yield from walk(cont - {e}, sets, gone + [e])

    yield from walk(frozenset(ids), [], [])


def _solve_path(
    profile: PreferenceProfile,
    space: _EditSpace,
    sets: list[frozenset[str]],
    gone: list[str],
    w: str,
    priority: Mapping[str, int],
) -> list[int] | None:
    edits = space.edits
    n = len(edits)
    rows: list[np.ndarray] = []
    lo: list[float] = []
    hi: list[float] = []

    def tally(cont):
        base = {c: 0 for c in cont}
        coef = {c: np.zeros(n) for c in cont}
        for bt in profile.ballot_types:
            top = top_choice(bt.ranking, cont)
            if top is not None:
                base[top] += bt.count
        for j, (src, _, dst) in enumerate(edits):
            before = top_choice(src, cont)
            after = top_choice(dst, cont)
            if before is not None:
                coef[before][j] -= 1
            if after is not None:
                coef[after][j] += 1
        return base, coef

    for r, cont in enumerate(sets):
        base, coef = tally(cont)
        total_b = sum(base.values())
        total_a = sum(coef.values())
        final = r == len(sets) - 1
        if final:
            if len(cont) >= 2:
                rows.append(2 * coef[w] - total_a)
                lo.append(1 - (2 * base[w] - total_b))
                hi.append(np.inf)
            continue
        for c in cont:
            rows.append(2 * coef[c] - total_a)
            lo.append(-np.inf)
            hi.append(total_b - 2 * base[c])
        e = gone[r]
        for c in cont:
            if c == e:
                continue
            strict = 1 if priority[e] < priority[c] else 0
            rows.append(coef[e] - coef[c])
            lo.append(-np.inf)
            hi.append(base[c] - base[e] - strict)

    by_source: dict[Ranking, list[int]] = {}
    for j, (src, _, _) in enumerate(edits):
        by_source.setdefault(src, []).append(j)
    for src, js in by_source.items():
        row = np.zeros(n)
        row[js] = 1
        rows.append(row)
        lo.append(0)
        hi.append(edits[js[0]][1])
    rows.append(np.ones(n))
    lo.append(1)
    hi.append(np.inf)

    res = milp(
        c=np.ones(n),
        constraints=LinearConstraint(np.vstack(rows), lo, hi),
        integrality=np.ones(n),
        bounds=Bounds(0, [e[1] for e in edits]),
    )
    if res.status != 0 or res.x is None:
        return None
    return [int(round(v)) for v in res.x]


def _certificate_from(
    profile: PreferenceProfile,
    space: _EditSpace,
    xs: Sequence[int],
    w: str,
    policy: EliminationPolicy,
) -> FlawCertificate | None:
    moves = tuple(
        BallotMove(src, dst, x) for (src, _, dst), x in zip(space.edits, xs) if x > 0
    )
    if not moves:
        return None
    mod = Modification(space.mod_kind, moves=moves, shifted=space.shifted)
    new = tabulate(apply_modification(profile, mod), policy).winner
    if new == w or new not in space.winners:
        return None
    cert = FlawCertificate(space.kind, mod, w, new, {"source": "oracle"})
    check_certificate(profile, cert, policy)
    return cert


def _brute_condorcet(profile: PreferenceProfile) -> str | None:
    ids = profile.candidate_ids
    for a in ids:
        wins = True
        for b in ids:
            if a == b:
                continue
            ab = sum(bt.count for bt in profile.ballot_types if ranks_above(bt.ranking, a, b))
            ba = sum(bt.count for bt in profile.ballot_types if ranks_above(bt.ranking, b, a))
            if ab <= ba:
                wins = False
                break
        if wins:
            return a
    return None


def oracle_detect(
    profile: PreferenceProfile,
    flaw_kind: FlawKind | str,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> FlawCertificate | None:
    """Exact existence check for one flaw; returns the first certificate found or None.

    Edits allowed per flaw: the winner moved to first (upward), a loser moved
    to any lower position (downward), a loser moved to first on ballots
    preferring them to the winner (compromise), removal or any shorter prefix
    of ballots preferring the new winner to the old (no-show, truncation).
    Any number of ballots of any mix of types may be edited.
    """
    kind = FlawKind(flaw_kind)
    _check_bounds(profile, policy)
    record = tabulate(profile, policy)
    w = record.winner

    if kind is FlawKind.CONDORCET:
        cw = _brute_condorcet(profile)
        if cw is None or cw == w:
            return None
        return FlawCertificate(kind, Modification.none(), w, cw)
    if kind is FlawKind.MAJORITARIAN:
        return detect_majoritarian(profile, policy) if profile.candidate_count >= 2 else None
    if kind is FlawKind.SPOILER:
        losers = sorted(set(profile.candidate_ids) - {w})
        for size in range(1, len(losers)):
            for subset in itertools.combinations(losers, size):
                new = tabulate(restrict_profile(profile, subset), policy).winner
                if new != w:
                    cert = FlawCertificate(
                        kind, Modification.removal_of_candidates(subset), w, new
                    )
                    check_certificate(profile, cert, policy)
                    return cert
        return None

    priority = policy.order(profile.candidate_ids)
    for space in _edit_spaces(profile, kind, w):
        if not space.edits:
            continue
        for sets, gone, target in _elimination_paths(profile.candidate_ids, space.winners):
            xs = _solve_path(profile, space, sets, gone, target, priority)
            if xs is None:
                continue
            cert = _certificate_from(profile, space, xs, w, policy)
            if cert is not None:
                return cert
    return None


def enumerate_detect(
    profile: PreferenceProfile,
    flaw_kind: FlawKind | str,
    policy: EliminationPolicy = DEFAULT_POLICY,
    max_vectors: int = 200_000,
) -> FlawCertificate | None:
    """Literal enumeration of every edit vector; for toy profiles only."""
    kind = FlawKind(flaw_kind)
    w = tabulate(profile, policy).winner
    for space in _edit_spaces(profile, kind, w):
        by_source: dict[Ranking, list[int]] = {}
        for j, (src, _, _) in enumerate(space.edits):
            by_source.setdefault(src, []).append(j)
        per_source = []
        for src, js in by_source.items():
            cap = space.edits[js[0]][1]
            options = [
                combo
                for combo in itertools.product(range(cap + 1), repeat=len(js))
                if sum(combo) <= cap
            ]
            per_source.append((js, options))
        size = 1
        for _, options in per_source:
            size *= len(options)
        if size > max_vectors:
            raise OracleBoundsError(f"{size} edit vectors exceed max_vectors={max_vectors}")
        for choice in itertools.product(*(opts for _, opts in per_source)):
            xs = [0] * len(space.edits)
            for (js, _), combo in zip(per_source, choice):
                for j, v in zip(js, combo):
                    xs[j] = v
            cert = _certificate_from(profile, space, xs, w, policy)
            if cert is not None:
                return cert
    return None


# --- synthetic profiles --------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    candidate_count: int = 3
    max_ballot_types: int = 8
    max_count_per_type: int = 20
    allow_partial: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.candidate_count <= 5:
            raise ValueError("candidate_count must be in [2, 5]")
        if self.max_ballot_types < 1 or self.max_count_per_type < 1:
            raise ValueError("max_ballot_types and max_count_per_type must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _ranking_universe(n: int, allow_partial: bool) -> list[Ranking]:
    ids = [chr(ord("A") + i) for i in range(n)]
    lengths = range(1, n + 1) if allow_partial else range(max(n - 1, 1), n + 1)
    return [p for k in lengths for p in itertools.permutations(ids, k)]


def generate_profile(config: GeneratorConfig) -> PreferenceProfile:
    """Random profile: a uniform subset of rankings with uniform counts, reproducible from the seed."""
    rng = np.random.default_rng(config.seed)
    universe = _ranking_universe(config.candidate_count, config.allow_partial)
    k = int(rng.integers(1, min(config.max_ballot_types, len(universe)) + 1))
    picks = rng.choice(len(universe), size=k, replace=False)
    counts = rng.integers(1, config.max_count_per_type + 1, size=k)
    ids = [chr(ord("A") + i) for i in range(config.candidate_count)]
    return PreferenceProfile.build(
        ids, {universe[int(i)]: int(c) for i, c in zip(picks, counts)}
    )


CHECKED_FLAWS = (
    FlawKind.CONDORCET,
    FlawKind.SPOILER,
    FlawKind.UPWARD_MONO,
    FlawKind.DOWNWARD_MONO,
    FlawKind.TRUNCATION,
    FlawKind.NO_SHOW,
    FlawKind.COMPROMISE,
)


def run_detector(
    profile: PreferenceProfile,
    kind: FlawKind,
    budget: SearchBudget = DEFAULT_BUDGET,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> FlawCertificate | None:
    if kind is FlawKind.CONDORCET:
        return detect_condorcet_failure(profile, policy).certificate
    if kind is FlawKind.SPOILER:
        return detect_spoiler(profile, budget, policy)
    if kind is FlawKind.UPWARD_MONO:
        return detect_upward_mono(profile, budget, policy)
    if kind is FlawKind.DOWNWARD_MONO:
        return detect_downward_mono(profile, budget, policy)
    if kind is FlawKind.TRUNCATION:
        return detect_truncation(profile, budget, policy)
    if kind is FlawKind.NO_SHOW:
        return detect_no_show(profile, budget, policy)
    if kind is FlawKind.COMPROMISE:
        return detect_compromise(profile, budget, False, policy)
    if kind is FlawKind.MAJORITARIAN:
        return detect_majoritarian(profile, policy)
    raise ValueError(kind)


@dataclass
class CrossValidationReport:
    trials: int = 0
    counts: dict[FlawKind, dict[str, int]] = field(default_factory=dict)
    # seeds of disagreeing trials, for reproduction
    oracle_only_seeds: dict[FlawKind, list[int]] = field(default_factory=dict)
    detector_only_seeds: dict[FlawKind, list[int]] = field(default_factory=dict)

    def record(self, kind: FlawKind, detector: bool, oracle: bool, seed: int) -> None:
        row = self.counts.setdefault(
            kind, {"both": 0, "neither": 0, "oracle_only": 0, "detector_only": 0}
        )
        if detector and oracle:
            row["both"] += 1
        elif detector:
            row["detector_only"] += 1
            self.detector_only_seeds.setdefault(kind, []).append(seed)
        elif oracle:
            row["oracle_only"] += 1
            self.oracle_only_seeds.setdefault(kind, []).append(seed)
        else:
            row["neither"] += 1

    @property
    def unsound(self) -> int:
        """Detector positives the oracle rejects; must be zero."""
        return sum(row["detector_only"] for row in self.counts.values())

    def completeness_gap(self, kind: FlawKind) -> int:
        return self.counts.get(kind, {}).get("oracle_only", 0)


def cross_validate(
    config: GeneratorConfig,
    trials: int,
    budget: SearchBudget = DEFAULT_BUDGET,
    flaws: Sequence[FlawKind] = CHECKED_FLAWS,
    policy: EliminationPolicy = DEFAULT_POLICY,
) -> CrossValidationReport:
    """Compare detectors to the oracle on ``trials`` profiles seeded ``config.seed + i``."""
    report = CrossValidationReport()
    for i in range(trials):
        seed = config.seed + i
        cfg = GeneratorConfig(
            config.candidate_count,
            config.max_ballot_types,
            config.max_count_per_type,
            config.allow_partial,
            seed,
        )
        profile = generate_profile(cfg)
        for kind in flaws:
            found = run_detector(profile, kind, budget, policy) is not None
            truth = oracle_detect(profile, kind, policy) is not None
            report.record(kind, found, truth, seed)
        report.trials += 1
    return report
