"""Audit the August 2022 Alaska House special election step by step."""

from rcvaudit import (
    BallotMove,
    FlawCertificate,
    FlawKind,
    Modification,
    check_certificate,
    load_fixture,
    pairwise,
    run_all_detectors,
    tabulate,
    winners_vote_share,
)

profile = load_fixture("alaska")
print(f"{profile.ballots_cast} ballots, {len(profile.ballot_types)} ballot types")

# round by round
record = tabulate(profile)
for i, rnd in enumerate(record.rounds, 1):
    out = ", ".join(rnd.eliminated) or "none"
    print(f"round {i}: {dict(rnd.tallies)}  eliminated: {out}  exhausted: {rnd.exhausted_this_round}")
print("winner:", record.winner)

# head to head, unranked candidates tied at the bottom
m = pairwise(profile)
for a, b in [("Begich", "Palin"), ("Begich", "Peltola"), ("Palin", "Peltola")]:
    print(f"{a} vs {b}: {m.prefers(a, b)} to {m.prefers(b, a)}")

share = winners_vote_share(profile)
print(f"winner's share of all ballots: {share.winner_votes}/{share.ballots_cast} = {share.display}")

# every detector at once
results = run_all_detectors(profile)
for kind, flag in results.flags.items():
    print(f"{kind.value:>14}: {flag}")

# a hand-written witness: 6000 Palin-only voters add Peltola on top
mod = Modification(
    "ballot_shift",
    moves=(BallotMove(("Palin",), ("Peltola", "Palin"), 6000),),
    shifted="Peltola",
)
cert = FlawCertificate(FlawKind.UPWARD_MONO, mod, "Peltola", "Begich")
check_certificate(profile, cert)
print("raising Peltola on 6000 ballots makes Begich win: verified")
