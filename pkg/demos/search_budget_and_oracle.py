"""How the heuristic detectors compare with exhaustive search on small elections."""

import numpy as np

from rcvaudit import FlawKind, GeneratorConfig, cross_validate, generate_profile, load_fixture, oracle_detect
from rcvaudit.detectors import SearchBudget, detect_no_show, detect_upward_mono
from rcvaudit.tabulation import tabulate

# a reproducible random election
profile = generate_profile(GeneratorConfig(candidate_count=3, allow_partial=False, seed=10))
for bt in profile.ballot_types:
    print(f"{bt.count:>3}  {' > '.join(bt.ranking)}")
print("winner:", tabulate(profile).winner)

# the detector misses an upward paradox that exhaustive search finds
print("detector:", detect_upward_mono(profile))
cert = oracle_detect(profile, FlawKind.UPWARD_MONO)
for move in cert.modification.moves:
    print(f"oracle moves {move.count} of {move.source} to {move.target}")
print("new winner:", cert.resulting_winner)

# soundness and completeness over a batch
report = cross_validate(GeneratorConfig(candidate_count=3, seed=0), 200)
for kind, row in report.counts.items():
    print(f"{kind.value:>14}: {row}")
print("unsound detections:", report.unsound)

# positives per flaw as a small array
kinds = list(report.counts)
hits = np.array([[report.counts[k]["both"], report.counts[k]["oracle_only"]] for k in kinds])
positives = hits.sum(axis=1)
recall = np.divide(hits[:, 0], positives, out=np.full(len(kinds), np.nan), where=positives > 0)
for kind, r in zip(kinds, recall):
    print(f"{kind.value:>14} recall: {'n/a' if np.isnan(r) else f'{r:.2f}'}")

# fewer probes per target: the Alaska no-show paradox is still found
tight = SearchBudget(max_retabulations_per_target=2)
print("two probes per target:", detect_no_show(load_fixture("alaska"), tight).modification.moves)
