"""Audit the bundled fixtures as one corpus and print the summary table."""

import shutil
import tempfile
from pathlib import Path

from rcvaudit import FIXTURES, audit_corpus, fixture_path

with tempfile.TemporaryDirectory() as tmp:
    for name in FIXTURES:
        shutil.copy(fixture_path(name), Path(tmp) / fixture_path(name).name)
    summary = audit_corpus(tmp)

for report in summary.reports:
    failed = ", ".join(k.value for k in report.failed)
    print(f"{report.election_id:<28} {report.winner:<10} {report.share_display:>6}  {failed}")

print()
print(summary.to_csv())
