"""Forensic audits of single-winner instant-runoff elections."""

from .certificates import (
    BallotMove,
    CertificateError,
    FlawCertificate,
    FlawKind,
    Modification,
    apply_modification,
    check_certificate,
    verify_certificate,
)
from .datasets import FIXTURES, fixture_path, load_fixture
from .detectors import (
    DEFAULT_BUDGET,
    DetectorResults,
    SearchBudget,
    detect_compromise,
    detect_condorcet_failure,
    detect_downward_mono,
    detect_majoritarian,
    detect_no_show,
    detect_spoiler,
    detect_truncation,
    detect_upward_mono,
    run_all_detectors,
)
from .ingest import (
    CVRParseError,
    SanitationPolicy,
    load_cvr,
    parse_cvr,
    sanitize,
    serialize_profile,
    write_cvr,
)
from .model import (
    BallotType,
    Candidate,
    PreferenceProfile,
    merge_ballot_types,
    ranks_above,
    restrict_profile,
)
from .oracle import GeneratorConfig, cross_validate, generate_profile, oracle_detect
from .report import AuditConfig, AuditReport, audit_corpus, audit_file, load_config
from .tabulation import (
    DEFAULT_POLICY,
    EliminationPolicy,
    PairwiseMatrix,
    TabulationRecord,
    VoteShare,
    classify_truncated,
    condorcet_winner,
    pairwise,
    reduce_to_n,
    tabulate,
    winners_vote_share,
)

__version__ = "0.1.0"
