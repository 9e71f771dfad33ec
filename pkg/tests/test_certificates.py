"""Published witnesses, fed through the independent certificate checker."""

import pytest

from rcvaudit.certificates import (
    BallotMove,
    CertificateError,
    FlawCertificate,
    FlawKind,
    Modification,
    apply_modification,
    check_certificate,
    verify_certificate,
)
from rcvaudit.tabulation import tabulate

from conftest import make_profile


def shift(kind, shifted, *moves):
    return Modification(
        "ballot_shift", moves=tuple(BallotMove(s, t, n) for s, t, n in moves), shifted=shifted
    )


def test_alaska_upward_6000(alaska):
    mod = shift("u", "Peltola", (("Palin",), ("Peltola", "Palin"), 6000))
    cert = FlawCertificate(FlawKind.UPWARD_MONO, mod, "Peltola", "Begich")
    check_certificate(alaska, cert)


def test_alaska_no_show_5400(alaska):
    mod = Modification(
        "ballot_removal", moves=(BallotMove(("Palin", "Begich", "Peltola"), (), 5400),)
    )
    modified = apply_modification(alaska, mod)
    assert modified.ballots_cast == 188583 - 5400
    assert tabulate(modified).winner == "Begich"
    check_certificate(alaska, FlawCertificate(FlawKind.NO_SHOW, mod, "Peltola", "Begich"))


def test_sf_downward_800(sf):
    mod = shift("d", "Engardio", (("Engardio", "Nguyen", "Melgar"), ("Nguyen", "Engardio", "Melgar"), 800))
    check_certificate(sf, FlawCertificate(FlawKind.DOWNWARD_MONO, mod, "Melgar", "Engardio"))


def test_burlington_upward_450_300(burlington):
    mod = shift(
        "u",
        "Kiss",
        (("Wright",), ("Kiss", "Wright"), 450),
        (("Wright", "Kiss", "Montroll"), ("Kiss", "Wright", "Montroll"), 300),
    )
    cert = FlawCertificate(FlawKind.UPWARD_MONO, mod, "Kiss", "Montroll")
    check_certificate(burlington, cert)


def test_pierce_compromise_15000(pierce):
    mod = shift(
        "c", "Goings", (("Bunney", "Goings", "McCarthy"), ("Goings", "Bunney", "McCarthy"), 15000)
    )
    check_certificate(pierce, FlawCertificate(FlawKind.COMPROMISE, mod, "McCarthy", "Goings"))


def test_pierce_strict_compromise_fails(pierce):
    mod = shift(
        "c", "Goings", (("Bunney", "Goings", "McCarthy"), ("Goings", "Bunney", "McCarthy"), 27661)
    )
    assert tabulate(apply_modification(pierce, mod)).winner == "McCarthy"


def test_minneapolis_upward_456(minneapolis):
    mod = shift(
        "u", "Worlobah", (("Arab", "Worlobah", "Gordon"), ("Worlobah", "Arab", "Gordon"), 456)
    )
    new = tabulate(apply_modification(minneapolis, mod)).winner
    assert new != "Worlobah"
    check_certificate(minneapolis, FlawCertificate(FlawKind.UPWARD_MONO, mod, "Worlobah", new))


def test_minneapolis_downward_80(minneapolis):
    mod = shift("d", "Arab", (("Arab", "Gordon", "Worlobah"), ("Gordon", "Arab", "Worlobah"), 80))
    check_certificate(minneapolis, FlawCertificate(FlawKind.DOWNWARD_MONO, mod, "Worlobah", "Arab"))


def test_wrong_resulting_winner_rejected(alaska):
    mod = shift("u", "Peltola", (("Palin",), ("Peltola", "Palin"), 6000))
    assert not verify_certificate(alaska, FlawCertificate(FlawKind.UPWARD_MONO, mod, "Peltola", "Palin"))


def test_too_few_ballots_to_shift_rejected(alaska):
    mod = shift("u", "Peltola", (("Palin",), ("Peltola", "Palin"), 21238))
    with pytest.raises(CertificateError, match="only 21237"):
        apply_modification(alaska, mod)


def test_shift_must_preserve_other_order(alaska):
    mod = shift("u", "Peltola", (("Palin", "Begich", "Peltola"), ("Peltola", "Begich", "Palin"), 10))
    with pytest.raises(CertificateError, match="reorders"):
        apply_modification(alaska, mod)


def test_upward_must_raise_winner(sf):
    # Melgar lowered, not raised
    mod = shift("u", "Melgar", (("Melgar", "Engardio", "Nguyen"), ("Engardio", "Melgar", "Nguyen"), 3000))
    new = tabulate(apply_modification(sf, mod)).winner
    cert = FlawCertificate(FlawKind.UPWARD_MONO, mod, "Melgar", new)
    assert not verify_certificate(sf, cert)


def test_no_show_requires_preference(alaska):
    # Peltola voters staying home cannot make a no-show certificate for Begich
    mod = Modification("ballot_removal", moves=(BallotMove(("Peltola",), (), 23733),))
    new = tabulate(apply_modification(alaska, mod)).winner
    cert = FlawCertificate(FlawKind.NO_SHOW, mod, "Peltola", new)
    assert not verify_certificate(alaska, cert)


def test_truncation_needs_proper_prefix():
    mod = Modification("ballot_truncation", moves=(BallotMove(("A", "B"), ("B",), 1),))
    with pytest.raises(CertificateError, match="prefix"):
        apply_modification(make_profile({"A>B": 2}), mod)


def test_condorcet_certificate(alaska, sf):
    check_certificate(alaska, FlawCertificate(FlawKind.CONDORCET, Modification.none(), "Peltola", "Begich"))
    assert not verify_certificate(sf, FlawCertificate(FlawKind.CONDORCET, Modification.none(), "Melgar", "Melgar"))


def test_modification_kind_must_match(alaska):
    cert = FlawCertificate(FlawKind.SPOILER, Modification.none(), "Peltola", "Begich")
    assert not verify_certificate(alaska, cert)


def test_spoiler_cannot_remove_winner(alaska):
    cert = FlawCertificate(FlawKind.SPOILER, Modification.removal_of_candidates({"Peltola"}), "Peltola", "Palin")
    assert not verify_certificate(alaska, cert)


def test_to_dict_is_ordered(alaska):
    mod = shift("u", "Peltola", (("Palin",), ("Peltola", "Palin"), 6000))
    d = FlawCertificate(FlawKind.UPWARD_MONO, mod, "Peltola", "Begich", {"z": 1, "a": 2}).to_dict()
    assert list(d) == ["flaw_kind", "original_winner", "resulting_winner", "modification", "details"]
    assert list(d["details"]) == ["a", "z"]
    assert d["modification"]["moves"][0] == {"source": ["Palin"], "target": ["Peltola", "Palin"], "count": 6000}
