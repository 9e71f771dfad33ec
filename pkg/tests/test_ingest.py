import pytest

from rcvaudit.datasets import FIXTURES, fixture_text
from rcvaudit.ingest import (
    BadCountError,
    CVRParseError,
    EmptyCVRError,
    MalformedHeaderError,
    MalformedRowError,
    SanitationPolicy,
    UnknownCandidateError,
    eliminate_write_ins,
    load_cvr,
    parse_cvr,
    sanitize,
    serialize_profile,
    write_cvr,
)
from rcvaudit.model import WRITE_IN_ID, Candidate, PreferenceProfile
from rcvaudit.tabulation import tabulate

from conftest import make_profile

KEEP = SanitationPolicy(write_in_rule="keep")


def test_first_alaska_row(alaska):
    assert alaska.count_of(("Begich", "Palin", "Peltola")) == 27070


def test_skip_is_compressed():
    p = parse_cvr("count,rank_1,rank_2,rank_3\n5,A,$SKIP,B\n")
    assert p.counts() == {("A", "B"): 5}


def test_overvote_truncates():
    p = parse_cvr("count,rank_1,rank_2,rank_3\n5,A,$OVERVOTE,B\n")
    assert p.counts() == {("A",): 5}


def test_overvote_skip_position_rule():
    assert sanitize(["A", "$OVERVOTE", "B"], SanitationPolicy(overvote_rule="skip_position")) == ("A", "B")


def test_duplicate_keeps_first():
    assert sanitize(["A", "B", "A", "C"]) == ("A", "B", "C")


def test_duplicate_becomes_skip_before_skip_rule():
    policy = SanitationPolicy(skip_rule="truncate_after_two_consecutive")
    assert sanitize(["A", "A", "$SKIP", "B"], policy) == ("A",)
    assert sanitize(["A", "$SKIP", "B"], policy) == ("A", "B")


def test_overvote_after_skips():
    assert sanitize(["$SKIP", "$OVERVOTE", "A"]) == ()


def test_empty_ballots_are_discarded():
    p = parse_cvr("count,rank_1,rank_2\n4,$OVERVOTE,A\n3,A,\n")
    assert p.discarded == 4
    assert p.ballots_cast == 3
    assert p.total_ranked + p.discarded == 7


def test_trailing_empty_cells_and_bom():
    p = parse_cvr("\ufeffcount,rank_1,rank_2,rank_3,\n2,A,,,\n")
    assert p.counts() == {("A",): 2}


def test_comment_metadata():
    text = "# truncation_level=2\n# candidates=A,B,C\ncount,rank_1,rank_2\n1,A,B\n"
    p = parse_cvr(text)
    assert p.truncation_level == 2
    assert p.candidate_ids == ("A", "B", "C")


def test_ballots_cast_header():
    p = parse_cvr("# ballots_cast=10\ncount,rank_1\n4,A\n3,B\n")
    assert p.ballots_cast == 10 and p.total_ranked == 7


@pytest.mark.parametrize(
    "text, error, line",
    [
        ("cnt,rank_1\n1,A\n", MalformedHeaderError, 1),
        ("count,rank_2\n1,A\n", MalformedHeaderError, 1),
        ("# only comments\n", MalformedHeaderError, 1),
        ("count,rank_1\n1,A\n0,B\n", BadCountError, 3),
        ("count,rank_1\n1,A\n-2,B\n", BadCountError, 3),
        ("count,rank_1\nx,A\n", BadCountError, 2),
        ("count,rank_1\n1.5,A\n", BadCountError, 2),
        ("count,rank_1\n1,$BOGUS\n", UnknownCandidateError, 2),
        ("# candidates=A\ncount,rank_1\n1,B\n", UnknownCandidateError, 3),
        ("count,rank_1,rank_2,rank_3\n1,A,,B\n", MalformedRowError, 2),
        ("count,rank_1\n1,A,B\n", MalformedRowError, 2),
        ("# truncation_level=1\ncount,rank_1,rank_2\n1,A,B\n", MalformedRowError, 3),
        ("# truncation_level=zero\ncount,rank_1\n1,A\n", MalformedHeaderError, 1),
        ("# ballots_cast=1\ncount,rank_1\n2,A\n", MalformedHeaderError, 2),
        ("count,rank_1\n", EmptyCVRError, 1),
    ],
)
def test_located_errors(text, error, line):
    with pytest.raises(error) as info:
        parse_cvr(text, source="f.csv")
    assert info.value.line == line
    assert str(info.value).startswith(f"f.csv:{line}:")
    assert isinstance(info.value, CVRParseError)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_round_trip(name, fixtures):
    p = fixtures[name]
    text = serialize_profile(p)
    assert parse_cvr(text, KEEP) == p
    assert serialize_profile(parse_cvr(text, KEEP)) == text


def test_round_trip_through_file(tmp_path, sf):
    path = tmp_path / "sf.csv"
    write_cvr(sf, path)
    assert load_cvr(path) == sf
    assert load_cvr(path).ballots_cast == 39322


def test_round_trip_keeps_write_in_flags():
    cands = [Candidate("A"), Candidate("B"), Candidate("Zed", is_write_in=True)]
    p = PreferenceProfile.build(cands, {("Zed", "A"): 2, ("B",): 3}, truncation_level=3)
    q = parse_cvr(serialize_profile(p), KEEP)
    assert q == p
    assert q.candidate("Zed").is_write_in


def test_serialize_rejects_overlong_rankings():
    p = make_profile({"A>B>C": 1}, truncation_level=2)
    with pytest.raises(ValueError):
        serialize_profile(p)


def test_write_ins_eliminated_by_default():
    text = "count,rank_1,rank_2,rank_3\n2,$WRITEIN,B,A\n3,A,B,\n4,B,,\n1,C,$WRITEIN,\n"
    p = parse_cvr(text)
    assert WRITE_IN_ID not in p.candidate_ids
    assert p.counts() == {("A", "B"): 3, ("B",): 4, ("B", "A"): 2, ("C",): 1}
    kept = parse_cvr(text, KEEP)
    assert WRITE_IN_ID in kept.candidate_ids
    assert eliminate_write_ins(kept) == p


def test_write_in_transfer_changes_round_structure():
    # four candidates; the write-in holds first place on 2 ballots
    text = (
        "count,rank_1,rank_2,rank_3\n"
        "2,$WRITEIN,C,A\n"
        "4,A,B,\n"
        "3,B,C,\n"
        "3,C,A,\n"
    )
    raw = parse_cvr(text, KEEP)
    before = tabulate(raw)
    assert before.rounds[0].tallies == {WRITE_IN_ID: 2, "A": 4, "B": 3, "C": 3}
    assert before.elimination_order[0] == WRITE_IN_ID
    after = tabulate(eliminate_write_ins(raw))
    assert after.rounds[0].tallies == {"A": 4, "B": 3, "C": 5}
    assert after.rounds[1].tallies == {"A": 4, "C": 8}
    assert after.winner == "C"


def test_eliminate_write_ins_noop_and_all():
    p = make_profile({"A>B": 1})
    assert eliminate_write_ins(p) is p
    only = PreferenceProfile.build([Candidate("W", is_write_in=True)], {("W",): 1})
    with pytest.raises(ValueError):
        eliminate_write_ins(only)


def test_fixture_text_is_canonical():
    for name in FIXTURES:
        assert fixture_text(name).splitlines()[0].startswith("#")
