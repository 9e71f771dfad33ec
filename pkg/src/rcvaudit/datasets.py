"""Bundled three-candidate profiles of real elections, in canonical CSV."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .ingest import DEFAULT_SANITATION, SanitationPolicy, parse_cvr
from .model import PreferenceProfile

FIXTURES = {
    "alaska": "alaska_2022_house_special.csv",
    "burlington": "burlington_2009_mayor.csv",
    "pierce": "pierce_county_executive.csv",
    "sf_d7": "sf_2020_d7_supervisor.csv",
    "minneapolis": "minneapolis_2021_ward2.csv",
}


def fixture_path(name: str) -> Path:
    try:
        filename = FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    return Path(str(resources.files("rcvaudit") / "data" / filename))


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def load_fixture(name: str, policy: SanitationPolicy = DEFAULT_SANITATION) -> PreferenceProfile:
    return parse_cvr(fixture_text(name), policy, source=FIXTURES[name])
