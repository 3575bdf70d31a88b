"""Shared fixtures: the two specification documents shipped with the package."""

from importlib import resources

import pytest

from pgsos import parse_spec


def _load(name: str):
    data = resources.files("pgsos").joinpath("data", name).read_bytes()
    return parse_spec(data)


@pytest.fixture(scope="session")
def pa_doc():
    """Finite probabilistic process algebra: prefixes, choice, three parallels."""
    return _load("pa.pgsos")


@pytest.fixture(scope="session")
def examples_doc():
    """Operators with multi-copy, reactive-testing, and replication behaviour."""
    return _load("examples.pgsos")
