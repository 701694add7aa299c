from __future__ import annotations

from pathlib import Path

import pytest

from spokenkit.tei import parse_document

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_bytes(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def parse_fixture(name: str):
    doc, _ = parse_document(fixture_bytes(name))
    return doc


@pytest.fixture
def dialogue_doc():
    return parse_fixture("anchored_dialogue.xml")


@pytest.fixture
def inline_doc():
    return parse_fixture("inline_anchors.xml")


@pytest.fixture
def tags_doc():
    return parse_fixture("tags.xml")


@pytest.fixture
def pomme_doc():
    return parse_fixture("pomme.xml")
