from __future__ import annotations

import json
from pathlib import Path

import pytest

from trustcat.assessment import parse_document
from trustcat.catalog import default_catalog

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN_DOC = CORPUS / "credit-scoring.assessment.json"


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def golden_json():
    return json.loads(GOLDEN_DOC.read_text(encoding="utf-8"))


@pytest.fixture
def golden_doc():
    return parse_document(GOLDEN_DOC)


def levels_doc(levels: dict[str, str], **extra) -> dict:
    """Minimal document JSON with the given levels and justifications."""
    return {
        "meta": {"name": "t"},
        "protection": {d: {"level": lv, "justification": "j"} for d, lv in levels.items()},
        **extra,
    }


ALL_HIGH = {d: "high" for d in ("FN", "AC", "TR", "RE", "S", "DP")}
