from __future__ import annotations

import json
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"

# Calibrated sample item: one grade-school science question in three density
# conditions, with its reference scores.
ARC_TARGETS = {"diluted": 0.29, "standard": 0.58, "ultra_dense": 0.87}
ARC_CLASSES = {"diluted": "diluted", "standard": "standard", "ultra_dense": "ultra_dense"}


@pytest.fixture(scope="session")
def arc_item() -> dict:
    with open(DATA_DIR / "arc_001.json", encoding="utf-8") as fh:
        return json.load(fh)["items"][0]


@pytest.fixture(scope="session")
def arc_variants(arc_item) -> dict[str, str]:
    return arc_item["variants"]


@pytest.fixture(scope="session")
def corpus() -> list[str]:
    lines = (DATA_DIR / "corpus.txt").read_text(encoding="utf-8").splitlines()
    return [line for line in lines if line.strip() and not line.startswith("#")]
