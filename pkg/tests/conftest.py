import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for gen/brute helpers

from climadash.dsl import load_model

REPO = Path(__file__).resolve().parent.parent
REFERENCE_MODEL = REPO / "models" / "air_quality.cbm"


@pytest.fixture(scope="session")
def reference_text() -> str:
    return REFERENCE_MODEL.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def reference_model(reference_text):
    model = load_model(reference_text)
    assert not hasattr(model, "diagnostics"), f"reference model invalid: {model}"
    return model
