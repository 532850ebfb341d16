#!/usr/bin/env python3
"""Regenerate the checked-in golden artifacts from the reference model.

Run only when the generator output format changes on purpose; the
acceptance suite pins these files byte for byte.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from climadash.codegen import generate_all  # noqa: E402
from climadash.dsl import Model, load_model  # noqa: E402


def main() -> int:
    model = load_model((REPO / "models" / "air_quality.cbm").read_bytes())
    if not isinstance(model, Model):
        print(f"reference model invalid:\n{model}", file=sys.stderr)
        return 1
    out_dir = REPO / "tests" / "goldens"
    out_dir.mkdir(parents=True, exist_ok=True)
    for artifact in generate_all(model):
        path = out_dir / Path(artifact.path).name
        path.write_bytes(artifact.content)
        print(f"wrote {path.relative_to(REPO)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
