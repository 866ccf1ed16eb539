import os
import pathlib
import shutil

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli():
    """Path to the built `lear` executable; skips when it is not built."""
    path = os.environ.get("LEAR_CLI") or shutil.which("lear")
    if not path:
        candidate = ROOT / "build" / "tools" / "lear"
        path = str(candidate) if candidate.exists() else None
    if not path:
        pytest.skip("lear executable not built")
    return path


@pytest.fixture(scope="session")
def schemas():
    import json

    return {p.name.split(".")[0]: json.loads(p.read_text()) for p in (ROOT / "schemas").glob("*.schema.json")}
