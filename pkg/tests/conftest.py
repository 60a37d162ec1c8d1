from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import pytest

from rsphunt.models import ModelBundle, train_desk_bundle
from rsphunt.store import RecordStore

FIXTURES = Path(__file__).parent / "fixtures"
T0 = datetime(2024, 3, 1, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def models_dir(tmp_path_factory) -> Path:
    """Desk-scale models trained once per session (about 20 s) and saved to disk."""
    out = tmp_path_factory.mktemp("models")
    train_desk_bundle(seed=0).save(out)
    return out


@pytest.fixture(scope="session")
def desk_bundle(models_dir) -> ModelBundle:
    return ModelBundle.load(models_dir)


@pytest.fixture
def store(tmp_path) -> RecordStore:
    return RecordStore(tmp_path / "store")


def read_jsonl(path: Path) -> list[dict]:
    return [json.loads(ln) for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]


# PASS/FAIL lines recorded by the acceptance suite
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
