import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import no_network_guard  # noqa: E402


@pytest.fixture
def network_guard(monkeypatch):
    """Fail the test on any attempted socket connection."""
    no_network_guard(monkeypatch)
    return None


@pytest.fixture
def no_sleep(monkeypatch):
    """Collect requested sleeps instead of actually waiting."""
    sleeps: list[float] = []

    def fake_sleep(seconds):
        sleeps.append(seconds)

    return fake_sleep, sleeps
