import pytest


@pytest.fixture(autouse=True)
def _no_seed_env(monkeypatch):
    monkeypatch.delenv("CERTCTL_SEED", raising=False)
