import pytest

from finered import FineredConfig, set_config, local_ledger

@pytest.fixture
def config():
    cfg = FineredConfig(jobs=1)
    set_config(cfg)
    yield cfg
    set_config(None)

@pytest.fixture
def ledger(config):
    with local_ledger('test') as ledger:
        yield ledger

@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.delenv('FINERED_JSON_PATH', raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path
