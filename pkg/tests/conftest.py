import logging

import pytest
from sqlmodel import SQLModel, create_engine

import gfdcalc.models  # noqa: F401


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    """No history DB and generated files under tmp_path unless a test asks."""
    monkeypatch.delenv("DATABASE_URL", raising=False)
    monkeypatch.delenv("GFD_LOG_LEVEL", raising=False)
    monkeypatch.setenv("GFD_OUTPUT_DIR", str(tmp_path / "out"))
    yield
    # the CLI handler holds on to the stream captured for this test
    cli_logger = logging.getLogger("gfdcalc")
    for handler in list(cli_logger.handlers):
        if handler.get_name() == "gfdcalc-cli":
            cli_logger.removeHandler(handler)
    cli_logger.setLevel(logging.NOTSET)


@pytest.fixture
def history_url(tmp_path):
    url = f"sqlite:///{tmp_path / 'history.db'}"
    engine = create_engine(url)
    SQLModel.metadata.create_all(engine)
    engine.dispose()
    return url
