import pytest

import tracing_setup


@pytest.fixture
def fresh(monkeypatch):
    monkeypatch.setattr(tracing_setup, "_tracing_initialized", False)
    monkeypatch.setattr(tracing_setup, "_exporting", False)
    calls = []
    monkeypatch.setattr(tracing_setup, "configure_azure_monitor", lambda **kwargs: calls.append(kwargs))
    return calls


def test_exports_once_with_a_connection_string(fresh):
    assert tracing_setup.setup_tracing("InstrumentationKey=00000000-0000-0000-0000-000000000000")
    assert tracing_setup.setup_tracing("InstrumentationKey=other")
    assert len(fresh) == 1


def test_without_a_connection_string(fresh, monkeypatch, capsys):
    monkeypatch.delenv("APPLICATIONINSIGHTS_CONNECTION_STRING", raising=False)
    assert not tracing_setup.setup_tracing()
    assert fresh == []
    assert "No Application Insights connection string" in capsys.readouterr().err
