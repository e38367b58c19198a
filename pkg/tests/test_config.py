import pytest

from hilbext._config import DEFAULT_TOL, get_tol


def test_default(monkeypatch):
    monkeypatch.delenv("HILBMOD_TOL", raising=False)
    assert get_tol() == DEFAULT_TOL == 1e-9
    assert get_tol(1e-3) == 1e-3


def test_env_override(monkeypatch):
    monkeypatch.setenv("HILBMOD_TOL", "2e-8")
    assert get_tol() == 2e-8


@pytest.mark.parametrize("bad", ["0", "-1e-9", "nan"])
def test_env_must_be_positive(monkeypatch, bad):
    monkeypatch.setenv("HILBMOD_TOL", bad)
    with pytest.raises(ValueError):
        get_tol()
