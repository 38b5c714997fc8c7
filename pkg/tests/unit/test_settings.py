#!/usr/bin/env python3
"""
Tests for environment-driven tolerance settings.
"""

import sys
from pathlib import Path

import pytest

# Add the project root to sys.path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.settings import DEFAULT_TOLERANCES, get_run_defaults, get_tolerance, settings


@pytest.fixture
def clean_settings(monkeypatch):
    """Reload settings from a scrubbed environment, and again afterwards"""
    for name in DEFAULT_TOLERANCES:
        monkeypatch.delenv(f"RESILIENCE_{name.upper()}", raising=False)
    for key in ('VERTEX_CAP', 'THREADS', 'LOG_LEVEL', 'LOG_FILE', 'OUT_DIR'):
        monkeypatch.delenv(f"RESILIENCE_{key}", raising=False)
    settings.reload()
    yield settings
    monkeypatch.undo()
    settings.reload()


def test_defaults(clean_settings):
    for name, value in DEFAULT_TOLERANCES.items():
        assert get_tolerance(name) == value
    assert get_run_defaults() == {
        'vertex_cap': 20, 'threads': 1, 'log_level': 'INFO', 'log_file': '', 'out_dir': './results',
    }


def test_environment_overrides(clean_settings, monkeypatch):
    monkeypatch.setenv("RESILIENCE_ORACLE_RTOL", "1e-6")
    monkeypatch.setenv("RESILIENCE_THREADS", "4")
    monkeypatch.setenv("RESILIENCE_LOG_LEVEL", "debug")
    settings.reload()
    assert get_tolerance('oracle_rtol') == 1e-6
    assert settings.threads == 4
    assert settings.log_level == 'DEBUG'


def test_override_returns_previous_values(clean_settings):
    previous = settings.override({'ordering': 1e-6, 'degenerate': 1e-9})
    assert get_tolerance('ordering') == 1e-6
    assert previous == {'ordering': DEFAULT_TOLERANCES['ordering'], 'degenerate': DEFAULT_TOLERANCES['degenerate']}
    settings.override(previous)
    assert get_tolerance('ordering') == DEFAULT_TOLERANCES['ordering']


def test_unknown_tolerance(clean_settings):
    with pytest.raises(KeyError):
        get_tolerance('not_a_tolerance')
    with pytest.raises(KeyError):
        settings.override({'not_a_tolerance': 1.0})


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
