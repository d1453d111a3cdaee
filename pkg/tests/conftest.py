"""
Pytest configuration for omt-lab tests.

Provides the markers, shared fixtures and the gate for acceptance-scale runs.
"""

import os
import sys
from pathlib import Path

import pytest
from dotenv import load_dotenv

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

# Load environment variables before tests run
load_dotenv()


@pytest.fixture(scope="session")
def full_scale():
    """
    Gate for acceptance-scale statistical runs (10^5 paths, 100 seeds).

    Set OMT_LAB_FULL_SCALE=1 in your environment or .env file to run them.
    """
    if not os.getenv("OMT_LAB_FULL_SCALE"):
        pytest.skip("OMT_LAB_FULL_SCALE not set - skipping acceptance-scale run")
    return True


@pytest.fixture(scope="session")
def seeds():
    """Fixed seeds for seed-averaged estimates."""
    return [11, 23, 37, 41, 59]


@pytest.fixture
def fresh_settings(monkeypatch):
    """
    Settings rebuilt from the current environment; restored after the test.

    Use monkeypatch.setenv before requesting values from the returned
    callable.
    """
    from omt_lab import settings as settings_module

    def reload():
        return settings_module.reload_settings()

    yield reload
    monkeypatch.undo()
    settings_module.reload_settings()


def pytest_configure(config):
    """Configure pytest with custom markers and settings."""
    config.addinivalue_line(
        "markers",
        "integration: marks tests as integration tests (end-to-end CLI runs and statistical checks)"
    )
    config.addinivalue_line(
        "markers",
        "unit: marks tests as unit tests (fast, small path counts)"
    )


def pytest_report_header(config):
    """Add custom header to pytest output."""
    return [
        "omt-lab Tests",
        "Unit tests: small path counts, exact cases",
        "Integration tests: CLI end-to-end; full scale needs OMT_LAB_FULL_SCALE=1"
    ]
