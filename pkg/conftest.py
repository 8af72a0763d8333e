# depth_ruin/conftest.py
"""
Shared pytest configuration
"""


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo or oracle runs (deselect with -m 'not slow')")
