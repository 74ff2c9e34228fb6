"""Test suite for pmb-cell-tracker.

Test Structure:
    tests/
       integration/       # Module behavior, grouped by package
       e2e/               # Full command-line workflows on experiments/smoke.ini

Oracles:
    - scipy.integrate quadrature for densities and detection probabilities
    - Brute-force enumeration of association vectors, posterior existence
      and GOSPA assignments on small problems

Usage:
    Run all tests:
        $ pytest

    Skip the slow Monte-Carlo checks:
        $ pytest -m "not slow"

    Run with coverage:
        $ pytest --cov=backend/cell_tracker --cov-report=html

Configuration:
    - pyproject.toml [tool.pytest.ini_options]: markers, pythonpath
    - conftest.py: isolated settings per test and shared grid/model fixtures
"""
