"""Integration tests for pmb-cell-tracker.

Modules:
    test_models: states, grid geometry, frames and beliefs
    test_filters: measurement model, association, particles and the PMB filters
    test_evaluation: GOSPA
    test_simulation: ground truth and frame synthesis
    test_services: filter factory and the experiment harness
    test_config: environment settings and experiment files
    test_core: errors, logging, serialization and version
    test_cli: the cell-tracker command line

Running Integration Tests:
    pytest tests/integration/ -v
    pytest tests/integration/test_filters/ -v -m "not slow"
"""
