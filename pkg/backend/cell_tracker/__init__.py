"""Poisson multi-Bernoulli tracking with thresholded cell measurements.

Subpackages:
    models: domain value types (states, grids, frames, particle sets, beliefs)
    filters: cell and point measurement PMB filters and their building blocks
    evaluation: GOSPA metric
    simulation: ground-truth scenario and frame generation
    services: Monte-Carlo experiment harness
    cli: command-line front end
"""
