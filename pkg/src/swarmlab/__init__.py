"""Improved genetic algorithm, swarm baselines and black-box attack harness."""

__version__ = "0.3.0"
