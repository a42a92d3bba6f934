"""
Experiment Services
Monte Carlo harness, complexity tables, validation suite and file parsing.
"""
