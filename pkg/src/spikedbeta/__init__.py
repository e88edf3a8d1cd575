"""Spiked beta-ensembles with polynomial potentials: equilibrium measures,
phase diagrams, limit laws and Monte Carlo checks."""

__version__ = "0.1.0"
