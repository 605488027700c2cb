"""Heisenberg-picture simulation of adiabatic evolution for gapped spin lattices."""

__version__ = "0.1.0"
