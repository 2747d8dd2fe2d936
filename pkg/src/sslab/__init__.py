"""Split-step NLS integrators and analysis of the finite-difference variant's instability."""

__version__ = "0.1.0"
