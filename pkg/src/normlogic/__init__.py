"""Transparency, defeasible inference and deontic bridge principles."""

__version__ = "0.1.0"
