"""Exact symbolic engine for boundary noncommutative residues of Dirac-type operators."""

__version__ = "0.1.0"
