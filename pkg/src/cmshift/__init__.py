"""Finitely presented countable Markov shifts: entropy, entropy at
infinity, recurrence classification, and desk-scale verification tools."""

__version__ = "0.1.0"
