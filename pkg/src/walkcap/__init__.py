"""Capacity of random-walk ranges on Z^d: exact solves, cross terms, deviations."""
__version__ = "0.1.0"
