"""Tame flows on simplicial complexes, posets and Grassmannians."""

__version__ = "0.1.0"
