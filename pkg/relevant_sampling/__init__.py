"""Relevant-Sampling: random sampling of band-limited functions on their essential support."""

__version__ = "0.1.0"
