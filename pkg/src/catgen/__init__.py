"""CCG supertagging by category generation."""

__version__ = "0.1.0"
