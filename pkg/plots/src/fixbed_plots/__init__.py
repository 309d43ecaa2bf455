"""Figure rendering for fixbed simulation output."""

__version__ = "0.1.0"
