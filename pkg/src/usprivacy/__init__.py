"""Privacy-disclosure detection for agile user stories."""

__version__ = "0.1.0"
