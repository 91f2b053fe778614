"""Performance estimation tools for online Frank-Wolfe style algorithms."""

__version__ = "0.1.0"
