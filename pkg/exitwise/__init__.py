"""exitwise: exact exit time / exit position sampling for 1-D diffusions."""

__version__ = "0.1.0"
