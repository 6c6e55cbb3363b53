"""invariant-kit - set invariance verification with minimal barrier functions."""

__version__ = "0.1.0"
