"""Interface-contract checker for embedded C modules."""

__version__ = "0.1.0"
