"""Docking-benchmark evaluation and train/test leakage auditing."""

__version__ = "0.1.0"
