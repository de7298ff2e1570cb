"""Simulator and algorithm library for LOCAL and SLOCAL distributed graph computation."""

__version__ = "0.1.0"
