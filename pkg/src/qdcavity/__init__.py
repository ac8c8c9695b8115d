"""Simulator and analysis toolkit for a cavity-QED quantum dialogue protocol."""

__version__ = "0.1.0"
