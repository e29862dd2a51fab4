"""Radial finite elements for elliptic problems with Hardy potential and singular drift."""

__version__ = "0.1.0"
