"""Offline preprocessor emitting parse and embedding interchange files."""

__version__ = "0.1.0"
