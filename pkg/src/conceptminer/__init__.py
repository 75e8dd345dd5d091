"""Concept discovery from labeled explanation corpora and concept-bottleneck
classifiers trained on the resulting concept matrix."""

__version__ = "0.1.0"
