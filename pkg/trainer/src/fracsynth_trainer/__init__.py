"""Toy-scale deep artefact suppression trained on fracsynth datasets."""

__version__ = "0.1.0"
