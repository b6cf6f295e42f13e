"""Synthetic dynamic-MRI training data from quaternion Julia fractals."""

__version__ = "0.1.0"
