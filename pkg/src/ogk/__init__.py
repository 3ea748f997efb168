"""Orlicz norms, finite groupoids and their convolution algebras."""

__version__ = "0.1.0"
