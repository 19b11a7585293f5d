"""Spectral toolkit for Laplacians on open books with junction conditions."""

__version__ = "0.1.0"
