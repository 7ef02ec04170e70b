"""Meromorphic tensor structures for Yangians and quantum loop algebras, at desk scale."""

__version__ = "0.1.0"
