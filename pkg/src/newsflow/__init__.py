"""Originator detection and content-flow analysis for multi-account post corpora."""

from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
