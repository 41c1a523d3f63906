"""Lie-Hamilton systems built from matrix representations of Lie algebras."""

from .errors import LieHamError

__version__ = "0.1.0"
__all__ = ["LieHamError", "__version__"]
