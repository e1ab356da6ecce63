"""Casimir-Polder energetics of an anisotropic atom on the axis of a ring,
annular disc or apertured plate."""

__version__ = "0.1.0"
