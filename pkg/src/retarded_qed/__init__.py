"""Retarded collective emission of two emitters in a slow waveguide."""

__version__ = "0.1.0"
