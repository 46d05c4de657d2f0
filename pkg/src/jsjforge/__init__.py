"""Deformation spaces and JSJ decompositions of generalized Baumslag-Solitar groups."""

__version__ = "0.1.0"
