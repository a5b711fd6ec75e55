"""Offline figures for maplab experiment CSV outputs."""

__version__ = "0.1.0"

from .figures import KINDS, FigureSpec, MissingColumn, SchemaMismatch, render, series_checksum

__all__ = [
    "KINDS",
    "FigureSpec",
    "MissingColumn",
    "SchemaMismatch",
    "render",
    "series_checksum",
]
