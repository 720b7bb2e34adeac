"""Versioned prompt templates, loaded as package data."""

from __future__ import annotations

from importlib import resources


def load_template(name: str) -> str:
    """Read a template by file name (e.g. ``relation.txt``)."""
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")
