"""Catalog-driven trustworthiness assessment engine for AI applications."""

from __future__ import annotations

__version__ = "0.1.0"
