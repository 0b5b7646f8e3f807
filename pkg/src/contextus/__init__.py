"""Exact verification of Kochen-Specker style contextuality arguments."""
from __future__ import annotations

__version__ = "0.1.0"
