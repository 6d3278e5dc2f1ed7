"""Outcome-oriented prescriptive process monitoring with temporal-relation recommendations."""

__version__ = "0.1.0"
