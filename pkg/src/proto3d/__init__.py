"""Agentic text-to-3D prototype generation with a primitive scene language."""

__version__ = "0.1.0"
