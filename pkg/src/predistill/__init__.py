"""Composite-pulse synthesis of magic-state gates and distillation overhead."""

__version__ = "0.1.0"
