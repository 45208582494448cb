"""Validation module for urlab"""

from .validator import InputValidator

__all__ = ["InputValidator"]
