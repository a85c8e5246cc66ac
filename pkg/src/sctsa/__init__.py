"""Topological simplicial analysis of timestamped single-cell point clouds."""

__version__ = "0.1.0"

from sctsa.errors import BudgetError, ConfigError, DataError, SctsaError

__all__ = ["BudgetError", "ConfigError", "DataError", "SctsaError", "__version__"]
