"""Flexible polyhedral suspensions: parameterization, construction, flexion and checks."""

from .errors import FlexspanError
from .params import CapGeometry, ParameterSet, SubType

__all__ = ["CapGeometry", "FlexspanError", "ParameterSet", "SubType"]
__version__ = "0.1.0"
