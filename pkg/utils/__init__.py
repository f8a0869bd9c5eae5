"""
Utils package for hamop.

Exact polynomial and matrix arithmetic, input validation and the error
hierarchy. The catalog store, task manager and report exporter live in
their own modules and are imported from there.
"""

from .validation import (
    HamOpError,
    ValidationError,
    ParseError,
    UnknownVariableError,
    UnknownEntryError,
    ParametricInputError,
)
from .scalar_poly import (
    VarTable,
    parse_poly,
    format_poly,
    rational,
)

__all__ = [
    'HamOpError',
    'ValidationError',
    'ParseError',
    'UnknownVariableError',
    'UnknownEntryError',
    'ParametricInputError',
    'VarTable',
    'parse_poly',
    'format_poly',
    'rational',
]
