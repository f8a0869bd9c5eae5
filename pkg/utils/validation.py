"""
Input validation utilities for hamop.

Provides the exception hierarchy shared by every module, plus validation
functions for user-facing inputs (CLI parameters, catalog ids, bivector files).
"""

import re
from typing import Dict, Any, List, Optional, Tuple


class HamOpError(Exception):
    """Base exception for all hamop errors."""
    def __init__(self, message: str, field: str = None):
        self.message = message
        self.field = field
        super().__init__(self.message)


class ValidationError(HamOpError):
    """Custom exception for validation errors."""
    pass


class VarTableMismatchError(ValidationError):
    """Operands live over different variable tables."""
    pass


class UnknownVariableError(ValidationError):
    pass


class ParseError(ValidationError):
    """Text could not be read as a polynomial or rational function."""
    pass


class DimensionMismatchError(ValidationError):
    pass


class UnknownEntryError(ValidationError):
    """Catalog id does not exist."""
    pass


class ParametricInputError(ValidationError):
    """Operation requires all parameters specialized to rationals."""
    pass


class CatalogConsistencyError(ValidationError):
    """A catalog entry contradicts its own expected facts."""
    pass


class NonExactDivisionError(HamOpError):
    pass


class DivisionByZeroError(HamOpError):
    pass


class SingularMetricError(HamOpError):
    """det g vanishes identically where an inverse metric is needed."""
    pass


class DegenerateMetricError(HamOpError):
    pass


class NotHamiltonianError(HamOpError):
    pass


class NonlocalResidueError(HamOpError):
    """A nonlocal symbol survived operator application."""
    pass


class PullbackError(HamOpError):
    pass


class NormalFormError(HamOpError):
    pass


# =============================================================================
# VALIDATORS
# =============================================================================

PARAM_NAME_PATTERN = r'^[A-Za-z][A-Za-z0-9_]*$'
CATALOG_ID_PATTERN = r'^[A-Za-z0-9][A-Za-z0-9\-]*$'
KNOWN_CHECKS = ('killing', 'nonlin', 'potemin', 'curvature')

SYMBOLIC = 'sym'


def validate_string(value: Any, field_name: str, min_length: int = 1, max_length: int = 10000,
                   allow_empty: bool = False, pattern: str = None) -> str:
    """
    Validate a string field.

    Args:
        value: The value to validate
        field_name: Name of the field for error messages
        min_length: Minimum allowed length
        max_length: Maximum allowed length
        allow_empty: Whether empty strings are allowed
        pattern: Optional regex pattern to match

    Returns:
        The validated and stripped string

    Raises:
        ValidationError: If validation fails
    """
    if value is None:
        if not allow_empty:
            raise ValidationError(f"{field_name} is required", field_name)
        return ""

    if not isinstance(value, str):
        raise ValidationError(f"{field_name} must be a string", field_name)

    value = value.strip()

    if not value and not allow_empty:
        raise ValidationError(f"{field_name} cannot be empty", field_name)

    if len(value) < min_length:
        raise ValidationError(f"{field_name} must be at least {min_length} characters", field_name)

    if len(value) > max_length:
        raise ValidationError(f"{field_name} must be at most {max_length} characters", field_name)

    if pattern and not re.match(pattern, value):
        raise ValidationError(f"{field_name} has invalid format", field_name)

    return value


def validate_integer(value: Any, field_name: str, min_value: int = None, max_value: int = None,
                    required: bool = True) -> Optional[int]:
    """
    Validate an integer field.

    Raises:
        ValidationError: If validation fails
    """
    if value is None:
        if required:
            raise ValidationError(f"{field_name} is required", field_name)
        return None

    if isinstance(value, bool):
        raise ValidationError(f"{field_name} must be an integer", field_name)

    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{field_name} must be an integer", field_name)

    if min_value is not None and value < min_value:
        raise ValidationError(f"{field_name} must be at least {min_value}", field_name)

    if max_value is not None and value > max_value:
        raise ValidationError(f"{field_name} must be at most {max_value}", field_name)

    return value


def validate_rational_text(value: str, field_name: str) -> str:
    """Validate a rational literal such as ``-3``, ``1/2`` or ``+7/4``."""
    value = validate_string(value, field_name, max_length=200)
    if not re.match(r'^[+-]?\d+(/\d+)?$', value):
        raise ValidationError(f"{field_name} must be a rational number like 3 or -1/2", field_name)
    if '/' in value and int(value.split('/')[1]) == 0:
        raise ValidationError(f"{field_name} has zero denominator", field_name)
    return value


def validate_param_assignment(value: str) -> Tuple[str, Optional[str]]:
    """
    Validate a ``--param`` assignment.

    Args:
        value: Text of the form ``name=rational`` or ``name=sym``

    Returns:
        (name, rational text) or (name, None) for symbolic mode

    Raises:
        ValidationError: If the assignment is malformed
    """
    value = validate_string(value, "param", max_length=500)
    if '=' not in value:
        raise ValidationError(f"Parameter assignment '{value}' must look like name=value", "param")

    name, _, rhs = value.partition('=')
    name = name.strip()
    rhs = rhs.strip()
    if not re.match(PARAM_NAME_PATTERN, name):
        raise ValidationError(f"Invalid parameter name '{name}'", "param")
    if rhs == SYMBOLIC:
        return name, None
    return name, validate_rational_text(rhs, f"param {name}")


def validate_param_assignments(values: Optional[List[str]]) -> Dict[str, Optional[str]]:
    """Validate a list of ``--param`` flags; duplicate names are rejected."""
    result: Dict[str, Optional[str]] = {}
    for value in values or []:
        name, rhs = validate_param_assignment(value)
        if name in result:
            raise ValidationError(f"Parameter '{name}' given twice", "param")
        result[name] = rhs
    return result


def validate_sweep(value: str) -> Tuple[str, List[str]]:
    """Validate a ``--sweep name=v1,v2,...`` grid axis."""
    value = validate_string(value, "sweep", max_length=2000)
    name, sep, rhs = value.partition('=')
    name = name.strip()
    if not sep or not re.match(PARAM_NAME_PATTERN, name):
        raise ValidationError(f"Sweep '{value}' must look like name=v1,v2,...", "sweep")
    points = [validate_rational_text(v, f"sweep {name}") for v in rhs.split(',') if v.strip()]
    if not points:
        raise ValidationError(f"Sweep '{name}' has no values", "sweep")
    return name, points


def validate_check_list(value: Optional[str]) -> List[str]:
    """Validate a comma-separated ``--checks`` value; empty means all checks."""
    if value is None or not value.strip():
        return list(KNOWN_CHECKS)
    checks = [c.strip() for c in value.split(',') if c.strip()]
    unknown = [c for c in checks if c not in KNOWN_CHECKS]
    if unknown:
        raise ValidationError(
            f"Unknown checks: {', '.join(unknown)} (known: {', '.join(KNOWN_CHECKS)})", "checks")
    # keep first occurrence order
    return list(dict.fromkeys(checks))


def validate_catalog_id(value: Any) -> str:
    """Validate a catalog identifier such as ``g4`` or ``n4-stab14-a``."""
    return validate_string(value, "catalog id", max_length=64, pattern=CATALOG_ID_PATTERN)


def validate_bivector_triples(value: Any, n: int, field_name: str = "bivector") -> List[Tuple[int, int, str]]:
    """
    Validate one bivector given as ``[[a, b, coefficient], ...]``.

    Indices are 1-based with ``a != b`` and both in ``1..n+1``; the
    coefficient is kept as text for the polynomial parser.

    Raises:
        ValidationError: If a triple is malformed
    """
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{field_name} must be a non-empty list of [a, b, coefficient]", field_name)

    triples = []
    for item in value:
        if not isinstance(item, (list, tuple)) or len(item) != 3:
            raise ValidationError(f"{field_name} entries must be [a, b, coefficient]", field_name)
        a = validate_integer(item[0], f"{field_name} index", min_value=1, max_value=n + 1)
        b = validate_integer(item[1], f"{field_name} index", min_value=1, max_value=n + 1)
        if a == b:
            raise ValidationError(f"{field_name} has repeated index {a}", field_name)
        coeff = item[2]
        if isinstance(coeff, (int, float)) and not isinstance(coeff, bool):
            if isinstance(coeff, float) and not coeff.is_integer():
                raise ValidationError(f"{field_name} coefficients must be exact; use a string like '1/2'",
                                      field_name)
            coeff = str(int(coeff))
        coeff = validate_string(coeff, f"{field_name} coefficient", max_length=2000)
        triples.append((a, b, coeff))
    return triples


def validate_square(rows: Any, field_name: str, size: Optional[int] = None) -> List[List[Any]]:
    """Validate a square list-of-lists matrix (optionally of a given size)."""
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValidationError(f"{field_name} must be a non-empty list of rows", field_name)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise DimensionMismatchError(f"{field_name} must be square", field_name)
    if size is not None and n != size:
        raise DimensionMismatchError(f"{field_name} must be {size}x{size}, got {n}x{n}", field_name)
    return rows
