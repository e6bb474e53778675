"""
Input validation functions.
Validates numerical parameters before they reach meshing, solves or the optimizer.
"""
import math
from typing import Any, Sequence
from utils.errors import ValidationError


def validate_positive(value: Any, field: str) -> float:
    """
    Validate a strictly positive finite number.

    Args:
        value: Number to check
        field: Parameter name reported on failure

    Returns:
        The value as float

    Raises:
        ValidationError: If value is not a positive finite number
    """
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{field} must be a number", field)

    if not math.isfinite(number) or number <= 0:
        raise ValidationError(f"{field} must be positive, got {value}", field)

    return number


def validate_non_negative(value: Any, field: str) -> float:
    """Validate a finite number >= 0."""
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{field} must be a number", field)

    if not math.isfinite(number) or number < 0:
        raise ValidationError(f"{field} must be non-negative, got {value}", field)

    return number


def validate_count(value: Any, field: str, minimum: int = 1) -> int:
    """
    Validate an integer count with a lower bound.

    Raises:
        ValidationError: If value is not an integer or is below minimum
    """
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{field} must be an integer", field)

    if isinstance(value, bool) or not number.is_integer():
        raise ValidationError(f"{field} must be an integer", field)

    count = int(number)
    if count < minimum:
        raise ValidationError(f"{field} must be at least {minimum}, got {count}", field)

    return count


def validate_open_unit(value: Any, field: str) -> float:
    """Validate a fraction strictly inside (0, 1)."""
    number = float(value)
    if not 0.0 < number < 1.0:
        raise ValidationError(f"{field} must lie in (0, 1), got {value}", field)
    return number


def validate_range(value: Any, field: str, low: float, high: float) -> float:
    """Validate low < value < high."""
    number = float(value)
    if not low < number < high:
        raise ValidationError(f"{field} must lie in ({low}, {high}), got {value}", field)
    return number


def validate_choice(value: str, field: str, choices: Sequence[str]) -> str:
    """
    Validate that a string is one of the allowed choices.

    Raises:
        ValidationError: If value is not in choices
    """
    if value not in choices:
        allowed = ", ".join(choices)
        raise ValidationError(f"{field} must be one of: {allowed} (got {value!r})", field)
    return value


def validate_poisson_ratio(nu: Any, field: str = "nu", upper: float = 0.5) -> float:
    """Validate a Poisson ratio in (0, upper)."""
    return validate_range(nu, field, 0.0, upper)
