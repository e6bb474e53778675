"""
Output formatting utilities.
Provides deterministic number formatting for artifacts and readable tables for the terminal.
"""
from typing import Iterable, List, Sequence
from utils.constants import FLOAT_DIGITS


def format_float(value: float) -> str:
    """
    Format a float with 17 significant digits.

    Seventeen digits round-trip every IEEE double, which makes two runs
    with identical inputs produce byte-identical files.

    Args:
        value: Number to format

    Returns:
        Formatted string
    """
    return f"{float(value):.{FLOAT_DIGITS}g}"


def format_cell(value) -> str:
    """Format a table cell: floats with full precision, everything else via str."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, "dtype") and getattr(value, "shape", None) == ():
        return format_cell(value.item())
    return str(value)


def format_header_comment(config_hash: str, title: str = "") -> str:
    """Single-line provenance header embedded in every artifact."""
    suffix = f" {title}" if title else ""
    return f"config-hash: {config_hash}{suffix}"


def format_duration(seconds: float) -> str:
    """Format wall time for log lines."""
    if seconds < 1.0:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 120.0:
        return f"{seconds:.2f} s"
    return f"{seconds / 60:.1f} min"


def format_check_table(rows: Iterable[Sequence]) -> str:
    """
    Format validation results as an aligned PASS/FAIL table.

    Args:
        rows: (suite, check, passed, value, threshold) tuples

    Returns:
        Multi-line table string
    """
    lines: List[List[str]] = [["suite", "check", "status", "value", "threshold"]]
    for suite, check, passed, value, threshold in rows:
        lines.append([
            suite,
            check,
            "PASS" if passed else "FAIL",
            f"{value:.6g}" if isinstance(value, float) else str(value),
            f"{threshold:.6g}" if isinstance(threshold, float) else str(threshold),
        ])

    widths = [max(len(line[i]) for line in lines) for i in range(5)]
    rendered = []
    for index, line in enumerate(lines):
        rendered.append("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
        if index == 0:
            rendered.append("  ".join("-" * width for width in widths))
    return "\n".join(rendered)
