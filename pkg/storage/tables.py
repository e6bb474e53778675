"""
CSV tables with a provenance comment and round-trip float formatting.
"""
import csv
import io
from typing import Iterable, List, Mapping, Sequence
from utils.formatters import format_cell, format_header_comment


def format_csv(rows: Iterable[Mapping], columns: Sequence[str], config_hash: str, title: str = "") -> str:
    """
    RFC-4180 CSV: a '# config-hash: ...' line, a header row, then one row per mapping.

    Column order is fixed by columns so identical inputs give identical bytes.
    """
    buffer = io.StringIO()
    buffer.write(f"# {format_header_comment(config_hash, title)}\r\n")
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row[column]) for column in columns])
    return buffer.getvalue()


def parse_csv(text: str) -> List[dict]:
    """Rows of a table written by format_csv as {column: text}; comment lines are skipped."""
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


def header_hash(text: str) -> str:
    """Config hash from the first line of an artifact, '' when absent."""
    first = text.splitlines()[0] if text else ""
    marker = "config-hash:"
    if marker not in first:
        return ""
    return first.split(marker, 1)[1].split()[0]
