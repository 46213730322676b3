"""Output - CSV tables and JSON-lines trial logs."""

import csv
import io
import json
import logging
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

# Significant digits for floats in CSV cells
FLOAT_DIGITS = 10


def format_value(value: Any) -> str:
    """Render one CSV cell: floats to 10 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{FLOAT_DIGITS}g}"
    return str(value)


def render_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str] | None = None) -> str:
    """Header row plus one line per row, comma-separated, LF line endings."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in columns])
    return buffer.getvalue()


def write_csv(
    rows: Sequence[dict[str, Any]],
    path: Path | None = None,
    columns: Sequence[str] | None = None,
) -> None:
    """Write rows to path, or to stdout when path is None."""
    text = render_csv(rows, columns)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("Wrote %d rows to %s", len(rows), path)


def write_json_lines(records: Iterable[dict[str, Any]], path: Path) -> int:
    """Write one JSON object per line; returns the record count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True))
            f.write("\n")
            count += 1
    logger.info("Wrote %d trial records to %s", count, path)
    return count
