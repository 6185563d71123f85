"""Deterministic table and manifest serialization.

CSV: RFC-4180, comma-separated, one header row, '.' decimal separator,
floats at 17 significant digits ('%.17g'), '\r\n' line endings.  JSON:
UTF-8, sorted keys, newline-terminated.  No timestamps anywhere, so byte
identity across reruns is the normal case.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

__all__ = ["format_cell", "write_csv", "write_json", "read_csv"]


def format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, dialect="excel")  # RFC-4180 quoting, CRLF endings
        w.writerow(header)
        for row in rows:
            w.writerow([format_cell(v) for v in row])


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        r = csv.reader(f)
        rows = list(r)
    return rows[0], rows[1:]
