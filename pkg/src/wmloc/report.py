"""Byte-stable number formatting and CSV/JSON emitters."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

SIG_DIGITS = 12


def format_number(x: float) -> str:
    """12 significant digits; plain notation for ``1e-4 <= |x| < 1e6``, else ``e`` notation."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    ax = abs(x)
    # round first so values like 9.99999999999995e-5 land on the right side of the cut
    rounded = float(f"{x:.{SIG_DIGITS - 1}e}")
    ax = abs(rounded)
    if 1e-4 <= ax < 1e6:
        return f"{rounded:.{SIG_DIGITS}g}"
    mantissa, exp = f"{rounded:.{SIG_DIGITS - 1}e}".split("e")
    if "." in mantissa:
        mantissa = mantissa.rstrip("0").rstrip(".")
    return f"{mantissa}e{exp}"


def round_sig(x: float | None) -> float | None:
    """Round to the same 12 significant digits used for text output."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return None
    return float(format_number(x))


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return format_number(value)
    return str(value)


def to_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]], note: str = "") -> str:
    buf = io.StringIO()
    if note:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def clean(obj: Any) -> Any:
    """Recursively round floats and map NaN to ``None`` for JSON output."""
    if isinstance(obj, dict):
        return {k: clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float) or hasattr(obj, "__float__"):
        return round_sig(float(obj))
    return obj


def to_json(obj: Any) -> str:
    return json.dumps(clean(obj), indent=2, allow_nan=False) + "\n"
