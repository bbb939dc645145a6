"""
Output helpers shared by CSV, JSON and manifest writers.
"""

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

SIGNIFICANT_DIGITS = 9


def format_number(value):
    """Nine significant digits, '.' as decimal separator regardless of locale."""
    value = float(value)
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    if value == 0.0:
        value = 0.0  # drop the sign of -0.0
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def rounded(value):
    """Numbers for JSON payloads: rounded to nine significant digits, inf as a string."""
    if isinstance(value, dict):
        return {k: rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [rounded(v) for v in value]
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    if math.isinf(value):
        return format_number(value)
    return float(format_number(value))


def to_json(payload):
    return json.dumps(rounded(payload), indent=2, sort_keys=True) + "\n"


def write_atomic(path, text):
    """Write `text` to `path` through a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path
