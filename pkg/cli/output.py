"""
Output helpers: human text on stdout, or one JSON document with --json.
"""

import json
from dataclasses import asdict, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable

import numpy as np


def _json_default(value: Any):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    if is_dataclass(value):
        return asdict(value)
    return str(value)


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, default=_json_default)


def emit(ctx, text: Any, data: Any = None):
    """Print ``text`` (a string or lines), or ``data`` as JSON when --json is set"""
    if ctx.json and data is not None:
        print(to_json(data))
        return
    if isinstance(text, str):
        print(text)
    else:
        for line in text:
            print(line)


def fmt(value: Any) -> str:
    """Human rendering of numbers and booleans"""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def key_values(pairs: Iterable) -> list:
    return [f"{key}: {fmt(value)}" for key, value in pairs]
