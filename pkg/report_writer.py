"""Deterministic JSON and CSV rendering of analysis reports.

Floats are always written with 17 significant digits so identical runs give
byte-identical files; complex numbers become [re, im].
"""

import csv
import io
import json
import logging
import math
import re
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

_FLOAT_TOKEN = "@@f17:{}@@"
_FLOAT_PATTERN = re.compile(r'"@@f17:([^"@]+)@@"')


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def normalize(obj: Any) -> Any:
    """Plain JSON-ready structure: dicts, lists, str, int, bool, None and float."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [normalize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_dict"):
        return normalize(obj.as_dict())
    raise TypeError(f"Cannot serialize {type(obj).__name__} in a report")


def _tokenize(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _tokenize(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_tokenize(v) for v in obj]
    if isinstance(obj, float):
        return _FLOAT_TOKEN.format(format_float(obj))
    return obj


def to_json(report: Any) -> str:
    text = json.dumps(_tokenize(normalize(report)), indent=2, ensure_ascii=False)
    return _FLOAT_PATTERN.sub(lambda m: m.group(1), text) + "\n"


def _flatten(obj: Any, prefix: str = "") -> Iterator[Tuple[str, Any]]:
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list):
        if not obj:
            yield prefix, "[]"
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}" if prefix else str(i))
    else:
        yield prefix, obj


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def to_csv(report: Any) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["path", "value"])
    for path, value in _flatten(normalize(report)):
        writer.writerow([path, _cell(value)])
    return buffer.getvalue()


def render(report: Any, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    raise ValueError(f"Unknown report format {fmt!r}")


def write_report(report: Any, path: Optional[str], fmt: str = "json") -> str:
    text = render(report, fmt)
    if path:
        Path(path).write_text(text)
        logger.info(f"Report written to {path} ({fmt})")
    return text
