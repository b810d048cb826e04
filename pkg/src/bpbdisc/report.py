"""JSON reports with a schema version and sanitised numbers."""

from __future__ import annotations

import datetime as _dt
import json
import math

import numpy as np

SCHEMA_VERSION = "1.0"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def envelope(kind: str, body: dict, timestamp: str | None = None) -> dict:
    """Wrap a report body; the timestamp is the only non-deterministic field."""
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "generated_at": timestamp, **_clean(body)}


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write(path, report: dict) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(report))
