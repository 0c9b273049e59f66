"""JSON serialization for CLI reports.

Floats are written with 17 significant digits so they round-trip exactly.
Infinite values and non-numeric verdicts are written as the strings "inf",
"-inf", "trivial" and "infeasible"; complex numbers become ``[re, im]``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import fields, is_dataclass
from importlib import resources
from typing import Any

import numpy as np

from .conditions import ConditionVerdict, Interval, VerdictKind

SCHEMA_VERSION = "1.0"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        return "0.0"  # drops the sign of -0.0
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def verdict_json(v: ConditionVerdict) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": v.kind.value}
    if v.kind is VerdictKind.HOLDS:
        out["value"] = v.value
    elif v.kind in (VerdictKind.TRIVIAL, VerdictKind.INFEASIBLE):
        out["value"] = v.kind.value
    else:
        out["value"] = None
        out["witness"] = dict(v.witness)
    return out


def to_plain(obj: Any) -> Any:
    """Convert library objects into JSON-ready values (floats kept as floats)."""
    if isinstance(obj, ConditionVerdict):
        return to_plain(verdict_json(obj))
    if isinstance(obj, Interval):
        return {"lo": obj.lo, "hi": obj.hi, "empty": obj.empty}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if is_dataclass(obj):
        return {f.name: to_plain(getattr(obj, f.name)) for f in fields(obj)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj: Any, indent: int, level: int, out: list[str]):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (list, dict)) for v in obj):
            # short numeric rows stay on one line
            parts: list[str] = []
            for v in obj:
                _emit(v, indent, level + 1, parts)
            out.append("[" + ", ".join(parts) + "]")
        else:
            out.append("[\n")
            for i, v in enumerate(obj):
                out.append(pad)
                _emit(v, indent, level + 1, out)
                out.append(",\n" if i < len(obj) - 1 else "\n")
            out.append(end + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k, ensure_ascii=False) + ": ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    out: list[str] = []
    _emit(to_plain(obj), indent, 0, out)
    return "".join(out) + "\n"


def load_schema() -> dict:
    text = resources.files("levimax").joinpath("data/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
