"""Reader for ``.dfn`` experiment files.

The body before the first section header is the defining function (with its
``param``/``let``/``dim`` header lines). Optional sections follow::

    [anchor]
    point = 0.1, 0, ?

    [upsilon]
    kind = example2
    a = 0.8
    b = auto
    Y[1,1] = ...

A ``?`` coordinate in a point is left free; projection onto the boundary then
moves only along the imaginary axis of that coordinate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .expr import DefiningFunction, DslSyntaxError, eval_value, parse_defining_function, parse_expression

_SECTION_RE = re.compile(r"\s*\[([A-Za-z_]+)\]\s*(#.*)?\Z")
_ENTRY_RE = re.compile(r"Y\s*\[\s*(\d+)\s*,\s*(\d+)\s*\]\s*=\s*(.*)\Z")
_KEY_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)\Z")
SECTIONS = ("anchor", "upsilon")


@dataclass
class UpsilonSpec:
    keys: dict[str, str] = field(default_factory=dict)
    entries: dict[tuple[int, int], str] = field(default_factory=dict)
    lets: str = ""


@dataclass
class DfnFile:
    function: DefiningFunction
    text: str
    anchor: str | None = None
    upsilon: UpsilonSpec | None = None
    path: str | None = None


@dataclass(frozen=True)
class PointSpec:
    """A point with optional free coordinates (written ``?``)."""

    values: np.ndarray
    free: tuple[int, ...]

    def direction(self) -> np.ndarray | None:
        if not self.free:
            return None
        d = np.zeros(self.values.size, dtype=complex)
        d[self.free[0]] = 1j
        return d


def parse_point(text: str, n: int, params: Mapping[str, float] | None = None) -> PointSpec:
    """Comma-separated complex coordinates, each a constant DSL expression or ``?``."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise ValueError(f"point has {len(parts)} coordinates, expected {n}")
    vals = np.zeros(n, dtype=complex)
    free = []
    for k, p in enumerate(parts):
        if p in ("?", "·"):
            free.append(k)
            continue
        node = parse_expression(p, params or {})
        vals[k] = eval_value(node, np.zeros((1, 1), dtype=complex), params or {})[0]
    if len(free) > 1:
        raise ValueError("at most one coordinate may be left free")
    return PointSpec(vals, tuple(free))


def _split_sections(text: str) -> tuple[list[str], dict[str, list[tuple[int, str]]]]:
    body: list[str] = []
    sections: dict[str, list[tuple[int, str]]] = {}
    current: list[tuple[int, str]] | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            name = m.group(1).lower()
            if name not in SECTIONS:
                raise DslSyntaxError(f"unknown section [{name}]", lineno, line.index("[") + 1)
            if name in sections:
                raise DslSyntaxError(f"duplicate section [{name}]", lineno, 1)
            current = sections[name] = []
            continue
        if current is None:
            body.append(line)
        else:
            current.append((lineno, line))
    # sections follow the body, so body line numbers are unchanged
    return body, sections


def _upsilon_section(lines: list[tuple[int, str]]) -> UpsilonSpec:
    spec = UpsilonSpec()
    lets = []
    for lineno, raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("let "):
            lets.append(line)
            continue
        m = _ENTRY_RE.match(line)
        if m:
            k, j = int(m.group(1)), int(m.group(2))
            if (k, j) in spec.entries:
                raise DslSyntaxError(f"entry Y[{k},{j}] given twice", lineno, 1)
            spec.entries[(k, j)] = m.group(3)
            continue
        m = _KEY_RE.match(line)
        if not m:
            raise DslSyntaxError(f"cannot read line {line!r}", lineno, 1)
        spec.keys[m.group(1)] = m.group(2).strip()
    spec.lets = "\n".join(lets)
    return spec


def _anchor_section(lines: list[tuple[int, str]]) -> str | None:
    point = None
    for lineno, raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _KEY_RE.match(line)
        if not m or m.group(1) != "point":
            raise DslSyntaxError("the [anchor] section takes a single 'point = ...' line", lineno, 1)
        point = m.group(2).strip()
    return point


def loads(text: str, params: Mapping[str, float] | None = None) -> DfnFile:
    body, sections = _split_sections(text)
    f = parse_defining_function("\n".join(body), params)
    out = DfnFile(f, text)
    if "anchor" in sections:
        out.anchor = _anchor_section(sections["anchor"])
    if "upsilon" in sections:
        out.upsilon = _upsilon_section(sections["upsilon"])
    return out


def load(path: str | Path, params: Mapping[str, float] | None = None) -> DfnFile:
    text = Path(path).read_text(encoding="utf-8")
    out = loads(text, params)
    out.path = str(path)
    return out
