"""Canonical JSON emission.

All machine-readable artifacts (differentials, reports, codices) are emitted
through :func:`dumps_canonical` so that identical inputs always produce
byte-identical text: dict insertion order is preserved, arrays stay in
declaration order, and every float is rendered with 9 significant digits.
"""

from __future__ import annotations

import json
from typing import Any


def format_float(x: float) -> str:
    """Render a float with 9 significant digits (stable across runs)."""
    if x != x:
        raise ValueError("NaN is not serializable")
    # ".9g" may emit bare integers ("1") or exponents ("1e-05"); both are
    # valid JSON numbers.
    return format(x, ".9g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    closing_pad = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key, value in obj.items():
            encoded_key = json.dumps(str(key), ensure_ascii=False)
            items.append(f"{pad}{encoded_key}: {_encode(value, indent, level + 1)}")
        return "{\n" + ",\n".join(items) + "\n" + closing_pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_encode(value, indent, level + 1)}" for value in obj]
        return "[\n" + ",\n".join(items) + "\n" + closing_pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj: Any, indent: int = 2) -> str:
    """Serialize ``obj`` to canonical JSON text (trailing newline included)."""
    return _encode(obj, indent, 0) + "\n"
