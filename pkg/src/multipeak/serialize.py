"""JSON interchange: rationals as ``"p/q"`` strings, sets as sorted index arrays."""

from __future__ import annotations

import datetime as _dt
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .valuation import MultiPeakValuation, as_fraction, mask, members

SCHEMA_VERSION = 1


def rat(x) -> str:
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s) -> Fraction:
    if isinstance(s, float):
        raise ValueError(f"expected a rational string, got float {s!r}")
    return Fraction(s)


def encode_set(S: int) -> list[int]:
    return members(S)


def decode_set(items) -> int:
    return mask(int(i) for i in items)


def valuation_to_dict(v: MultiPeakValuation) -> dict:
    return {
        "m": v.m,
        "a": rat(v.a),
        "b": rat(v.b),
        "support": None if v.support is None else encode_set(v.support),
        "peaks": [encode_set(p) for p in v.peaks],
    }


def valuation_from_dict(d: dict) -> MultiPeakValuation:
    try:
        sup = d.get("support")
        return MultiPeakValuation(
            int(d["m"]),
            tuple(decode_set(p) for p in d["peaks"]),
            parse_rat(d["a"]),
            parse_rat(d["b"]),
            None if sup is None else decode_set(sup),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed valuation document: {exc}") from exc


def _default(obj):
    if isinstance(obj, Fraction):
        return rat(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_default) + "\n"


def write_document(path, kind: str, body: dict, timestamp: bool = True) -> Path:
    doc: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "kind": kind, **body}
    if timestamp:
        doc["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    path = Path(path)
    path.write_text(dumps(doc))
    return path


def read_document(path, kind: str | None = None) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: top-level JSON value must be an object")
    if kind is not None and doc.get("kind", kind) != kind:
        raise ValueError(f"{path}: expected a {kind} document, found {doc.get('kind')}")
    return doc
