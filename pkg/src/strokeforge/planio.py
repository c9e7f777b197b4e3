"""Stroke-plan JSON codec.

Versioned schema carrying the full stroke sequence across processes:

    {"version": 1,
     "image": {"w": 64, "h": 48},
     "strokes": [{"x":..., "y":..., "theta":..., "len":..., "thick":...,
                  "size":..., "rgba":[...], "texture":"solid",
                  "weight":..., "priority":...}, ...]}

Numbers are emitted with 17 significant digits so parse(serialize(p))
reproduces every float bit-exactly, and the byte stream is canonical
(fixed key order, fixed layout) so identical plans hash identically.
"""

from __future__ import annotations

import json
import math

from .raster import RasterError
from .strokes import TEXTURES, Stroke

PLAN_VERSION = 1


class PlanFormatError(RasterError):
    """Malformed or unsupported stroke-plan document."""


def _num(value: float) -> str:
    if not math.isfinite(value):
        raise PlanFormatError(f"non-finite value {value!r} cannot be serialized")
    return format(float(value), ".17g")


def serialize_plan(strokes: list[Stroke], dims: tuple[int, int]) -> bytes:
    """Canonical plan document for the given image dimensions."""
    width, height = dims
    lines = [f'{{"version":{PLAN_VERSION},"image":{{"w":{int(width)},"h":{int(height)}}},"strokes":[']
    body = []
    for s in strokes:
        rgba = ",".join(_num(c) for c in s.color)
        body.append(
            "{"
            + f'"x":{_num(s.x)},"y":{_num(s.y)},"theta":{_num(s.orientation)},'
            + f'"len":{_num(s.length)},"thick":{_num(s.thickness)},"size":{_num(s.size)},'
            + f'"rgba":[{rgba}],"texture":{json.dumps(s.texture)},'
            + f'"weight":{_num(s.weight)},"priority":{_num(s.priority)}'
            + "}"
        )
    lines.append(",\n".join(body))
    lines.append("]}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _require(condition: bool, message: str):
    if not condition:
        raise PlanFormatError(message)


def parse_plan(blob: bytes | str) -> tuple[list[Stroke], tuple[int, int]]:
    """Parse a plan document back into strokes and image dimensions."""
    if isinstance(blob, bytes):
        blob = blob.decode("utf-8")
    try:
        doc = json.loads(blob)
    except json.JSONDecodeError as exc:
        raise PlanFormatError(f"invalid plan JSON: {exc}") from exc
    _require(isinstance(doc, dict), "plan document must be a JSON object")
    version = doc.get("version")
    if version != PLAN_VERSION:
        raise PlanFormatError(f"unsupported plan version {version!r} (expected {PLAN_VERSION})")
    image = doc.get("image")
    _require(
        isinstance(image, dict)
        and isinstance(image.get("w"), int)
        and isinstance(image.get("h"), int),
        "plan image dimensions must be integers",
    )
    raw = doc.get("strokes")
    _require(isinstance(raw, list), "plan strokes must be a list")
    strokes = []
    for i, entry in enumerate(raw):
        _require(isinstance(entry, dict), f"stroke {i} must be an object")
        try:
            rgba = entry["rgba"]
            _require(
                isinstance(rgba, list) and len(rgba) == 4, f"stroke {i}: rgba must have 4 entries"
            )
            texture = entry["texture"]
            _require(texture in TEXTURES, f"stroke {i}: unknown texture {texture!r}")
            strokes.append(
                Stroke(
                    x=float(entry["x"]),
                    y=float(entry["y"]),
                    orientation=float(entry["theta"]),
                    length=float(entry["len"]),
                    thickness=float(entry["thick"]),
                    size=float(entry["size"]),
                    color=tuple(float(c) for c in rgba),
                    texture=texture,
                    weight=float(entry["weight"]),
                    priority=float(entry["priority"]),
                )
            )
        except KeyError as exc:
            raise PlanFormatError(f"stroke {i}: missing field {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise PlanFormatError(f"stroke {i}: {exc}") from exc
    return strokes, (image["w"], image["h"])
