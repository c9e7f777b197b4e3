"""Image file I/O: 8-bit PNG and binary PPM in, PNG out.

Pixels cross this boundary as 8-bit; everything inside the engine is float.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .raster import RasterError, RasterImage

_PIL_MODES = {"L": 1, "RGB": 3, "RGBA": 4}


def image_from_bytes(blob: bytes, name: str = "<bytes>") -> RasterImage:
    """Decode a PNG or PPM (P6) byte string."""
    if blob[:2] == b"P6":
        return _parse_ppm(blob, name)
    try:
        with Image.open(io.BytesIO(blob)) as pil:
            if pil.format != "PNG":
                raise RasterError(f"{name}: unsupported format {pil.format!r} (PNG or PPM only)")
            if pil.mode not in _PIL_MODES:
                pil = pil.convert("RGBA" if "A" in pil.mode or pil.mode == "P" else "RGB")
            arr = np.asarray(pil, dtype=np.float64) / 255.0
    except RasterError:
        raise
    except Exception as exc:
        raise RasterError(f"{name}: cannot decode image ({exc})") from exc
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    return RasterImage(arr)


def load_image(path: str) -> RasterImage:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise RasterError(f"cannot read image file {path}: {exc}") from exc
    return image_from_bytes(blob, name=path)


def _parse_ppm(blob: bytes, name: str) -> RasterImage:
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        token = blob[start:pos]
        if not token.isdigit():
            raise RasterError(f"{name}: malformed PPM header token {token!r}")
        fields.append(int(token))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise RasterError(f"{name}: only 8-bit PPM supported (maxval 255), got {maxval}")
    expected = width * height * 3
    raster = blob[pos : pos + expected]
    if len(raster) != expected:
        raise RasterError(f"{name}: truncated PPM raster ({len(raster)} of {expected} bytes)")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return RasterImage(arr.astype(np.float64) / 255.0)


def to_uint8(image: RasterImage) -> np.ndarray:
    return np.floor(image.data * 255.0 + 0.5).astype(np.uint8)


def png_bytes(image: RasterImage) -> bytes:
    arr = to_uint8(image)
    if image.channels == 1:
        pil = Image.fromarray(arr[:, :, 0], mode="L")
    elif image.channels == 3:
        pil = Image.fromarray(arr, mode="RGB")
    else:
        pil = Image.fromarray(arr, mode="RGBA")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def save_png(image: RasterImage, path: str):
    try:
        with open(path, "wb") as fh:
            fh.write(png_bytes(image))
    except OSError as exc:
        raise RasterError(f"cannot write image file {path}: {exc}") from exc


def ppm_bytes(image: RasterImage) -> bytes:
    """Encode as binary PPM; handy for hand-checkable fixtures."""
    arr = to_uint8(image)
    if image.channels == 1:
        arr = np.repeat(arr, 3, axis=2)
    elif image.channels == 4:
        arr = arr[:, :, :3]
    header = f"P6\n{image.width} {image.height}\n255\n".encode()
    return header + arr.tobytes()
