"""Reading and writing of 8-bit grayscale images.

Binary PGM (P5) is the normative interchange format; PNG is accepted and
written through Pillow. Deeper-than-8-bit PGMs are normalized to 8 bits on
ingestion.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import BitMask, GrayImage
from .errors import MalformedFileError

MASK_THRESHOLD = 128  # intensity at or above which a mask pixel counts as set


def _read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise MalformedFileError(f"{path}: not a binary PGM (P5) file")

    # header: magic, width, height, maxval; '#' comments allowed between tokens
    tokens: list[int] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            if eol == -1:
                raise MalformedFileError(f"{path}: unterminated comment")
            pos = eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MalformedFileError(f"{path}: truncated header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError as exc:
            raise MalformedFileError(f"{path}: bad header token") from exc
    pos += 1  # single whitespace after maxval

    width, height, maxval = tokens
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise MalformedFileError(f"{path}: invalid dimensions or maxval")
    bytes_per = 1 if maxval < 256 else 2
    need = width * height * bytes_per
    raster = data[pos:pos + need]
    if len(raster) != need:
        raise MalformedFileError(
            f"{path}: truncated raster ({len(raster)} of {need} bytes)"
        )
    dtype = np.uint8 if bytes_per == 1 else ">u2"
    arr = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    if maxval != 255:
        arr = np.rint(arr.astype(np.float64) * (255.0 / maxval)).astype(np.uint8)
    return arr.astype(np.uint8)


def read_image(path) -> GrayImage:
    """Load a PGM or PNG file as an 8-bit grayscale image."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    if path.lower().endswith(".pgm"):
        return GrayImage(_read_pgm(path))
    try:
        with Image.open(path) as im:
            return GrayImage(np.asarray(im.convert("L")))
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedFileError(f"{path}: {exc}") from exc


def read_mask(path) -> BitMask:
    """Load a mask image; intensities >= 128 become set bits."""
    img = read_image(path)
    return BitMask((img.pixels >= MASK_THRESHOLD).astype(np.uint8))


def write_pgm(path, pixels: np.ndarray) -> None:
    arr = np.asarray(pixels, dtype=np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


def write_image(path, image) -> None:
    """Write a GrayImage (or uint8 array) as PGM or PNG by extension."""
    pixels = image.pixels if isinstance(image, GrayImage) else np.asarray(image, np.uint8)
    path = os.fspath(path)
    if path.lower().endswith(".pgm"):
        write_pgm(path, pixels)
    else:
        Image.fromarray(pixels, mode="L").save(path)


def write_mask(path, mask: BitMask) -> None:
    write_image(path, mask.bits * np.uint8(255))
