"""Image decode/encode, center-cropping, and the four color-coding modes.

Gray conversion uses the unweighted channel mean with round-half-up.
Because (R+G+B)/3 can never land exactly on .5, this equals ordinary
rounding and is computed in integers: v = (R+G+B+1) // 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError


class ColorMode(str, Enum):
    GRAY = "gray"
    GREEN = "green"
    RED = "red"
    INTACT = "intact"


@dataclass(frozen=True)
class RgbImage:
    """An (H, W, 3) uint8 pixel grid, row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if not isinstance(p, np.ndarray) or p.ndim != 3 or p.shape[2] != 3:
            raise ValueError(f"pixels must be (H, W, 3), got {getattr(p, 'shape', None)}")
        if p.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {p.dtype}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("image must be at least 1x1")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def load_image(path) -> RgbImage:
    """Decode a PNG or JPEG; single-channel input is replicated to RGB."""
    try:
        with Image.open(path) as decoded:
            decoded.load()
            if decoded.mode != "RGB":
                decoded = decoded.convert("RGB")
            pixels = np.asarray(decoded, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError) as exc:
        raise FormatError(f"cannot decode image {path}: {exc}") from exc
    return RgbImage(np.ascontiguousarray(pixels))


def save_image(image: RgbImage, path) -> None:
    """Write as PNG (lossless; save-then-load round-trips bit-exactly)."""
    Image.fromarray(image.pixels, mode="RGB").save(Path(path))


def center_crop(image: RgbImage, size: int) -> RgbImage:
    """The size x size region around the image center (floor offsets)."""
    if size < 1:
        raise ValueError("crop size must be positive")
    if size > min(image.height, image.width):
        raise ValueError(
            f"crop size {size} exceeds image extent "
            f"{image.width}x{image.height}"
        )
    top = (image.height - size) // 2
    left = (image.width - size) // 2
    return RgbImage(
        np.ascontiguousarray(image.pixels[top : top + size, left : left + size])
    )


def colorize(image: RgbImage, mode: ColorMode) -> RgbImage:
    """Apply one of the four color codings; intact is the identity."""
    mode = ColorMode(mode)
    if mode is ColorMode.INTACT:
        return RgbImage(image.pixels.copy())
    sums = image.pixels.astype(np.int32).sum(axis=2)
    value = ((sums + 1) // 3).astype(np.uint8)
    out = np.zeros_like(image.pixels)
    if mode is ColorMode.GRAY:
        out[:] = value[..., None]
    elif mode is ColorMode.GREEN:
        out[..., 1] = value
    else:
        out[..., 0] = value
    return RgbImage(out)


def partition(ids: Sequence[str], group_count: int, seed: int) -> List[List[str]]:
    """Seeded shuffle of ids split into near-equal groups (sizes differ by
    at most one; exact when divisible)."""
    if group_count < 1:
        raise ValueError("group_count must be positive")
    items = list(ids)
    order = np.random.default_rng(seed).permutation(len(items))
    shuffled = [items[i] for i in order]
    base, extra = divmod(len(items), group_count)
    groups: List[List[str]] = []
    start = 0
    for g in range(group_count):
        size = base + (1 if g < extra else 0)
        groups.append(shuffled[start : start + size])
        start += size
    return groups
