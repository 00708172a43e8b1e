"""Binary-mask and bounding-box geometry.

Masks are 2D boolean numpy arrays (row-major, shape ``(h, w)``). Sizes and
resolutions are ``(width, height)`` tuples to match image metadata
conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

# Padded zoom level must cover at least this fraction of each image side.
PADDING_FRACTION_NUM = 3
PADDING_FRACTION_DEN = 20  # 3/20 = 15%

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


class MaskShapeError(ValueError):
    """Masks have incompatible dimensions for the requested operation."""


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box; ``(x, y)`` is the top-left corner."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"degenerate box: {self}")

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    def contains(self, other: "BoundingBox") -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and other.x2 <= self.x2
            and other.y2 <= self.y2
        )


def bbox_intersects(a: BoundingBox, b: BoundingBox) -> bool:
    """True iff the boxes share at least one pixel.

    Sound as a pre-filter: masks inside disjoint boxes cannot intersect.
    """
    return a.x < b.x2 and b.x < a.x2 and a.y < b.y2 and b.y < a.y2


def scale_box(box: BoundingBox, from_size: tuple[int, int], to_size: tuple[int, int]) -> BoundingBox:
    """Rescale a box between resolutions, keeping at least 1px per side."""
    fw, fh = from_size
    tw, th = to_size
    x = int(math.floor(box.x * tw / fw))
    y = int(math.floor(box.y * th / fh))
    x2 = int(math.ceil(box.x2 * tw / fw))
    y2 = int(math.ceil(box.y2 * th / fh))
    return BoundingBox(x, y, max(1, x2 - x), max(1, y2 - y))


@dataclass(frozen=True)
class ZoomCrops:
    """The three zoom levels around an edit region: tight ⊆ padded ⊆ full."""

    tight: BoundingBox
    padded: BoundingBox
    full: BoundingBox

    def __post_init__(self):
        if not (self.full.contains(self.padded) and self.padded.contains(self.tight)):
            raise ValueError("zoom crops must nest: tight ⊆ padded ⊆ full")


def binarize(arr: np.ndarray, threshold: int = 127) -> np.ndarray:
    """Grayscale array -> boolean mask (foreground where value > threshold)."""
    return np.asarray(arr) > threshold


def load_mask(path: str | Path, threshold: int = 127) -> np.ndarray:
    """Read a mask PNG as a boolean array, binarized at > threshold."""
    with Image.open(path) as im:
        return binarize(np.asarray(im.convert("L")), threshold)


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(path)


def load_image(path: str | Path) -> np.ndarray:
    """Read an image as an (h, w, 3) uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def mask_size(mask: np.ndarray) -> tuple[int, int]:
    h, w = mask.shape
    return (w, h)


def bboxes_from_mask(mask: np.ndarray) -> list[BoundingBox]:
    """One box per 8-connected foreground component, largest box area first.

    Ties break on (y, x) for determinism. Empty mask -> empty list.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        raise MaskShapeError("empty raster")
    labeled, count = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    boxes = []
    for sl in ndimage.find_objects(labeled):
        if sl is None:
            continue
        ys, xs = sl
        boxes.append(
            BoundingBox(x=xs.start, y=ys.start, w=xs.stop - xs.start, h=ys.stop - ys.start)
        )
    boxes.sort(key=lambda b: (-b.area, b.y, b.x))
    return boxes


def intersection_ratio(object_mask: np.ndarray, edit_mask: np.ndarray) -> float:
    """|object ∩ edit| / |object|; 0.0 for an empty object mask."""
    object_mask = np.asarray(object_mask, dtype=bool)
    edit_mask = np.asarray(edit_mask, dtype=bool)
    if object_mask.shape != edit_mask.shape:
        raise MaskShapeError(
            f"mask shapes differ: {object_mask.shape} vs {edit_mask.shape}"
        )
    denom = int(object_mask.sum())
    if denom == 0:
        return 0.0
    return int((object_mask & edit_mask).sum()) / denom


def _padded_span(lo: int, size: int, image_side: int) -> tuple[int, int]:
    # Desired side: max(2x the tight side, 15% of the image side), grown
    # symmetrically about the box center, then clamped by intersection with
    # the image (never shifted, so the tight box stays inside).
    min_side = -(-PADDING_FRACTION_NUM * image_side // PADDING_FRACTION_DEN)
    desired = max(2 * size, min_side)
    grow = desired - size
    new_lo = lo - grow // 2
    new_hi = lo + size + (grow - grow // 2)
    new_lo = max(new_lo, 0)
    new_hi = min(new_hi, image_side)
    return new_lo, new_hi - new_lo


def zoom_crops(image: np.ndarray, box: BoundingBox) -> ZoomCrops:
    """Tight, padded, and full crop regions around ``box``.

    Raises ``ValueError`` when the box lies outside the image.
    """
    h, w = image.shape[:2]
    full = BoundingBox(0, 0, w, h)
    if not full.contains(box):
        raise ValueError(f"box {box} outside {w}x{h} image")
    px, pw = _padded_span(box.x, box.w, w)
    py, ph = _padded_span(box.y, box.h, h)
    return ZoomCrops(tight=box, padded=BoundingBox(px, py, pw, ph), full=full)


def crop(image: np.ndarray, box: BoundingBox) -> np.ndarray:
    return image[box.y : box.y2, box.x : box.x2]


def resample_mask(mask: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbor resample to ``(width, height)``.

    Resampling to the mask's own size returns a bit-identical copy; output
    stays binary by construction.
    """
    tw, th = target
    if tw <= 0 or th <= 0:
        raise ValueError(f"target dimensions must be positive: {target}")
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    if (w, h) == (tw, th):
        return mask.copy()
    ys = np.minimum(((np.arange(th) + 0.5) * h / th).astype(int), h - 1)
    xs = np.minimum(((np.arange(tw) + 0.5) * w / tw).astype(int), w - 1)
    return mask[np.ix_(ys, xs)]


def rle_decode(counts: list[int], size: tuple[int, int]) -> np.ndarray:
    """Decode uncompressed row-major run lengths (background run first)."""
    w, h = size
    total = w * h
    if sum(counts) != total:
        raise ValueError(f"RLE counts sum to {sum(counts)}, expected {total}")
    flat = np.zeros(total, dtype=bool)
    pos = 0
    value = False
    for run in counts:
        if run < 0:
            raise ValueError("negative run length")
        if value:
            flat[pos : pos + run] = True
        pos += run
        value = not value
    return flat.reshape(h, w)


def rle_encode(mask: np.ndarray) -> list[int]:
    """Inverse of :func:`rle_decode`; first count covers background."""
    flat = np.asarray(mask, dtype=bool).ravel()
    counts: list[int] = []
    value = False
    run = 0
    for bit in flat:
        if bit == value:
            run += 1
        else:
            counts.append(run)
            value = bool(bit)
            run = 1
    counts.append(run)
    return counts
