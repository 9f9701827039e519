"""Pixel-grid helpers shared by every stage of the pipeline.

Rasters, saliency maps and masks are plain numpy arrays:

* image      -- float64, shape (H, W) or (H, W, 3), samples in [0, 1]
* saliency   -- float64, shape (H, W), values in [0, 1]
* mask       -- bool, shape (H, W)

The ``as_*`` functions validate and coerce; everything else assumes
validated input.
"""
from __future__ import annotations

import os

import numpy as np
from PIL import Image
from scipy import ndimage

__all__ = [
    "InvalidInputError",
    "as_image",
    "as_saliency",
    "as_mask",
    "normalize_map",
    "resize_bilinear",
    "connected_components",
    "fill_holes",
    "load_image",
    "load_gray",
    "load_mask",
    "save_gray",
    "save_mask",
    "save_image",
]


class InvalidInputError(ValueError):
    """Raised for malformed rasters, maps, masks or arguments."""


def as_image(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if not (arr.ndim == 2 or (arr.ndim == 3 and arr.shape[2] == 3)):
        raise InvalidInputError(f"expected (H, W) or (H, W, 3) raster, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInputError("raster is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("raster contains non-finite samples")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidInputError("raster samples must lie in [0, 1]")
    return arr


def as_saliency(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError(f"expected non-empty (H, W) saliency map, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("saliency map contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidInputError("saliency values must lie in [0, 1]")
    return arr


def as_mask(data) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise InvalidInputError(f"expected (H, W) mask, got shape {arr.shape}")
    return arr.astype(bool, copy=False)


def normalize_map(values) -> np.ndarray:
    """Affinely rescale a map to [0, 1]; a constant map becomes all zeros."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise InvalidInputError("cannot normalize an empty map")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("map contains non-finite values")
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    out = (arr - lo) / (hi - lo)
    # guard against 1 ulp overshoot from the division
    np.clip(out, 0.0, 1.0, out=out)
    return out


def resize_bilinear(values, width: int, height: int) -> np.ndarray:
    """Bilinear resize with pixel-center alignment and edge clamping.

    Parameters
    ----------
    values : array_like, shape (h, w)
    width, height : int
        Target size, both >= 1.
    """
    if width < 1 or height < 1:
        raise InvalidInputError(f"target size must be positive, got {width}x{height}")
    src = np.asarray(values, dtype=np.float64)
    if src.ndim != 2 or src.size == 0:
        raise InvalidInputError(f"expected non-empty 2-D map, got shape {src.shape}")
    h, w = src.shape
    if (h, w) == (height, width):
        return src.copy()

    def coords(n_out: int, n_in: int):
        x = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        x = np.clip(x, 0.0, n_in - 1)
        i0 = np.floor(x).astype(np.intp)
        i1 = np.minimum(i0 + 1, n_in - 1)
        return i0, i1, x - i0

    y0, y1, fy = coords(height, h)
    x0, x1, fx = coords(width, w)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bottom = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bottom * fy[:, None]
    lo, hi = src.min(), src.max()
    # interpolation is convex; clip only removes rounding noise
    np.clip(out, lo, hi, out=out)
    return out


_STRUCT = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


def connected_components(mask, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label the connected true-regions of ``mask``.

    Returns ``(labels, n)`` where background is 0 and components are
    numbered 1..n in row-major order of first appearance.
    """
    if connectivity not in _STRUCT:
        raise InvalidInputError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, n = ndimage.label(as_mask(mask), structure=_STRUCT[connectivity])
    return labels.astype(np.int64, copy=False), int(n)


def fill_holes(mask) -> np.ndarray:
    """Set every background region not 4-connected to the border to true."""
    m = as_mask(mask)
    return ndimage.binary_fill_holes(m, structure=_STRUCT[4])


# -- file I/O ---------------------------------------------------------------

def _open(path) -> Image.Image:
    path = os.fspath(path)
    try:
        img = Image.open(path)
        img.load()
    except (OSError, ValueError) as exc:
        raise OSError(f"cannot read image {path!r}: {exc}") from exc
    return img


def load_image(path) -> np.ndarray:
    """Read an 8-bit image as float samples in [0, 1]; gray stays 2-D."""
    img = _open(path)
    if img.mode in ("L", "P", "1", "I;16", "I"):
        if img.mode in ("I;16", "I"):
            raise OSError(f"cannot read image {os.fspath(path)!r}: not an 8-bit image")
        arr = np.asarray(img.convert("L"), dtype=np.float64)
    else:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def load_gray(path) -> np.ndarray:
    """Read any image as an 8-bit grayscale map scaled to [0, 1]."""
    return np.asarray(_open(path).convert("L"), dtype=np.float64) / 255.0


def load_mask(path) -> np.ndarray:
    """Read a mask image; gray value > 127 is object."""
    return np.asarray(_open(path).convert("L")) > 127


def save_gray(path, values) -> None:
    arr = np.asarray(values, dtype=np.float64)
    q = np.floor(np.clip(arr, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(q, mode="L").save(os.fspath(path), format="PNG")


def save_mask(path, mask) -> None:
    m = as_mask(mask)
    Image.fromarray(np.where(m, 255, 0).astype(np.uint8), mode="L").save(os.fspath(path), format="PNG")


def save_image(path, image) -> None:
    arr = as_image(image)
    q = np.floor(arr * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(q, mode="L" if q.ndim == 2 else "RGB").save(os.fspath(path), format="PNG")
