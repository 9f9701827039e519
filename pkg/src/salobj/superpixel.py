"""Graph-based superpixel segmentation (Felzenszwalb & Huttenlocher 2004).

The grid graph uses the 8-neighbourhood; edge weights are Euclidean
distances between Gaussian-smoothed pixels on the 0-255 intensity scale,
so ``k`` has the same meaning as in the reference C++ implementation.

The union-find merge loop runs in a compiled Cython kernel when it was
built, and in a pure-Python loop otherwise.  Set ``SALOBJ_BACKEND=python``
to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from . import _fh_py
from .raster import InvalidInputError, as_image, as_mask

try:
    from . import _fh_kernel
except ImportError:  # extension not built
    _fh_kernel = None

__all__ = [
    "SegmentationParams",
    "Labeling",
    "REGIMES",
    "BACKEND",
    "available_backends",
    "build_edges",
    "segment",
    "count_superpixels_in",
    "save_labeling",
]


def available_backends() -> list[str]:
    names = ["python"]
    if _fh_kernel is not None:
        names.insert(0, "cython")
    return names


def _default_backend() -> str:
    requested = os.environ.get("SALOBJ_BACKEND", "").strip().lower()
    if requested in available_backends():
        return requested
    return available_backends()[0]


BACKEND = _default_backend()

_KERNELS = {"python": _fh_py.merge_components}
if _fh_kernel is not None:
    _KERNELS["cython"] = _fh_kernel.merge_components


@dataclass(frozen=True)
class SegmentationParams:
    sigma: float = 1.0
    k: float = 300.0
    min_size: int = 60

    def __post_init__(self):
        if not self.sigma >= 0:
            raise InvalidInputError(f"sigma must be >= 0, got {self.sigma}")
        if not self.k > 0:
            raise InvalidInputError(f"k must be > 0, got {self.k}")
        if int(self.min_size) != self.min_size or self.min_size < 1:
            raise InvalidInputError(f"min_size must be an integer >= 1, got {self.min_size}")


# Named parameter regimes used by the segmentation sweep.
REGIMES = {
    "fine": SegmentationParams(1.0, 100.0, 20),
    "default": SegmentationParams(1.0, 300.0, 60),
    "alt": SegmentationParams(1.0, 500.0, 50),
    "coarse": SegmentationParams(1.0, 1000.0, 800),
}


@dataclass(frozen=True)
class Labeling:
    """Partition of the pixel grid; ``labels`` holds ids in [0, count)."""

    labels: np.ndarray
    count: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.count)


def _smooth(image: np.ndarray, sigma: float) -> np.ndarray:
    scaled = image * 255.0
    if sigma <= 0:
        return scaled
    if scaled.ndim == 2:
        return ndimage.gaussian_filter(scaled, sigma, mode="nearest", truncate=4.0)
    return np.stack(
        [ndimage.gaussian_filter(scaled[:, :, c], sigma, mode="nearest", truncate=4.0)
         for c in range(scaled.shape[2])],
        axis=2,
    )


def build_edges(image, sigma: float = 1.0):
    """Return ``(src, dst, weight)`` for the 8-connected grid graph, sorted.

    Each pixel links to its right, lower, lower-right and upper-right
    neighbour.  Edges are ordered by (weight, src, dst).
    """
    img = as_image(image)
    smooth = _smooth(img, sigma)
    if smooth.ndim == 2:
        smooth = smooth[:, :, None]
    h, w = smooth.shape[:2]
    # slot order per source pixel (up-right, right, down, down-right) is
    # ascending destination index, so a stable sort on weight alone yields
    # the (weight, src, dst) order
    offsets = ((-1, 1), (0, 1), (1, 0), (1, 1))
    weight = np.zeros((h, w, 4))
    valid = np.zeros((h, w, 4), dtype=bool)
    for slot, (dy, dx) in enumerate(offsets):
        ys = slice(max(0, -dy), h - max(0, dy))
        yd = slice(max(0, dy), h - max(0, -dy))
        xs = slice(0, w - dx)
        xd = slice(dx, w)
        diff = smooth[ys, xs] - smooth[yd, xd]
        weight[ys, xs, slot] = np.sqrt(np.einsum("ijc,ijc->ij", diff, diff))
        valid[ys, xs, slot] = True
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)
    step = np.array([-w + 1, 1, w, w + 1], dtype=np.int64)
    src = np.broadcast_to(idx[:, :, None], (h, w, 4))[valid]
    dst = (idx[:, :, None] + step)[valid]
    weight = weight[valid]
    order = np.argsort(weight, kind="stable")
    return (np.ascontiguousarray(src[order]),
            np.ascontiguousarray(dst[order]),
            np.ascontiguousarray(weight[order]))


def _relabel(roots: np.ndarray) -> tuple[np.ndarray, int]:
    """Map arbitrary root ids to 0..n-1 in row-major first-appearance order."""
    uniq, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
    return rank[inverse], len(uniq)


def segment(image, params: SegmentationParams | None = None, backend: str | None = None) -> Labeling:
    """Over-segment ``image`` into superpixels.

    Parameters
    ----------
    image : array_like
        (H, W) or (H, W, 3) samples in [0, 1].
    params : SegmentationParams, optional
        Defaults to sigma=1, k=300, min_size=60.
    backend : {"cython", "python"}, optional
        Merge-loop implementation; defaults to the module-level ``BACKEND``.

    Returns
    -------
    Labeling
        Deterministic labelling; ids follow row-major first appearance.
    """
    params = params or SegmentationParams()
    backend = backend or BACKEND
    if backend not in _KERNELS:
        raise InvalidInputError(f"unknown or unavailable backend {backend!r}")
    img = as_image(image)
    h, w = img.shape[:2]
    src, dst, weight = build_edges(img, params.sigma)
    roots = _KERNELS[backend](h * w, src, dst, weight, float(params.k), int(params.min_size))
    labels, count = _relabel(np.asarray(roots))
    return Labeling(labels.reshape(h, w), count)


def count_superpixels_in(labeling: Labeling, mask) -> int:
    """Number of distinct superpixels with at least one pixel inside ``mask``."""
    m = as_mask(mask)
    if m.shape != labeling.shape:
        raise InvalidInputError(f"mask shape {m.shape} does not match labeling shape {labeling.shape}")
    return int(np.unique(labeling.labels[m]).size)


def save_labeling(path, labeling: Labeling) -> None:
    """Write labels as a 16-bit PNG plus ``<path>.txt`` of label,pixel_count rows."""
    if labeling.count > 65536:
        raise InvalidInputError("too many segments for a 16-bit label image")
    path = os.fspath(path)
    Image.fromarray(labeling.labels.astype(np.uint16)).save(path, format="PNG")
    sizes = labeling.sizes()
    with open(path + ".txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("label,pixel_count\n")
        for label, n in enumerate(sizes):
            fh.write(f"{label},{int(n)}\n")
