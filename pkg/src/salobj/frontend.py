"""Saliency frontends: external model maps, human fixation maps and a
built-in spectral-residual stand-in.

The stand-in exists only so the pipeline can run end to end without
third-party model maps; reports label it ``spectral-standin``.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import InvalidInputError, as_image, load_gray, normalize_map, resize_bilinear

__all__ = [
    "EmptyInputError",
    "FixationSet",
    "FrontendSpec",
    "FRONTEND_KINDS",
    "DEFAULT_BLUR_SIGMA",
    "load_fixations",
    "save_fixations",
    "load_external_map",
    "fixation_map",
    "inter_observer_map",
    "spectral_standin",
]

# roughly one degree of visual angle on typical eye-tracking setups
DEFAULT_BLUR_SIGMA = 30.0

FRONTEND_KINDS = ("external", "fixations", "interobs", "standin")


class EmptyInputError(ValueError):
    """Raised when an operation needs at least one fixation or instance."""


@dataclass(frozen=True)
class FixationSet:
    """Gaze points for one image.

    ``points`` is an (N, 3) array of (x, y, observer); x and y are pixel
    coordinates with the origin at the top-left corner.
    """

    points: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        if self.width < 1 or self.height < 1:
            raise InvalidInputError(f"image size must be positive, got {self.width}x{self.height}")
        if pts.size and not np.all(np.isfinite(pts)):
            raise InvalidInputError("fixation coordinates must be finite")
        x, y, obs = pts[:, 0], pts[:, 1], pts[:, 2]
        if np.any((x < 0) | (x >= self.width) | (y < 0) | (y >= self.height)):
            raise InvalidInputError("fixation outside image bounds")
        if np.any(obs < 0) or np.any(obs != np.floor(obs)):
            raise InvalidInputError("observer ids must be non-negative integers")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def observers(self) -> np.ndarray:
        return np.unique(self.points[:, 2].astype(np.int64))

    def pixels(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer (row, col) of the pixel holding each fixation."""
        cols = np.floor(self.points[:, 0]).astype(np.intp)
        rows = np.floor(self.points[:, 1]).astype(np.intp)
        return rows, cols

    def without_observer(self, observer: int) -> "FixationSet":
        keep = self.points[:, 2] != observer
        return FixationSet(self.points[keep], self.width, self.height)


@dataclass(frozen=True)
class FrontendSpec:
    kind: str = "external"
    blur_sigma: float = DEFAULT_BLUR_SIGMA
    source: str | None = None
    held_out_observer: int | None = None

    def __post_init__(self):
        if self.kind not in FRONTEND_KINDS:
            raise InvalidInputError(f"unknown frontend {self.kind!r}; choose from {FRONTEND_KINDS}")
        if self.kind in ("fixations", "interobs") and not self.blur_sigma > 0:
            raise InvalidInputError("blur_sigma must be > 0 for fixation frontends")

    @property
    def label(self) -> str:
        return {
            "external": "external-map",
            "fixations": "fixation-map",
            "interobs": "inter-observer",
            "standin": "spectral-standin (non-paper)",
        }[self.kind]


def load_fixations(path, width: int, height: int) -> FixationSet:
    """Read an ``x,y,observer_id`` CSV (one header line)."""
    path = os.fspath(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ValueError("file is empty")
            rows = [r for r in reader if r and any(c.strip() for c in r)]
            pts = np.array([[float(r[0]), float(r[1]), float(r[2])] for r in rows],
                           dtype=np.float64).reshape(-1, 3)
    except (OSError, ValueError, IndexError) as exc:
        raise OSError(f"cannot read fixation file {path!r}: {exc}") from exc
    return FixationSet(pts, width, height)


def save_fixations(path, fix: FixationSet) -> None:
    with open(os.fspath(path), "w", newline="\n", encoding="utf-8") as fh:
        fh.write("x,y,observer_id\n")
        for x, y, obs in fix.points:
            fh.write(f"{x:g},{y:g},{int(obs)}\n")


def load_external_map(path, width: int, height: int) -> np.ndarray:
    """Load a precomputed 8-bit saliency map, resize to the image, normalize."""
    if width < 1 or height < 1:
        raise InvalidInputError(f"target size must be positive, got {width}x{height}")
    raw = load_gray(path)
    return normalize_map(resize_bilinear(raw, width, height))


def fixation_map(fix: FixationSet, blur_sigma: float = DEFAULT_BLUR_SIGMA) -> np.ndarray:
    """Accumulate fixations into a histogram and blur with an isotropic Gaussian.

    Returns a map normalized to [0, 1]; its argmax is the fixation peak.
    """
    if len(fix) == 0:
        raise EmptyInputError("fixation map needs at least one fixation")
    if not blur_sigma > 0:
        raise InvalidInputError(f"blur_sigma must be > 0, got {blur_sigma}")
    rows, cols = fix.pixels()
    acc = np.zeros((fix.height, fix.width))
    np.add.at(acc, (rows, cols), 1.0)
    # constant zero padding keeps the kernel's peak at the fixation pixel
    blurred = ndimage.gaussian_filter(acc, blur_sigma, mode="constant", cval=0.0, truncate=4.0)
    return normalize_map(blurred)


def inter_observer_map(fix: FixationSet, held_out_observer: int,
                       blur_sigma: float = DEFAULT_BLUR_SIGMA) -> np.ndarray:
    """Fixation map of every observer except ``held_out_observer``."""
    rest = fix.without_observer(held_out_observer)
    if len(rest) == 0:
        raise EmptyInputError(f"no fixations remain after holding out observer {held_out_observer}")
    return fixation_map(rest, blur_sigma)


_STANDIN_SIDE = 64
_STANDIN_BLUR = 2.5


def spectral_standin(image) -> np.ndarray:
    """Spectral-residual saliency (Hou & Zhang 2007) at 64 px on the long side."""
    img = as_image(image)
    gray = img.mean(axis=2) if img.ndim == 3 else img
    h, w = gray.shape
    scale = _STANDIN_SIDE / max(h, w)
    sw = max(1, int(round(w * scale)))
    sh = max(1, int(round(h * scale)))
    small = resize_bilinear(gray, sw, sh)

    spectrum = np.fft.fft2(small)
    amplitude = np.abs(spectrum)
    log_amp = np.log(amplitude + 1e-12)
    residual = log_amp - ndimage.uniform_filter(log_amp, size=3, mode="nearest")
    phase = np.angle(spectrum)
    sal = np.abs(np.fft.ifft2(np.exp(residual + 1j * phase))) ** 2
    sal = ndimage.gaussian_filter(sal, _STANDIN_BLUR, mode="nearest")

    # uniform input has no residual; flatten round-off so it normalizes to 0
    if np.ptp(small) == 0:
        sal = np.zeros_like(sal)
    return normalize_map(resize_bilinear(sal, w, h))
