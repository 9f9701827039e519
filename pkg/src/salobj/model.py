"""SalBase: threshold a saliency map, keep the superpixels it touches,
drop the ones on the image border and fill the holes of what is left.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .raster import InvalidInputError, as_image, as_mask, as_saliency, fill_holes
from .superpixel import Labeling, SegmentationParams, segment

__all__ = [
    "SalBaseParams",
    "SalBaseResult",
    "NO_OVERLAP",
    "BORDER_DISCARD",
    "truncate_saliency",
    "select_superpixels",
    "rasterize_labels",
    "saliency_peak",
    "run_salbase",
]

NO_OVERLAP = "no-overlap"
BORDER_DISCARD = "border-discard-eliminated-all"


@dataclass(frozen=True)
class SalBaseParams:
    beta: float = 0.7
    seg: SegmentationParams = field(default_factory=SegmentationParams)
    overlap_fraction: float = 0.0
    discard_border: bool = True
    keep_peak_fallback: bool = False

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise InvalidInputError(f"beta must lie in [0, 1], got {self.beta}")
        if not 0.0 <= self.overlap_fraction <= 1.0:
            raise InvalidInputError(f"overlap_fraction must lie in [0, 1], got {self.overlap_fraction}")

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "seg_sigma": self.seg.sigma,
            "seg_k": self.seg.k,
            "seg_min": self.seg.min_size,
            "overlap_fraction": self.overlap_fraction,
            "discard_border": self.discard_border,
            "keep_peak_fallback": self.keep_peak_fallback,
        }


@dataclass(frozen=True)
class SalBaseResult:
    mask: np.ndarray
    selected_labels: frozenset
    peak: tuple[int, int]
    empty_reason: str | None = None
    fallback_used: bool = False
    labeling: Labeling | None = field(default=None, repr=False, compare=False)


def truncate_saliency(saliency, beta: float) -> np.ndarray:
    """Pixels whose saliency is at least ``beta``."""
    if not 0.0 <= beta <= 1.0:
        raise InvalidInputError(f"beta must lie in [0, 1], got {beta}")
    return as_saliency(saliency) >= beta


def _border_labels(labels: np.ndarray) -> np.ndarray:
    edge = np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])
    return np.unique(edge)


def select_superpixels(labeling: Labeling, truncated, params: SalBaseParams) -> frozenset:
    """Labels whose overlap with ``truncated`` exceeds ``overlap_fraction``
    of their area; border-touching labels are then removed if requested."""
    return _select(labeling, truncated, params)[1]


def _select(labeling: Labeling, truncated, params: SalBaseParams):
    t = as_mask(truncated)
    if t.shape != labeling.shape:
        raise InvalidInputError(f"mask shape {t.shape} does not match labeling shape {labeling.shape}")
    sizes = labeling.sizes()
    hits = np.bincount(labeling.labels[t], minlength=labeling.count)
    overlapping = np.flatnonzero(hits / sizes > params.overlap_fraction)
    kept = overlapping
    if params.discard_border:
        kept = np.setdiff1d(overlapping, _border_labels(labeling.labels))
    return frozenset(int(x) for x in overlapping), frozenset(int(x) for x in kept)


def rasterize_labels(labeling: Labeling, selected) -> np.ndarray:
    return np.isin(labeling.labels, np.fromiter(selected, dtype=np.int64, count=len(selected)))


def saliency_peak(saliency) -> tuple[int, int]:
    """(x, y) of the first maximum in row-major order."""
    s = np.asarray(saliency)
    row, col = np.unravel_index(int(np.argmax(s)), s.shape)
    return int(col), int(row)


def run_salbase(image, saliency, params: SalBaseParams | None = None,
                labeling: Labeling | None = None) -> SalBaseResult:
    """Full SalBase pipeline for one image.

    Parameters
    ----------
    image : array_like
        Input raster, (H, W) or (H, W, 3) in [0, 1].
    saliency : array_like
        Saliency map with the image's height and width, already in [0, 1].
    params : SalBaseParams, optional
    labeling : Labeling, optional
        Precomputed superpixels for ``params.seg``; saves work in sweeps
        over ``beta``.

    An empty output is not an error: ``empty_reason`` says which stage
    removed everything.
    """
    params = params or SalBaseParams()
    img = as_image(image)
    sal = as_saliency(saliency)
    if sal.shape != img.shape[:2]:
        raise InvalidInputError(f"saliency shape {sal.shape} does not match image shape {img.shape[:2]}")
    if labeling is None:
        labeling = segment(img, params.seg)
    elif labeling.shape != sal.shape:
        raise InvalidInputError("labeling does not match the image")

    truncated = truncate_saliency(sal, params.beta)
    overlapping, selected = _select(labeling, truncated, params)
    peak = saliency_peak(sal)

    reason = None
    fallback = False
    if not selected:
        reason = NO_OVERLAP if not overlapping else BORDER_DISCARD
        if params.keep_peak_fallback:
            selected = frozenset({int(labeling.labels[peak[1], peak[0]])})
            fallback = True

    mask = fill_holes(rasterize_labels(labeling, selected)) if selected else np.zeros(sal.shape, bool)
    return SalBaseResult(mask, selected, peak, reason, fallback, labeling)
