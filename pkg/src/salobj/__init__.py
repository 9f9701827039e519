"""Salient object detection baseline and benchmark tools.

The baseline thresholds a saliency map, keeps the graph-based superpixels
the surviving region touches, drops border superpixels and fills holes.
"""
from .frontend import (FixationSet, FrontendSpec, fixation_map, inter_observer_map,
                       load_external_map, load_fixations, spectral_standin)
from .metrics import (agreement, auc, f_measure, overlap_omega, pr_curve,
                      reported_f_measure, roc_curve, shuffled_auc)
from .model import SalBaseParams, SalBaseResult, run_salbase, select_superpixels, truncate_saliency
from .raster import connected_components, fill_holes, normalize_map, resize_bilinear
from .superpixel import BACKEND, Labeling, SegmentationParams, count_superpixels_in, segment

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FixationSet",
    "FrontendSpec",
    "Labeling",
    "SalBaseParams",
    "SalBaseResult",
    "SegmentationParams",
    "agreement",
    "auc",
    "connected_components",
    "count_superpixels_in",
    "f_measure",
    "fill_holes",
    "fixation_map",
    "inter_observer_map",
    "load_external_map",
    "load_fixations",
    "normalize_map",
    "overlap_omega",
    "pr_curve",
    "reported_f_measure",
    "resize_bilinear",
    "roc_curve",
    "run_salbase",
    "segment",
    "select_superpixels",
    "shuffled_auc",
    "spectral_standin",
    "truncate_saliency",
]
