"""Evaluation measures for saliency maps and object masks.

Saliency values are quantized to integers ``q = floor(255 * s + 0.5)``
and binarized as ``q >= T`` for every threshold ``T`` in 0..255, so every
curve has exactly 256 points and all counts are exact integers.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .frontend import EmptyInputError, FixationSet
from .raster import InvalidInputError, as_mask, as_saliency

__all__ = [
    "InvalidGroundTruthError",
    "UndefinedOverlapError",
    "Curve",
    "ThresholdCounts",
    "N_THRESHOLDS",
    "quantize",
    "threshold_counts",
    "pr_curve",
    "roc_curve",
    "auc",
    "f_measure",
    "f_measure_curve",
    "reported_f_measure",
    "pick_f",
    "ImageEval",
    "EvalSummary",
    "evaluate_map",
    "summarize",
    "shuffled_auc",
    "overlap_omega",
    "agreement",
]

N_THRESHOLDS = 256
THRESHOLDS = np.arange(N_THRESHOLDS)


class InvalidGroundTruthError(ValueError):
    """Ground truth is empty (or full, where negatives are needed)."""


class UndefinedOverlapError(ValueError):
    """Intersection-over-union of two empty masks."""


@dataclass(frozen=True)
class Curve:
    """Points ``(x, y)`` with the integer threshold that produced each.

    PR curves store recall as x and precision as y, ordered by increasing
    threshold.  ROC curves store FPR as x and TPR as y, ordered by
    decreasing threshold.
    """

    kind: str
    thresholds: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def to_csv(self) -> str:
        lines = ["threshold,x,y"]
        lines += [f"{int(t)},{x:.6f},{y:.6f}" for t, x, y in zip(self.thresholds, self.x, self.y)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ThresholdCounts:
    """Confusion counts for thresholds 0..255 (index == threshold)."""

    tp: np.ndarray
    fp: np.ndarray
    positives: int
    negatives: int

    @property
    def predicted(self) -> np.ndarray:
        return self.tp + self.fp


def quantize(saliency) -> np.ndarray:
    s = as_saliency(saliency)
    return np.floor(s * 255.0 + 0.5).astype(np.int64)


def threshold_counts(saliency, gt) -> ThresholdCounts:
    q = quantize(saliency)
    g = as_mask(gt)
    if q.shape != g.shape:
        raise InvalidInputError(f"map shape {q.shape} does not match mask shape {g.shape}")
    pos_hist = np.bincount(q[g], minlength=N_THRESHOLDS)
    neg_hist = np.bincount(q[~g], minlength=N_THRESHOLDS)
    # count(q >= T) is a reversed cumulative sum
    tp = np.cumsum(pos_hist[::-1])[::-1]
    fp = np.cumsum(neg_hist[::-1])[::-1]
    return ThresholdCounts(tp, fp, int(g.sum()), int((~g).sum()))


def _precision(counts: ThresholdCounts) -> np.ndarray:
    m = counts.predicted
    # nothing predicted means no false positives
    return np.where(m > 0, counts.tp / np.maximum(m, 1), 1.0)


def pr_curve(saliency, gt) -> Curve:
    counts = threshold_counts(saliency, gt)
    if counts.positives == 0:
        raise InvalidGroundTruthError("ground truth mask is empty")
    return Curve("PR", THRESHOLDS.copy(), counts.tp / counts.positives, _precision(counts))


def roc_curve(saliency, gt, fpr: str = "standard") -> Curve:
    """ROC curve.

    ``fpr="standard"`` uses FP / |not G|.  ``fpr="paper-printed"`` uses
    TP / (TP + TN), the expression as typeset in the source publication,
    kept only for exact replication.
    """
    counts = threshold_counts(saliency, gt)
    if counts.positives == 0:
        raise InvalidGroundTruthError("ground truth mask is empty")
    if counts.negatives == 0:
        raise InvalidGroundTruthError("ground truth mask covers the whole image")
    tpr = counts.tp / counts.positives
    if fpr == "standard":
        rate = counts.fp / counts.negatives
    elif fpr == "paper-printed":
        tn = counts.negatives - counts.fp
        denom = counts.tp + tn
        rate = np.where(denom > 0, counts.tp / np.maximum(denom, 1), 0.0)
    else:
        raise InvalidInputError(f"unknown FPR variant {fpr!r}")
    return Curve("ROC", THRESHOLDS[::-1].copy(), rate[::-1].copy(), tpr[::-1].copy())


def auc(curve: Curve) -> float:
    """Trapezoidal area under an ROC curve, anchored at (0, 0) and (1, 1)."""
    if curve.kind != "ROC":
        raise InvalidInputError("auc expects an ROC curve")
    x = np.asarray(curve.x, dtype=np.float64)
    y = np.asarray(curve.y, dtype=np.float64)
    order = np.lexsort((y, x))
    x, y = x[order], y[order]
    if not (x[0] == 0.0 and y[0] == 0.0):
        x = np.concatenate([[0.0], x])
        y = np.concatenate([[0.0], y])
    if not (x[-1] == 1.0 and y[-1] == 1.0):
        x = np.concatenate([x, [1.0]])
        y = np.concatenate([y, [1.0]])
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def f_measure(precision, recall, alpha: float = 0.3):
    """Weighted F-measure ``(1 + a) P R / (a P + R)``; 0 where undefined.

    Works elementwise on arrays as well as on scalars.
    """
    p = np.asarray(precision, dtype=np.float64)
    r = np.asarray(recall, dtype=np.float64)
    num = (1.0 + alpha) * p * r
    den = alpha * p + r
    out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def f_measure_curve(pr: Curve, alpha: float = 0.3) -> np.ndarray:
    return f_measure(pr.y, pr.x, alpha)


def reported_f_measure(saliency, gt, alpha: float = 0.3, mode: str = "max-threshold") -> float:
    """Single F-measure for one map.

    ``mode`` is ``"max-threshold"`` (best of the 256 thresholds) or
    ``"fixed:T"`` for a fixed integer threshold T.
    """
    f = f_measure_curve(pr_curve(saliency, gt), alpha)
    return pick_f(f, mode)


def pick_f(f_values: np.ndarray, mode: str) -> float:
    if mode == "max-threshold":
        return float(np.max(f_values))
    if mode.startswith("fixed:"):
        try:
            t = int(mode.split(":", 1)[1])
        except ValueError:
            raise InvalidInputError(f"bad F-measure mode {mode!r}") from None
        if not 0 <= t < N_THRESHOLDS:
            raise InvalidInputError(f"fixed threshold must lie in 0..255, got {t}")
        return float(f_values[t])
    raise InvalidInputError(f"unknown F-measure mode {mode!r}")


def _pixel_values(saliency: np.ndarray, fix: FixationSet) -> np.ndarray:
    if (fix.height, fix.width) != saliency.shape:
        raise InvalidInputError("fixation frame does not match the map")
    rows, cols = fix.pixels()
    return saliency[rows, cols]


def shuffled_auc(saliency, positives: FixationSet, negatives: FixationSet) -> float:
    """AUC separating saliency at ``positives`` from saliency at ``negatives``.

    Negatives are usually fixations from other images of the dataset.
    Every positive is compared with every negative; ties count one half.
    """
    s = as_saliency(saliency)
    if len(positives) == 0 or len(negatives) == 0:
        raise EmptyInputError("shuffled AUC needs non-empty positive and negative sets")
    pos = _pixel_values(s, positives)
    neg = np.sort(_pixel_values(s, negatives))
    below = np.searchsorted(neg, pos, side="left")
    not_above = np.searchsorted(neg, pos, side="right")
    wins = below.sum() + 0.5 * (not_above - below).sum()
    return float(wins / (len(pos) * len(neg)))


def overlap_omega(pred, gt) -> float:
    """Intersection over union of two masks."""
    a = as_mask(pred)
    b = as_mask(gt)
    if a.shape != b.shape:
        raise InvalidInputError(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        raise UndefinedOverlapError("both masks are empty")
    return np.count_nonzero(a & b) / union


def agreement(annotations) -> float:
    """Mean pairwise Jaccard index over a list of annotation masks."""
    masks = [as_mask(m) for m in annotations]
    n = len(masks)
    if n < 2:
        raise InvalidInputError("agreement needs at least two annotations")
    if any(m.shape != masks[0].shape for m in masks):
        raise InvalidInputError("annotation masks differ in size")
    total = 0.0
    for i, j in combinations(range(n), 2):
        try:
            total += overlap_omega(masks[i], masks[j])
        except UndefinedOverlapError:
            raise UndefinedOverlapError(f"annotations {i} and {j} are both empty") from None
    return 2.0 * total / (n * (n - 1))


# -- dataset-level evaluation -------------------------------------------------

@dataclass(frozen=True)
class ImageEval:
    precision: np.ndarray
    recall: np.ndarray
    tpr: np.ndarray
    fpr: np.ndarray
    f_measure: float
    auc: float
    omega: float


@dataclass(frozen=True)
class EvalSummary:
    """Dataset summary.

    ``f_measure`` is computed from the image-averaged PR curve; ``auc`` and
    ``omega`` are means of the per-image values.  Curve arrays are indexed
    by threshold.
    """

    n_images: int
    f_measure: float
    alpha: float
    auc: float
    omega: float
    precision: np.ndarray
    recall: np.ndarray
    tpr: np.ndarray
    fpr: np.ndarray

    def pr(self) -> Curve:
        return Curve("PR", THRESHOLDS.copy(), self.recall, self.precision)

    def roc(self) -> Curve:
        return Curve("ROC", THRESHOLDS[::-1].copy(), self.fpr[::-1].copy(), self.tpr[::-1].copy())


def evaluate_map(saliency, gt, alpha: float = 0.3, f_mode: str = "max-threshold",
                 fpr: str = "standard", omega_mask=None) -> ImageEval:
    """Every measure for one map against one ground-truth mask.

    ``omega_mask`` is the binary prediction scored with the overlap
    measure; it defaults to the map binarized at threshold 128.
    """
    pr = pr_curve(saliency, gt)
    roc = roc_curve(saliency, gt, fpr)
    if omega_mask is None:
        omega_mask = quantize(saliency) >= 128
    return ImageEval(
        precision=pr.y,
        recall=pr.x,
        tpr=roc.y[::-1].copy(),
        fpr=roc.x[::-1].copy(),
        f_measure=pick_f(f_measure_curve(pr, alpha), f_mode),
        auc=auc(roc),
        omega=overlap_omega(omega_mask, gt),
    )


def summarize(evals, alpha: float = 0.3, f_mode: str = "max-threshold") -> EvalSummary:
    evals = list(evals)
    if not evals:
        raise EmptyInputError("nothing to summarize")
    p = np.mean([e.precision for e in evals], axis=0)
    r = np.mean([e.recall for e in evals], axis=0)
    return EvalSummary(
        n_images=len(evals),
        f_measure=pick_f(f_measure(p, r, alpha), f_mode),
        alpha=alpha,
        auc=float(np.mean([e.auc for e in evals])),
        omega=float(np.mean([e.omega for e in evals])),
        precision=p,
        recall=r,
        tpr=np.mean([e.tpr for e in evals], axis=0),
        fpr=np.mean([e.fpr for e in evals], axis=0),
    )
