"""Dataset manifests and the object/scene statistics used to characterize
salient-object datasets (center bias, object size and position, scene
complexity, fixation concentration).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import tables
from .frontend import EmptyInputError, FixationSet, fixation_map, load_fixations
from .metrics import InvalidGroundTruthError, agreement
from .raster import (InvalidInputError, as_mask, load_image, load_mask, normalize_map,
                     resize_bilinear)
from .superpixel import SegmentationParams, count_superpixels_in, segment

__all__ = [
    "ManifestError",
    "InstanceRef",
    "Entry",
    "Manifest",
    "load_manifest",
    "EntryData",
    "load_entry",
    "ObjectStats",
    "DatasetReport",
    "CANONICAL_GRID",
    "CENTER_SIGMA",
    "CENTER_TRUNCATION",
    "center_filter",
    "center_bias_classify",
    "most_salient_object",
    "normalized_object_distance",
    "size_ratio",
    "fixation_ratio",
    "fixation_ratio_by_rank",
    "object_stats",
    "dataset_report",
    "DISTANCE_BINS",
    "SIZE_BINS",
]


class ManifestError(ValueError):
    """The manifest cannot be parsed or references missing files."""


# -- manifest -----------------------------------------------------------------

@dataclass(frozen=True)
class InstanceRef:
    path: Path
    order: int


@dataclass(frozen=True)
class Entry:
    id: str
    image: Path
    mask: Path | None = None
    fixations: Path | None = None
    map: Path | None = None
    annotations: tuple[Path, ...] = ()
    instances: tuple[InstanceRef, ...] = ()

    def paths(self) -> list[Path]:
        out = [self.image]
        out += [p for p in (self.mask, self.fixations, self.map) if p is not None]
        out += list(self.annotations)
        out += [inst.path for inst in self.instances]
        return out

    def missing(self) -> list[Path]:
        return [p for p in self.paths() if not p.is_file()]


@dataclass(frozen=True)
class Manifest:
    path: Path
    entries: tuple[Entry, ...]

    @property
    def name(self) -> str:
        return self.path.name


def _entry_from_dict(raw: dict, root: Path, index: int) -> Entry:
    if not isinstance(raw, dict):
        raise ManifestError(f"entry {index} is not a mapping")
    if "image" not in raw:
        raise ManifestError(f"entry {index} has no 'image'")

    def resolve(value):
        return None if value is None else (root / str(value))

    image = resolve(raw["image"])
    instances = []
    for j, inst in enumerate(raw.get("instances") or []):
        if isinstance(inst, dict):
            instances.append(InstanceRef(resolve(inst["mask"]), int(inst.get("order", j + 1))))
        else:
            instances.append(InstanceRef(resolve(inst), j + 1))
    return Entry(
        id=str(raw.get("id", Path(str(raw["image"])).stem)),
        image=image,
        mask=resolve(raw.get("mask")),
        fixations=resolve(raw.get("fixations")),
        map=resolve(raw.get("map")),
        annotations=tuple(resolve(a) for a in raw.get("annotations") or []),
        instances=tuple(sorted(instances, key=lambda r: r.order)),
    )


def load_manifest(path, strict: bool = True) -> Manifest:
    """Parse a YAML (or JSON) manifest; paths resolve against its directory.

    The document is either a list of entries or a mapping with an
    ``entries`` list.  Each entry has ``image`` and optionally ``id``,
    ``mask``, ``fixations``, ``map``, ``annotations`` (list of mask paths)
    and ``instances`` (list of ``{mask, order}``).

    With ``strict`` a missing referenced file raises ``ManifestError``;
    otherwise missing files surface when the entry is loaded.
    """
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ManifestError(f"cannot read manifest {str(path)!r}: {exc}") from exc
    raw_entries = doc.get("entries") if isinstance(doc, dict) else doc
    if not isinstance(raw_entries, list):
        raise ManifestError(f"manifest {str(path)!r} has no entry list")
    root = path.parent
    entries = tuple(_entry_from_dict(raw, root, i) for i, raw in enumerate(raw_entries))
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise ManifestError("entry ids are not unique")
    if strict:
        for e in entries:
            missing = e.missing()
            if missing:
                raise ManifestError(f"entry {e.id!r}: missing file {str(missing[0])!r}")
    return Manifest(path, entries)


@dataclass
class EntryData:
    entry: Entry
    image: np.ndarray
    mask: np.ndarray | None = None
    fixations: FixationSet | None = None
    annotations: list = field(default_factory=list)
    instances: list = field(default_factory=list)

    @property
    def size(self) -> tuple[int, int]:
        """(width, height)."""
        return self.image.shape[1], self.image.shape[0]


def load_entry(entry: Entry) -> EntryData:
    """Read every raster and fixation file of one entry and check sizes."""
    missing = entry.missing()
    if missing:
        raise FileNotFoundError(f"missing file {str(missing[0])!r}")
    image = load_image(entry.image)
    h, w = image.shape[:2]

    def checked_mask(p):
        m = load_mask(p)
        if m.shape != (h, w):
            raise InvalidInputError(f"{str(p)!r} is {m.shape[1]}x{m.shape[0]}, image is {w}x{h}")
        return m

    data = EntryData(entry, image)
    if entry.mask is not None:
        data.mask = checked_mask(entry.mask)
    if entry.fixations is not None:
        data.fixations = load_fixations(entry.fixations, w, h)
    data.annotations = [checked_mask(p) for p in entry.annotations]
    data.instances = [checked_mask(r.path) for r in entry.instances]
    return data


# -- statistics ---------------------------------------------------------------

CANONICAL_GRID = (400, 300)
CENTER_SIGMA = 50.0
CENTER_TRUNCATION = 0.95
# filter values below one 8-bit grey level count as outside the support
CENTER_SUPPORT_EPS = 1.0 / 255.0


def center_filter(width: int, height: int, truncation: str = "zero") -> np.ndarray:
    """Central Gaussian (sigma 50 on a 400x300 grid), normalized, resized,
    with values above 0.95 zeroed (``"zero"``) or clipped (``"clip"``)."""
    gw, gh = CANONICAL_GRID
    yy, xx = np.mgrid[0:gh, 0:gw]
    g = np.exp(-(((xx - (gw - 1) / 2) ** 2 + (yy - (gh - 1) / 2) ** 2) / (2 * CENTER_SIGMA ** 2)))
    g = resize_bilinear(normalize_map(g), width, height)
    if truncation == "zero":
        g[g > CENTER_TRUNCATION] = 0.0
    elif truncation == "clip":
        np.minimum(g, CENTER_TRUNCATION, out=g)
    else:
        raise InvalidInputError(f"unknown truncation {truncation!r}")
    return g


def center_bias_classify(gt, truncation: str = "zero",
                         support_eps: float = CENTER_SUPPORT_EPS) -> bool:
    """True when the object overlaps the truncated central Gaussian."""
    m = as_mask(gt)
    if not m.any():
        raise InvalidGroundTruthError("object mask is empty")
    h, w = m.shape
    g = center_filter(w, h, truncation)
    return bool(np.any(g[m] > support_eps))


def normalized_object_distance(gt) -> float:
    """Bounding-box center to image center, over half the image diagonal.

    Pixel centers are the coordinates, so the image center is
    ((W-1)/2, (H-1)/2) and a single corner pixel scores exactly 1.
    """
    m = as_mask(gt)
    if not m.any():
        raise InvalidGroundTruthError("object mask is empty")
    h, w = m.shape
    rows = np.flatnonzero(m.any(axis=1))
    cols = np.flatnonzero(m.any(axis=0))
    cx = (cols[0] + cols[-1]) / 2
    cy = (rows[0] + rows[-1]) / 2
    half_diag = np.hypot(w - 1, h - 1) / 2
    if half_diag == 0:
        return 0.0
    d = np.hypot(cx - (w - 1) / 2, cy - (h - 1) / 2) / half_diag
    return float(min(d, 1.0))


def size_ratio(gt) -> float:
    m = as_mask(gt)
    return np.count_nonzero(m) / m.size


def fixation_ratio(instance, fix: FixationSet, mode: str = "points",
                   blur_sigma: float = 30.0) -> float:
    """Share of fixations landing on ``instance``.

    ``mode="points"`` counts fixation points; ``mode="mass"`` uses the
    blurred fixation map instead.
    """
    m = as_mask(instance)
    if len(fix) == 0:
        raise EmptyInputError("no fixations")
    if m.shape != (fix.height, fix.width):
        raise InvalidInputError("instance mask does not match the fixation frame")
    if mode == "points":
        rows, cols = fix.pixels()
        return float(np.count_nonzero(m[rows, cols]) / len(fix))
    if mode == "mass":
        fmap = fixation_map(fix, blur_sigma)
        return float(fmap[m].sum() / fmap.sum())
    raise InvalidInputError(f"unknown fixation-ratio mode {mode!r}")


def fixation_ratio_by_rank(instances, fix: FixationSet, mode: str = "points") -> list[float]:
    """Fixation ratio of each instance; ``instances`` is already in
    annotation order (or a list of ``(order, mask)`` pairs)."""
    instances = list(instances)
    if not instances:
        raise EmptyInputError("no instances")
    if isinstance(instances[0], tuple):
        instances = [m for _, m in sorted(instances, key=lambda t: t[0])]
    return [fixation_ratio(m, fix, mode) for m in instances]


def most_salient_object(instances, fixmap) -> int:
    """Index of the instance holding the fixation-map peak.

    If the peak lies on no instance, the instance with the largest share
    of fixation-map mass wins (lowest index on ties).
    """
    masks = [as_mask(m) for m in instances]
    if not masks:
        raise EmptyInputError("no instances")
    fmap = np.asarray(fixmap, dtype=np.float64)
    if any(m.shape != fmap.shape for m in masks):
        raise InvalidInputError("instance masks must match the fixation map")
    peak = np.unravel_index(int(np.argmax(fmap)), fmap.shape)
    for i, m in enumerate(masks):
        if m[peak]:
            return i
    total = fmap.sum()
    shares = [fmap[m].sum() / total if total > 0 else 0.0 for m in masks]
    return int(np.argmax(shares))


@dataclass(frozen=True)
class ObjectStats:
    normalized_distance: float
    size_ratio: float
    superpixels_object: int
    superpixels_background: int
    superpixels_all: int
    on_center: bool
    fixation_ratio: float | None = None
    fixation_ratio_by_rank: tuple[float, ...] = ()
    most_salient_instance: int | None = None
    agreement: float | None = None


def object_stats(image, gt, seg: SegmentationParams | None = None,
                 fixations: FixationSet | None = None, annotations=(),
                 instances=(), truncation: str = "zero",
                 fixation_mode: str = "points", blur_sigma: float = 30.0) -> ObjectStats:
    gt = as_mask(gt)
    labeling = segment(image, seg)
    fr = ranks = msi = None
    if fixations is not None and len(fixations):
        fr = fixation_ratio(gt, fixations, fixation_mode, blur_sigma)
        if instances:
            ranks = tuple(fixation_ratio(m, fixations, fixation_mode, blur_sigma)
                          for m in instances)
            msi = most_salient_object(instances, fixation_map(fixations, blur_sigma))
    return ObjectStats(
        normalized_distance=normalized_object_distance(gt),
        size_ratio=size_ratio(gt),
        superpixels_object=count_superpixels_in(labeling, gt),
        superpixels_background=count_superpixels_in(labeling, ~gt),
        superpixels_all=labeling.count,
        on_center=center_bias_classify(gt, truncation),
        fixation_ratio=fr,
        fixation_ratio_by_rank=ranks or (),
        most_salient_instance=msi,
        agreement=agreement(annotations) if len(annotations) >= 2 else None,
    )


DISTANCE_BINS = np.linspace(0.0, 1.0, 21)
SIZE_BINS = np.logspace(-3, 0, 21)


@dataclass
class DatasetReport:
    ids: list
    stats: list
    errors: list
    options: dict

    def ok(self):
        return [(i, s) for i, s in zip(self.ids, self.stats) if s is not None]

    def histograms(self) -> dict:
        ok = [s for _, s in self.ok()]
        dist = np.array([s.normalized_distance for s in ok])
        size = np.clip(np.array([s.size_ratio for s in ok]), SIZE_BINS[0], SIZE_BINS[-1])
        return {
            "distance": (DISTANCE_BINS, np.histogram(dist, DISTANCE_BINS)[0]),
            "size_ratio": (SIZE_BINS, np.histogram(size, SIZE_BINS)[0]),
        }

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        has_fix = any(s is not None and s.fixation_ratio is not None for s in self.stats)
        has_ann = any(s is not None and s.agreement is not None for s in self.stats)
        header = ["id", "status", "normalized_distance", "size_ratio", "on_center",
                  "superpixels_object", "superpixels_background", "superpixels_all",
                  "fixation_ratio", "fixation_ratio_by_rank", "most_salient_instance", "r_k"]
        rows = []
        for i, s in zip(self.ids, self.stats):
            if s is None:
                rows.append([i, "error"] + ["NA"] * (len(header) - 2))
                continue
            rows.append([
                i, "ok", s.normalized_distance, s.size_ratio, s.on_center,
                s.superpixels_object, s.superpixels_background, s.superpixels_all,
                s.fixation_ratio if has_fix else "absent",
                ";".join(f"{v:.6f}" for v in s.fixation_ratio_by_rank) or "NA",
                s.most_salient_instance,
                s.agreement if has_ann else "absent",
            ])
        meta = dict(self.options)
        meta["fixation_columns"] = "present" if has_fix else "absent"
        tables.write_table(out / "stats.csv", header, rows, meta)

        hist_meta = dict(meta)
        hist_meta["distance_bins"] = "20 uniform on [0,1]"
        hist_meta["size_ratio_bins"] = "20 log-spaced on [1e-3,1], values clipped into range"
        hist_rows = []
        for name, (edges, counts) in self.histograms().items():
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                hist_rows.append([name, f"{lo:.6g}", f"{hi:.6g}", int(c)])
        tables.write_table(out / "histograms.csv", ["quantity", "bin_lo", "bin_hi", "count"],
                           hist_rows, hist_meta)
        tables.write_table(out / "errors.csv", ["id", "error"],
                           [[i, e.replace(",", ";")] for i, e in self.errors], meta)


def dataset_report(manifest: Manifest, seg: SegmentationParams | None = None,
                   workers: int = 1, truncation: str = "zero",
                   fixation_mode: str = "points", blur_sigma: float = 30.0) -> DatasetReport:
    """Per-entry ObjectStats plus histograms; failing entries are recorded,
    not raised."""
    seg = seg or SegmentationParams()

    def one(entry: Entry):
        try:
            data = load_entry(entry)
            if data.mask is None:
                raise InvalidGroundTruthError("entry has no ground-truth mask")
            return object_stats(data.image, data.mask, seg, data.fixations,
                                data.annotations, data.instances, truncation,
                                fixation_mode, blur_sigma), None
        except (OSError, ValueError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    results = tables.map_ordered(one, manifest.entries, workers)
    options = {
        "manifest": manifest.name,
        "seg_sigma": seg.sigma,
        "seg_k": seg.k,
        "seg_min": seg.min_size,
        "center_sigma": CENTER_SIGMA,
        "center_grid": f"{CANONICAL_GRID[0]}x{CANONICAL_GRID[1]}",
        "center_truncation": f"{truncation}>{CENTER_TRUNCATION}",
        "center_support_eps": f"{CENTER_SUPPORT_EPS:.6g}",
        "distance_reference": "bounding-box center",
        "fixation_ratio_mode": fixation_mode,
        "blur_sigma": blur_sigma,
    }
    return DatasetReport(
        ids=[e.id for e in manifest.entries],
        stats=[s for s, _ in results],
        errors=[(e.id, err) for e, (_, err) in zip(manifest.entries, results) if err],
        options=options,
    )
