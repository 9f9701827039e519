"""Batch driver.

    salobj segment --manifest data.yaml --out results/ --frontend standin
    salobj eval    --manifest data.yaml --out results/ --frontend external
    salobj sweep   --manifest data.yaml --out results/ --param beta
    salobj stats   --manifest data.yaml --out results/
    salobj fixmap  --manifest data.yaml --out results/ --blur-sigma 30

Exit codes: 0 success, 1 at least one entry failed, 2 configuration error.
``SALOBJ_OUT`` supplies the output directory when ``--out`` is omitted.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import metrics, tables
from .dataset import Entry, ManifestError, dataset_report, load_entry, load_manifest
from .frontend import (DEFAULT_BLUR_SIGMA, FrontendSpec, fixation_map, inter_observer_map,
                       load_external_map, spectral_standin)
from .model import SalBaseParams, run_salbase
from .raster import InvalidInputError, save_gray, save_mask
from .superpixel import REGIMES, SegmentationParams, save_labeling

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2

OUT_ENV = "SALOBJ_OUT"


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    manifest: Path
    out: Path
    frontend: FrontendSpec
    params: SalBaseParams
    alpha: float = 0.3
    fpr: str = "standard"
    f_mode: str = "max-threshold"
    workers: int = 1

    def meta(self, command: str, **more) -> dict:
        """Configuration recorded in every output table.

        Output paths and the worker count are left out: neither changes
        any emitted value.
        """
        meta = {
            "command": command,
            "manifest": self.manifest.name,
            "frontend": self.frontend.label,
            "blur_sigma": self.frontend.blur_sigma,
        }
        if self.frontend.kind == "interobs":
            meta["held_out_observer"] = self.frontend.held_out_observer
        meta.update(self.params.as_dict())
        meta.update({
            "alpha": self.alpha,
            "fpr": self.fpr,
            "f_mode": self.f_mode,
            "f_aggregation": "mean P/R over images per threshold, then F",
            "auc_aggregation": "mean of per-image AUC",
            "quantization": "floor(255*s+0.5) >= T for T in 0..255",
            "precision_at_empty_prediction": 1.0,
        })
        meta.update(more)
        return meta


# -- argument handling --------------------------------------------------------

def _common(p: argparse.ArgumentParser, salbase=True, metric=False):
    p.add_argument("--manifest", required=True, help="YAML/JSON dataset manifest")
    p.add_argument("--out", default=None, help=f"output directory (default: ${OUT_ENV})")
    p.add_argument("--workers", type=int, default=1, help="parallel per-image workers")
    p.add_argument("--seg-sigma", type=float, default=1.0)
    p.add_argument("--seg-k", type=float, default=300.0)
    p.add_argument("--seg-min", type=int, default=60)
    p.add_argument("--frontend", choices=("external", "fixations", "interobs", "standin"),
                   default="external")
    p.add_argument("--maps-dir", default=None,
                   help="directory of <id>.png saliency maps for the external frontend")
    p.add_argument("--blur-sigma", type=float, default=DEFAULT_BLUR_SIGMA)
    p.add_argument("--held-out", type=int, default=0,
                   help="observer excluded by the inter-observer frontend")
    if salbase:
        p.add_argument("--beta", type=float, default=0.7)
        p.add_argument("--overlap-fraction", type=float, default=0.0)
        p.add_argument("--keep-border", action="store_true",
                       help="do not discard superpixels touching the image border")
        p.add_argument("--keep-peak-fallback", action="store_true",
                       help="keep the peak superpixel when selection comes out empty")
    if metric:
        p.add_argument("--alpha", type=float, default=0.3)
        p.add_argument("--fpr", choices=("standard", "paper-printed"), default="standard")
        p.add_argument("--f-mode", default="max-threshold",
                       help="'max-threshold' or 'fixed:T' with T in 0..255")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="salobj", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="run SalBase and write object masks")
    _common(p)
    p.add_argument("--export-labels", action="store_true",
                   help="also write 16-bit superpixel label images")

    p = sub.add_parser("eval", help="score saliency maps or SalBase masks")
    _common(p, metric=True)
    p.add_argument("--target", choices=("map", "salbase"), default="map",
                   help="evaluate the saliency map itself or the SalBase mask built from it")

    p = sub.add_parser("sweep", help="SalBase F-measure over beta or segmentation regimes")
    _common(p, metric=True)
    p.add_argument("--param", choices=("beta", "seg"), required=True)
    p.add_argument("--values", default=None,
                   help="comma-separated betas or regime names "
                        f"({','.join(REGIMES)}); defaults to 0.5..0.9 / fine,default,coarse")

    p = sub.add_parser("stats", help="dataset statistics report")
    _common(p, salbase=False)
    p.add_argument("--truncation", choices=("zero", "clip"), default="zero")
    p.add_argument("--fixation-ratio", choices=("points", "mass"), default="points")

    p = sub.add_parser("fixmap", help="write blurred fixation maps")
    _common(p, salbase=False)
    return parser


def make_config(args) -> RunConfig:
    out = args.out or os.environ.get(OUT_ENV)
    if not out:
        raise ConfigError(f"no output directory: pass --out or set ${OUT_ENV}")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    try:
        seg = SegmentationParams(args.seg_sigma, args.seg_k, args.seg_min)
        params = SalBaseParams(
            beta=getattr(args, "beta", 0.7),
            seg=seg,
            overlap_fraction=getattr(args, "overlap_fraction", 0.0),
            discard_border=not getattr(args, "keep_border", False),
            keep_peak_fallback=getattr(args, "keep_peak_fallback", False),
        )
        frontend = FrontendSpec(args.frontend, args.blur_sigma, args.maps_dir, args.held_out)
        if hasattr(args, "f_mode"):
            metrics.pick_f(np.zeros(metrics.N_THRESHOLDS), args.f_mode)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {str(out)!r} is not writable: {exc}") from exc
    return RunConfig(
        manifest=Path(args.manifest),
        out=out,
        frontend=frontend,
        params=params,
        alpha=getattr(args, "alpha", 0.3),
        fpr=getattr(args, "fpr", "standard"),
        f_mode=getattr(args, "f_mode", "max-threshold"),
        workers=args.workers,
    )


# -- per-entry work -----------------------------------------------------------

def saliency_for(data, spec: FrontendSpec) -> np.ndarray:
    w, h = data.size
    entry: Entry = data.entry
    if spec.kind == "external":
        path = entry.map
        if path is None:
            if spec.source is None:
                raise FileNotFoundError(f"entry {entry.id!r} has no map and no --maps-dir given")
            path = Path(spec.source) / f"{entry.id}.png"
        if not Path(path).is_file():
            raise FileNotFoundError(f"missing saliency map {str(path)!r}")
        return load_external_map(path, w, h)
    if spec.kind == "standin":
        return spectral_standin(data.image)
    if data.fixations is None:
        raise FileNotFoundError(f"entry {entry.id!r} has no fixation file")
    if spec.kind == "fixations":
        return fixation_map(data.fixations, spec.blur_sigma)
    return inter_observer_map(data.fixations, spec.held_out_observer, spec.blur_sigma)


def _guard(fn):
    def wrapped(entry):
        try:
            return fn(entry), None
        except (OSError, ValueError) as exc:
            return None, f"{type(exc).__name__}: {exc}"
    return wrapped


def _write_errors(cfg: RunConfig, command: str, errors) -> None:
    tables.write_table(cfg.out / "errors.csv", ["id", "error"],
                       [[i, e.replace(",", ";")] for i, e in errors], cfg.meta(command))
    for i, e in errors:
        print(f"error: {i}: {e}", file=sys.stderr)


def _load_manifest(cfg: RunConfig):
    try:
        return load_manifest(cfg.manifest, strict=False)
    except ManifestError as exc:
        raise ConfigError(str(exc)) from exc


# -- commands -----------------------------------------------------------------

def cmd_segment(cfg: RunConfig, export_labels: bool = False) -> int:
    manifest = _load_manifest(cfg)
    mask_dir = cfg.out / "masks"
    mask_dir.mkdir(parents=True, exist_ok=True)

    @_guard
    def one(entry):
        data = load_entry(entry)
        sal = saliency_for(data, cfg.frontend)
        res = run_salbase(data.image, sal, cfg.params)
        omega = metrics.overlap_omega(res.mask, data.mask) if data.mask is not None else None
        save_mask(mask_dir / f"{entry.id}.png", res.mask)
        if export_labels:
            save_labeling(mask_dir / f"{entry.id}_labels.png", res.labeling)
        sidecar = {
            "id": entry.id,
            "config": cfg.meta("segment"),
            "selected_label_count": len(res.selected_labels),
            "segment_count": res.labeling.count,
            "peak": {"x": res.peak[0], "y": res.peak[1]},
            "empty_reason": res.empty_reason,
            "fallback_used": res.fallback_used,
            "omega": None if omega is None else round(omega, 6),
        }
        tables.write_json(mask_dir / f"{entry.id}.json", sidecar)
        return omega

    results = tables.map_ordered(one, manifest.entries, cfg.workers)
    errors = []
    rows = []
    for entry, (omega, err) in zip(manifest.entries, results):
        if err:
            errors.append((entry.id, err))
            rows.append([entry.id, "error", None])
        else:
            rows.append([entry.id, "ok", omega])
            if omega is not None:
                print(f"{entry.id}\tomega={omega:.4f}")
    tables.write_table(cfg.out / "segment.csv", ["id", "status", "omega"], rows, cfg.meta("segment"))
    _write_errors(cfg, "segment", errors)
    return EXIT_PARTIAL if errors else EXIT_OK


def _evaluate(cfg: RunConfig, manifest, target: str, params: SalBaseParams):
    @_guard
    def one(entry):
        data = load_entry(entry)
        if data.mask is None:
            raise metrics.InvalidGroundTruthError(f"entry {entry.id!r} has no ground-truth mask")
        sal = saliency_for(data, cfg.frontend)
        if target == "salbase":
            mask = run_salbase(data.image, sal, params).mask
            return metrics.evaluate_map(mask.astype(np.float64), data.mask, cfg.alpha,
                                        cfg.f_mode, cfg.fpr, omega_mask=mask)
        return metrics.evaluate_map(sal, data.mask, cfg.alpha, cfg.f_mode, cfg.fpr)

    return tables.map_ordered(one, manifest.entries, cfg.workers)


def _model_name(cfg: RunConfig, target: str) -> str:
    name = cfg.frontend.label
    return f"SalBase[{name}]" if target == "salbase" else name


def cmd_eval(cfg: RunConfig, target: str = "map") -> int:
    manifest = _load_manifest(cfg)
    results = _evaluate(cfg, manifest, target, cfg.params)
    meta = cfg.meta("eval", target=target,
                    omega_prediction="SalBase mask" if target == "salbase" else "map >= 128/255")
    curve_dir = cfg.out / "curves"
    curve_dir.mkdir(parents=True, exist_ok=True)

    errors, rows, good = [], [], []
    for entry, (ev, err) in zip(manifest.entries, results):
        if err:
            errors.append((entry.id, err))
            rows.append([entry.id, "error", None, None, None])
            continue
        good.append(ev)
        rows.append([entry.id, "ok", ev.f_measure, ev.auc, ev.omega])
        pr = metrics.Curve("PR", metrics.THRESHOLDS.copy(), ev.recall, ev.precision)
        roc = metrics.Curve("ROC", metrics.THRESHOLDS[::-1].copy(), ev.fpr[::-1], ev.tpr[::-1])
        tables.write_text(curve_dir / f"{entry.id}_pr.csv", pr.to_csv())
        tables.write_text(curve_dir / f"{entry.id}_roc.csv", roc.to_csv())

    tables.write_table(cfg.out / "per_image.csv", ["id", "status", "f_measure", "auc", "omega"],
                       rows, meta)
    header = ["model", "n_images", "f_measure", "auc", "mean_omega"]
    if good:
        summary = metrics.summarize(good, cfg.alpha, cfg.f_mode)
        tables.write_table(cfg.out / "summary.csv", header,
                           [[_model_name(cfg, target), summary.n_images, summary.f_measure,
                             summary.auc, summary.omega]], meta)
        tables.write_text(cfg.out / "pr_curve.csv", summary.pr().to_csv())
        tables.write_text(cfg.out / "roc_curve.csv", summary.roc().to_csv())
    else:
        tables.write_table(cfg.out / "summary.csv", header,
                           [[_model_name(cfg, target), 0, None, None, None]], meta)
    _write_errors(cfg, "eval", errors)
    return EXIT_PARTIAL if errors else EXIT_OK


DEFAULT_BETAS = (0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_REGIMES = ("fine", "default", "coarse")


def cmd_sweep(cfg: RunConfig, param: str, values=None) -> int:
    manifest = _load_manifest(cfg)
    if param == "beta":
        try:
            values = [float(v) for v in (values or DEFAULT_BETAS)]
            settings = [(f"{v:g}", SalBaseParams(v, cfg.params.seg, cfg.params.overlap_fraction,
                                                cfg.params.discard_border,
                                                cfg.params.keep_peak_fallback)) for v in values]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    elif param == "seg":
        values = list(values or DEFAULT_REGIMES)
        unknown = [v for v in values if v not in REGIMES]
        if unknown:
            raise ConfigError(f"unknown regime(s) {unknown}; choose from {list(REGIMES)}")
        settings = [(v, SalBaseParams(cfg.params.beta, REGIMES[v], cfg.params.overlap_fraction,
                                     cfg.params.discard_border, cfg.params.keep_peak_fallback))
                    for v in values]
    else:
        raise ConfigError(f"unknown sweep parameter {param!r}")
    if not settings:
        raise ConfigError("empty sweep list")

    rows, curve, errors = [], [], {}
    for label, params in settings:
        results = _evaluate(cfg, manifest, "salbase", params)
        good = [ev for ev, err in results if not err]
        for entry, (_, err) in zip(manifest.entries, results):
            if err:
                errors[entry.id] = err
        seg = params.seg
        if good:
            s = metrics.summarize(good, cfg.alpha, cfg.f_mode)
            row = [param, label, params.beta, seg.sigma, seg.k, seg.min_size,
                   s.n_images, s.f_measure, s.auc, s.omega]
        else:
            row = [param, label, params.beta, seg.sigma, seg.k, seg.min_size, 0, None, None, None]
        rows.append(row)
        curve.append([label, row[7]])

    meta = cfg.meta("sweep", sweep_param=param, target="salbase")
    tables.write_table(cfg.out / "sweep.csv",
                       ["param", "value", "beta", "seg_sigma", "seg_k", "seg_min",
                        "n_images", "f_measure", "auc", "mean_omega"], rows, meta)
    tables.write_table(cfg.out / "f_curve.csv", ["value", "f_measure"], curve, meta)
    _write_errors(cfg, "sweep", list(errors.items()))
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_stats(cfg: RunConfig, truncation: str = "zero", fixation_mode: str = "points") -> int:
    manifest = _load_manifest(cfg)
    report = dataset_report(manifest, cfg.params.seg, cfg.workers, truncation,
                            fixation_mode, cfg.frontend.blur_sigma)
    report.write(cfg.out)
    for i, e in report.errors:
        print(f"error: {i}: {e}", file=sys.stderr)
    return EXIT_PARTIAL if report.errors else EXIT_OK


def cmd_fixmap(cfg: RunConfig) -> int:
    manifest = _load_manifest(cfg)
    out_dir = cfg.out / "fixmaps"
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = cfg.frontend if cfg.frontend.kind in ("fixations", "interobs") else \
        FrontendSpec("fixations", cfg.frontend.blur_sigma)

    @_guard
    def one(entry):
        data = load_entry(entry)
        fmap = saliency_for(data, spec)
        save_gray(out_dir / f"{entry.id}.png", fmap)
        row, col = np.unravel_index(int(np.argmax(fmap)), fmap.shape)
        return int(col), int(row), len(data.fixations)

    results = tables.map_ordered(one, manifest.entries, cfg.workers)
    rows, errors = [], []
    for entry, (res, err) in zip(manifest.entries, results):
        if err:
            errors.append((entry.id, err))
            rows.append([entry.id, "error", None, None, None])
        else:
            rows.append([entry.id, "ok", res[0], res[1], res[2]])
    meta = cfg.meta("fixmap")
    tables.write_table(cfg.out / "fixmaps.csv", ["id", "status", "peak_x", "peak_y", "n_fixations"],
                       rows, meta)
    _write_errors(cfg, "fixmap", errors)
    return EXIT_PARTIAL if errors else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if args.command == "segment":
            return cmd_segment(cfg, args.export_labels)
        if args.command == "eval":
            return cmd_eval(cfg, args.target)
        if args.command == "sweep":
            values = args.values.split(",") if args.values else None
            return cmd_sweep(cfg, args.param, values)
        if args.command == "stats":
            return cmd_stats(cfg, args.truncation, args.fixation_ratio)
        return cmd_fixmap(cfg)
    except ConfigError as exc:
        print(f"salobj: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
