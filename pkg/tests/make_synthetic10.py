"""Regenerate the bundled 10-image synthetic benchmark and its golden tables.

    python tests/make_synthetic10.py

Images, masks and saliency maps come from a seeded generator.  The golden
tables are computed by the brute-force oracle in ``oracles.py`` (per
threshold pixel counting, pairwise rank AUC) and formatted here, without
going through the package's metric code.
"""
import sys
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

sys.path.insert(0, str(Path(__file__).resolve().parent))
import oracles  # noqa: E402

ROOT = Path(__file__).resolve().parents[1] / "src" / "salobj" / "data" / "synthetic10"
H, W = 60, 80
N = 10
SEED = 20140501

# configuration block cmd_eval embeds for the default `eval` invocation
META = [
    ("command", "eval"),
    ("manifest", "manifest.yaml"),
    ("frontend", "external-map"),
    ("blur_sigma", "30.000000"),
    ("beta", "0.700000"),
    ("seg_sigma", "1.000000"),
    ("seg_k", "300.000000"),
    ("seg_min", "60"),
    ("overlap_fraction", "0.000000"),
    ("discard_border", "true"),
    ("keep_peak_fallback", "false"),
    ("alpha", "0.300000"),
    ("fpr", "standard"),
    ("f_mode", "max-threshold"),
    ("f_aggregation", "mean P/R over images per threshold, then F"),
    ("auc_aggregation", "mean of per-image AUC"),
    ("quantization", "floor(255*s+0.5) >= T for T in 0..255"),
    ("precision_at_empty_prediction", "1.000000"),
    ("target", "map"),
    ("omega_prediction", "map >= 128/255"),
]


def make_scene(rng, i):
    yy, xx = np.mgrid[0:H, 0:W]
    cx = rng.uniform(15, W - 15)
    cy = rng.uniform(12, H - 12)
    rx = rng.uniform(6, 14)
    ry = rng.uniform(5, 11)
    mask = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    bg = rng.uniform(0.1, 0.4, size=3)
    fg = rng.uniform(0.55, 0.95, size=3)
    img = np.where(mask[:, :, None], fg, bg) + rng.normal(0, 0.03, size=(H, W, 3))
    img = np.clip(img, 0, 1)
    if i == N - 1:
        sal = mask.astype(np.float64)
    else:
        blob = ndimage.gaussian_filter(mask.astype(np.float64), rng.uniform(1.5, 5))
        distractor = np.exp(-((xx - rng.uniform(0, W)) ** 2 + (yy - rng.uniform(0, H)) ** 2)
                            / (2 * rng.uniform(4, 10) ** 2))
        sal = blob + rng.uniform(0.2, 0.8) * distractor + 0.25 * rng.random((H, W))
        sal = (sal - sal.min()) / (sal.max() - sal.min())
    return img, mask, sal


def to8(a):
    return np.floor(np.clip(a, 0, 1) * 255 + 0.5).astype(np.uint8)


def write_dataset():
    rng = np.random.default_rng(SEED)
    for sub in ("images", "masks", "maps", "golden"):
        (ROOT / sub).mkdir(parents=True, exist_ok=True)
    lines = ["# 10-image synthetic benchmark; regenerate with tests/make_synthetic10.py", "entries:"]
    for i in range(N):
        name = f"syn{i:02d}"
        img, mask, sal = make_scene(rng, i)
        Image.fromarray(to8(img), "RGB").save(ROOT / "images" / f"{name}.png")
        Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), "L").save(ROOT / "masks" / f"{name}.png")
        Image.fromarray(to8(sal), "L").save(ROOT / "maps" / f"{name}.png")
        lines += [f"  - id: {name}",
                  f"    image: images/{name}.png",
                  f"    mask: masks/{name}.png",
                  f"    map: maps/{name}.png"]
    (ROOT / "manifest.yaml").write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_back(name):
    """Map and mask exactly as an external-map loader sees them."""
    raw = np.asarray(Image.open(ROOT / "maps" / f"{name}.png").convert("L"), dtype=np.float64) / 255
    lo, hi = raw.min(), raw.max()
    sal = np.zeros_like(raw) if hi == lo else np.clip((raw - lo) / (hi - lo), 0, 1)
    gt = np.asarray(Image.open(ROOT / "masks" / f"{name}.png").convert("L")) > 127
    return sal, gt


def table(header, rows):
    out = [f"# {k}={v}" for k, v in META]
    out.append(header)
    out += rows
    return "\n".join(out) + "\n"


def golden():
    alpha = 0.3
    precisions, recalls, tprs, fprs, aucs, omegas = [], [], [], [], [], []
    per_image = []
    for i in range(N):
        name = f"syn{i:02d}"
        sal, gt = read_back(name)
        q = oracles.quantize(sal)
        counts = oracles.fast_brute_counts(q, gt)
        p = [1.0 if tp + fp == 0 else tp / (tp + fp) for tp, fp, fn, tn in counts]
        r = [tp / (tp + fn) for tp, fp, fn, tn in counts]
        tpr = [tp / (tp + fn) for tp, fp, fn, tn in counts]
        fpr = [fp / (fp + tn) for tp, fp, fn, tn in counts]
        a = oracles.rank_auc(q[gt].tolist(), q[~gt].tolist())
        f = max(oracles.f_alpha(pp, rr, alpha) for pp, rr in zip(p, r))
        pred = q >= 128
        om = np.sum(pred & gt) / np.sum(pred | gt)
        precisions.append(p)
        recalls.append(r)
        tprs.append(tpr)
        fprs.append(fpr)
        aucs.append(a)
        omegas.append(om)
        per_image.append(f"{name},ok,{f:.6f},{a:.6f},{om:.6f}")

    mp = np.mean(precisions, axis=0)
    mr = np.mean(recalls, axis=0)
    mt = np.mean(tprs, axis=0)
    mf = np.mean(fprs, axis=0)
    fbest = max(oracles.f_alpha(pp, rr, alpha) for pp, rr in zip(mp, mr))
    summary = f"external-map,{N},{fbest:.6f},{np.mean(aucs):.6f},{np.mean(omegas):.6f}"

    g = ROOT / "golden"
    g.joinpath("summary.csv").write_text(
        table("model,n_images,f_measure,auc,mean_omega", [summary]), encoding="utf-8")
    g.joinpath("per_image.csv").write_text(
        table("id,status,f_measure,auc,omega", per_image), encoding="utf-8")
    pr_lines = ["threshold,x,y"] + [f"{t},{mr[t]:.6f},{mp[t]:.6f}" for t in range(256)]
    g.joinpath("pr_curve.csv").write_text("\n".join(pr_lines) + "\n", encoding="utf-8")
    roc_lines = ["threshold,x,y"] + [f"{t},{mf[t]:.6f},{mt[t]:.6f}" for t in range(255, -1, -1)]
    g.joinpath("roc_curve.csv").write_text("\n".join(roc_lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    if "--golden-only" not in sys.argv:
        write_dataset()
    golden()
    print(f"wrote {ROOT}")
