import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).resolve().parent))

SYNTHETIC10 = Path(__file__).resolve().parents[1] / "src" / "salobj" / "data" / "synthetic10"


def square_scene(x0, y0, side=30, n=128, bright=0.9, dark=0.1):
    """Bright square on a dark field plus the square's mask."""
    img = np.full((n, n), dark)
    img[y0:y0 + side, x0:x0 + side] = bright
    mask = np.zeros((n, n), bool)
    mask[y0:y0 + side, x0:x0 + side] = True
    return img, mask


def gaussian_blob(n, cx, cy, sigma):
    yy, xx = np.mgrid[0:n, 0:n]
    g = np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma ** 2))
    return (g - g.min()) / (g.max() - g.min())


def pink_texture(rng, h, w, channels=3, exponent=1.0):
    """Random-phase noise with a 1/f^exponent amplitude spectrum, in [0, 1]."""
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    f = np.hypot(fx, fy)
    f[0, 0] = 1.0
    amp = 1.0 / f ** exponent
    amp[0, 0] = 0.0
    out = []
    for _ in range(channels):
        phase = rng.uniform(0, 2 * np.pi, size=(h, w))
        field = np.real(np.fft.ifft2(amp * np.exp(1j * phase)))
        field = (field - field.min()) / (field.max() - field.min())
        out.append(field)
    img = np.stack(out, axis=2)
    return img if channels > 1 else img[:, :, 0]


def save_png(path, arr):
    arr = np.asarray(arr)
    if arr.dtype == bool:
        data = np.where(arr, 255, 0).astype(np.uint8)
    else:
        data = np.floor(np.clip(arr, 0, 1) * 255 + 0.5).astype(np.uint8)
    Image.fromarray(data).save(path)


@pytest.fixture
def synthetic_manifest(tmp_path):
    """Three 64x64 square scenes with masks, maps, fixations and two annotators."""
    root = tmp_path / "data"
    root.mkdir()
    lines = ["entries:"]
    for i, (x0, y0) in enumerate([(17, 17), (10, 25), (30, 12)]):
        img, mask = square_scene(x0, y0, side=20, n=64)
        sal = gaussian_blob(64, x0 + 9.5, y0 + 9.5, 10)
        save_png(root / f"img{i}.png", np.stack([img] * 3, axis=2))
        save_png(root / f"mask{i}.png", mask)
        save_png(root / f"map{i}.png", sal)
        save_png(root / f"ann{i}a.png", mask)
        save_png(root / f"ann{i}b.png", mask)
        with open(root / f"fix{i}.csv", "w") as fh:
            fh.write("x,y,observer_id\n")
            for obs in range(3):
                fh.write(f"{x0 + 5 + obs},{y0 + 8},{obs}\n")
                fh.write(f"{x0 + 10},{y0 + 10 + obs},{obs}\n")
            fh.write("2,2,0\n")
        lines += [f"  - id: e{i}",
                  f"    image: img{i}.png",
                  f"    mask: mask{i}.png",
                  f"    map: map{i}.png",
                  f"    fixations: fix{i}.csv",
                  f"    annotations: [ann{i}a.png, ann{i}b.png]",
                  "    instances:",
                  f"      - {{mask: mask{i}.png, order: 1}}"]
    path = root / "manifest.yaml"
    path.write_text("\n".join(lines) + "\n")
    return path


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
