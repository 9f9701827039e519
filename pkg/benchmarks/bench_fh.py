"""Time the superpixel merge loop with each available backend.

    python3 benchmarks/bench_fh.py --width 400 --height 300 --repeat 5

Edge construction (smoothing, weights, sort) is shared by both backends and
timed separately, so the ``merge`` column isolates the union-find loop.
"""
import argparse
import time

import numpy as np

from salobj import superpixel as sp


def texture(rng, h, w):
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    f = np.hypot(fx, fy)
    f[0, 0] = 1.0
    chans = []
    for _ in range(3):
        field = np.real(np.fft.ifft2(np.exp(2j * np.pi * rng.random((h, w))) / f))
        chans.append((field - field.min()) / (field.max() - field.min()))
    return np.stack(chans, axis=2)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--width", type=int, default=400)
    p.add_argument("--height", type=int, default=300)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    img = texture(np.random.default_rng(args.seed), args.height, args.width)
    params = sp.SegmentationParams()
    t_edges, (src, dst, w) = best_of(lambda: sp.build_edges(img, params.sigma), args.repeat)
    n = args.width * args.height
    print(f"image {args.width}x{args.height}, {len(w)} edges, edge build {t_edges * 1e3:.1f} ms")
    print(f"{'backend':<8} {'merge ms':>10} {'segment ms':>11} {'segments':>9}")
    labels = {}
    for name in sp.available_backends():
        kernel = sp._KERNELS[name]
        t_merge, _ = best_of(lambda: kernel(n, src, dst, w, params.k, params.min_size), args.repeat)
        t_all, lab = best_of(lambda: sp.segment(img, params, backend=name), args.repeat)
        labels[name] = lab.labels
        print(f"{name:<8} {t_merge * 1e3:>10.1f} {t_all * 1e3:>11.1f} {lab.count:>9d}")
    first = next(iter(labels.values()))
    same = all(np.array_equal(first, v) for v in labels.values())
    print("labelings identical across backends:", same)


if __name__ == "__main__":
    main()
