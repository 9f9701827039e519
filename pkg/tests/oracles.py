"""Slow, obviously-correct reference computations.

Nothing here imports the package under test.
"""
import numpy as np
from collections import deque


def quantize(s):
    return np.floor(np.asarray(s, dtype=np.float64) * 255.0 + 0.5).astype(np.int64)


def brute_counts(q, g):
    """(tp, fp, fn, tn) for every threshold 0..255, one full pass each."""
    q = np.asarray(q)
    g = np.asarray(g, dtype=bool)
    out = []
    for t in range(256):
        tp = fp = fn = tn = 0
        for v, inside in zip(q.ravel().tolist(), g.ravel().tolist()):
            on = v >= t
            if on and inside:
                tp += 1
            elif on:
                fp += 1
            elif inside:
                fn += 1
            else:
                tn += 1
        out.append((tp, fp, fn, tn))
    return out


def fast_brute_counts(q, g):
    """Same as brute_counts, vectorized per threshold for larger images."""
    g = np.asarray(g, dtype=bool)
    out = []
    for t in range(256):
        m = q >= t
        out.append((int(np.sum(m & g)), int(np.sum(m & ~g)),
                    int(np.sum(~m & g)), int(np.sum(~m & ~g))))
    return out


def rank_auc(pos_scores, neg_scores):
    """Mann-Whitney statistic by explicit pairwise comparison."""
    pos = list(pos_scores)
    neg = list(neg_scores)
    wins = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                wins += 1.0
            elif a == b:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def f_alpha(p, r, alpha):
    den = alpha * p + r
    return 0.0 if den == 0 else (1 + alpha) * p * r / den


def flood_components(mask, connectivity=8):
    """Component count by breadth-first flood fill."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    seen = np.zeros_like(mask)
    if connectivity == 8:
        steps = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dy or dx]
    else:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    n = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] and not seen[y, x]:
                n += 1
                seen[y, x] = True
                todo = deque([(y, x)])
                while todo:
                    cy, cx = todo.popleft()
                    for dy, dx in steps:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            todo.append((ny, nx))
    return n


def flood_fill_holes(mask):
    """Background pixels not 4-reachable from the border become object."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    outside = np.zeros_like(mask)
    todo = deque()
    for y in range(h):
        for x in range(w):
            if (y in (0, h - 1) or x in (0, w - 1)) and not mask[y, x]:
                outside[y, x] = True
                todo.append((y, x))
    while todo:
        cy, cx = todo.popleft()
        for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ny, nx = cy + dy, cx + dx
            if 0 <= ny < h and 0 <= nx < w and not mask[ny, nx] and not outside[ny, nx]:
                outside[ny, nx] = True
                todo.append((ny, nx))
    return ~outside


def label_regions_connected(labels):
    """True when every label's pixels form one 8-connected region."""
    for lab in np.unique(labels):
        if flood_components(labels == lab, 8) != 1:
            return False
    return True
