"""Plain-text table output shared by the report writers.

Tables are comma-separated with a block of ``# key=value`` lines on top
recording the configuration that produced them.  Nothing time-dependent
is written, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor


def fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_table(header, rows, meta: dict | None = None) -> str:
    lines = [f"# {k}={fmt(v)}" for k, v in (meta or {}).items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> None:
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_table(path, header, rows, meta: dict | None = None) -> None:
    write_text(path, render_table(header, rows, meta))


def write_json(path, obj) -> None:
    write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def map_ordered(fn, items, workers: int = 1) -> list:
    """``[fn(x) for x in items]`` on a bounded thread pool, results in input order."""
    items = list(items)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
