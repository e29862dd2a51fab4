"""CSV emission and re-parsing.

Floats are written with 17 significant digits, which round-trips binary64
values exactly.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

OUTPUT_DIR_ENV = "HARDYFEM_OUTPUT_DIR"


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, columns) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = [list(c) for c in columns]
    n = {len(c) for c in columns}
    if len(n) > 1:
        raise ValueError("CSV columns differ in length")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(x) for x in row])
    return path


def read_csv(path):
    """Return ``(header, columns)``; numeric cells become floats."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = []
    for j in range(len(header)):
        cells = [r[j] for r in body]
        try:
            cols.append(np.array([float(c) for c in cells]))
        except ValueError:
            cols.append(cells)
    return header, cols
