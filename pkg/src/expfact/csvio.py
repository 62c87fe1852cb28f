"""CSV emission: a block of ``#`` metadata lines, a header row, then data.

Floats are written with 17 significant digits so a reread value is the same
double that was written.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .operators import GridSeries


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def _meta_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, float):
        return fmt(v)
    return json.dumps(v, sort_keys=True)


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence],
              metadata: Mapping | None = None) -> None:
    for key, value in (metadata or {}).items():
        stream.write(f"# {key}: {_meta_value(value)}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])


def read_csv(text: str) -> tuple[dict[str, str], list[str], np.ndarray]:
    """Inverse of :func:`write_csv`: (metadata, header, float array)."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
        elif line:
            body.append(line)
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    header, data = rows[0], rows[1:]
    return meta, header, np.array(data, dtype=float).reshape(len(data), len(header))


def series_columns(name: str, dim: int) -> list[str]:
    cols = []
    for i in range(dim):
        for j in range(dim):
            cols += [f"{name}_{i}{j}_re", f"{name}_{i}{j}_im"]
    return cols


def series_table(named: Sequence[tuple[str, GridSeries]]) -> tuple[list[str], np.ndarray]:
    """Columns t, then real/imag parts of every entry of every series."""
    grid = named[0][1].grid
    header = ["t"]
    blocks = [grid.nodes[:, None]]
    for name, s in named:
        header += series_columns(name, s.dim)
        flat = s.values.reshape(grid.n_nodes, -1)
        blocks.append(np.stack([flat.real, flat.imag], axis=-1).reshape(grid.n_nodes, -1))
    return header, np.hstack(blocks)
