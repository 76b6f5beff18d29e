"""
CSV/JSON input and output for series and periodogram matrices.

Matrix CSV layout::

    # expgram kind=ep n=200 normalized=0
    level,0.005,0.01,...,0.5
    0.05,<ordinates at alpha=0.05>
    ...

The header row holds frequencies ``f = nu/n`` (cycles per sample) and the
first column holds levels. Floats are written with 17 significant digits,
which round-trips IEEE doubles exactly.
"""
from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import PeriodogramMatrix

__all__ = [
    "InputError", "read_series_csv", "write_matrix_csv", "read_matrix_csv",
    "matrix_to_json", "atomic_write_text", "fmt",
]


class InputError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        where = f"{path}:{line}: " if path is not None and line is not None else (
            f"{path}: " if path is not None else "")
        super().__init__(where + message)
        self.path, self.line = path, line


def fmt(x) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path, text):
    """Write ``text`` to a temporary sibling of ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_float(cell):
    try:
        return float(cell)
    except ValueError:
        return None


def _data_rows(path):
    """Yield ``(line_number, cells)`` for non-blank, non-comment rows."""
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            yield lineno, [c.strip() for c in next(csv.reader([text]))]


def read_series_csv(path, column=None) -> np.ndarray:
    """Read one numeric column from a CSV file.

    A first row with any non-numeric cell is treated as a header. ``column``
    selects by header name or by 0-based index; without it the file must have
    a single column, or the last column is used when a header is present.
    Empty, ``nan`` or ``inf`` cells are errors that name their line.
    """
    rows = list(_data_rows(path))
    if not rows:
        raise InputError("no data rows", path)
    header = None
    first_line, first = rows[0]
    if any(_parse_float(c) is None for c in first):
        header, rows = first, rows[1:]
        if not rows:
            raise InputError("header but no data rows", path, first_line)
    width = len(header) if header else len(rows[0][1])
    if column is None:
        if width != 1 and header is None:
            raise InputError(f"{width} columns found; choose one with --column", path)
        idx = width - 1
    elif header is not None and column in header:
        idx = header.index(column)
    else:
        try:
            idx = int(column)
        except (TypeError, ValueError):
            raise InputError(f"no column named {column!r}", path, first_line) from None
        if not 0 <= idx < width:
            raise InputError(f"column index {idx} out of range (width {width})", path)
    values = []
    for lineno, cells in rows:
        if len(cells) <= idx:
            raise InputError(f"expected at least {idx + 1} cells, found {len(cells)}",
                             path, lineno)
        v = _parse_float(cells[idx])
        if v is None or not math.isfinite(v):
            raise InputError(f"non-numeric or non-finite value {cells[idx]!r}", path, lineno)
        values.append(v)
    return np.array(values)


def _matrix_text(pm: PeriodogramMatrix) -> str:
    lines = [f"# expgram kind={pm.kind} n={pm.n} normalized={int(pm.normalized)}",
             ",".join(["level"] + [fmt(f) for f in pm.freqs])]
    for lv, row in zip(pm.levels, pm.ordinates):
        lines.append(",".join([fmt(lv)] + [fmt(v) for v in row]))
    return "\n".join(lines) + "\n"


def write_matrix_csv(pm: PeriodogramMatrix, path):
    atomic_write_text(path, _matrix_text(pm))


def matrix_to_json(pm: PeriodogramMatrix) -> str:
    return json.dumps({
        "kind": pm.kind, "n": pm.n, "normalized": pm.normalized,
        "levels": pm.levels.tolist(), "freqs": pm.freqs.tolist(),
        "ordinates": pm.ordinates.tolist(),
        "converged": pm.converged.tolist()}, indent=1) + "\n"


def _infer_n(freqs, path):
    if freqs.size < 1 or freqs[0] <= 0:
        raise InputError("frequency header must start with a positive value", path)
    n = int(round(1.0 / freqs[0]))
    if n // 2 != freqs.size or not np.allclose(freqs, np.arange(1, freqs.size + 1) / n):
        raise InputError("frequency header is not a Fourier grid nu/n", path)
    return n


def read_matrix_csv(path) -> PeriodogramMatrix:
    """Inverse of :func:`write_matrix_csv`; raises :class:`InputError`."""
    meta = {}
    with open(path) as fh:
        for raw in fh:
            if raw.startswith("# expgram"):
                meta = dict(tok.split("=", 1) for tok in raw[1:].split()[1:] if "=" in tok)
                break
            if raw.strip() and not raw.startswith("#"):
                break
    rows = list(_data_rows(path))
    if len(rows) < 2:
        raise InputError("matrix needs a frequency header and at least one row", path)
    hline, header = rows[0]
    freqs = [_parse_float(c) for c in header[1:]]
    if any(f is None for f in freqs):
        raise InputError("non-numeric frequency in header", path, hline)
    freqs = np.array(freqs)
    n = int(meta["n"]) if "n" in meta else _infer_n(freqs, path)
    if freqs.size != n // 2:
        raise InputError(f"{freqs.size} frequencies but n={n} needs {n // 2}", path, hline)
    levels, cells = [], []
    for lineno, row in rows[1:]:
        if len(row) != freqs.size + 1:
            raise InputError(f"expected {freqs.size + 1} cells, found {len(row)}", path, lineno)
        vals = [_parse_float(c) for c in row]
        if any(v is None or not math.isfinite(v) for v in vals):
            raise InputError("non-numeric or non-finite cell", path, lineno)
        levels.append(vals[0])
        cells.append(vals[1:])
    try:
        return PeriodogramMatrix(n, np.array(levels), np.array(cells),
                                 normalized=meta.get("normalized", "0") == "1",
                                 kind=meta.get("kind", "ep"))
    except ValueError as err:
        raise InputError(str(err), path) from None
