"""Plain-text field files.

Format::

    d K N_t T real
    j k_1 ... k_d re im
    ...

The header holds the dimension, truncation, number of time steps, final time
and the reality flag (``1``/``0``).  A spatial field is written with
``N_t = 0`` and ``T = 0``.  One body line per (time index, mode), modes in
lexicographic order, floats in ``repr`` form so reading is exact.
"""

from __future__ import annotations

import itertools
from pathlib import Path
from typing import TextIO

import numpy as np

from .spectral import SpaceTimeField, SpectralField


def dumps(f: SpectralField | SpaceTimeField) -> str:
    spatial = isinstance(f, SpectralField)
    d, K = f.d, f.K
    N_t, T = (0, 0.0) if spatial else (f.N_t, f.T)
    data = f.coeffs[None] if spatial else f.coeffs
    lines = [f"{d} {K} {N_t} {T!r} {int(f.real)}"]
    modes = list(itertools.product(range(-K, K + 1), repeat=d))
    for j in range(N_t + 1):
        block = data[j]
        for k in modes:
            c = block[tuple(x + K for x in k)]
            ks = " ".join(str(x) for x in k)
            lines.append(f"{j} {ks} {float(c.real)!r} {float(c.imag)!r}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> SpectralField | SpaceTimeField:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty field file")
    head = rows[0]
    if len(head) != 5:
        raise ValueError(f"bad header {' '.join(head)!r}")
    d, K, N_t = int(head[0]), int(head[1]), int(head[2])
    T, real = float(head[3]), bool(int(head[4]))
    data = np.zeros((N_t + 1,) + (2 * K + 1,) * d, dtype=complex)
    body = rows[1:]
    if len(body) != data.size:
        raise ValueError(f"expected {data.size} coefficient lines, got {len(body)}")
    for row in body:
        if len(row) != d + 3:
            raise ValueError(f"bad coefficient line {' '.join(row)!r}")
        j = int(row[0])
        idx = tuple(int(x) + K for x in row[1 : 1 + d])
        data[(j,) + idx] = complex(float(row[-2]), float(row[-1]))
    if N_t == 0:
        return SpectralField(data[0], real)
    return SpaceTimeField(data, T, real)


def write_field(path: str | Path | TextIO, f: SpectralField | SpaceTimeField) -> None:
    text = dumps(f)
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text)


def read_field(path: str | Path) -> SpectralField | SpaceTimeField:
    return loads(Path(path).read_text())
