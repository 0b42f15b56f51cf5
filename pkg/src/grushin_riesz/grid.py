"""Uniform tensor-grid functions, off-grid cubic sampling and the on-disk format.

File layout (little-endian)::

    GRUSHIN-GRID 1\\n
    <one line of JSON: {"axes": [[min, max, count], ...], "meta": {...}}>\\n
    <prod(counts) pairs of float64 (re, im) in row-major order>
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy import ndimage

MAGIC = b"GRUSHIN-GRID 1\n"


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a uniform tensor grid; the last axis is eta."""

    values: np.ndarray
    axes: tuple[tuple[float, float, int], ...]
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), int(c)) for lo, hi, c in self.axes)
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != tuple(c for _, _, c in axes):
            raise ValueError(f"values shape {vals.shape} does not match axes {axes}")
        for lo, hi, c in axes:
            if c < 2 or not hi > lo:
                raise ValueError(f"bad axis ({lo}, {hi}, {c})")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / (c - 1) for lo, hi, c in self.axes])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def coords(self, axis: int) -> np.ndarray:
        lo, hi, c = self.axes[axis]
        return np.linspace(lo, hi, c)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(self.coords(a) for a in range(self.ndim)), indexing="ij"))

    def points(self) -> np.ndarray:
        return np.stack([m.ravel() for m in self.mesh()], axis=-1)

    def with_values(self, values: np.ndarray, **meta) -> "GridFunction":
        return GridFunction(values, self.axes, {**self.meta, **meta})

    def sampler(self) -> "CubicSampler":
        return CubicSampler(self)

    @classmethod
    def from_function(cls, func, axes: Sequence[tuple[float, float, int]]) -> "GridFunction":
        axes = tuple(axes)
        coords = [np.linspace(lo, hi, c) for lo, hi, c in axes]
        mesh = np.meshgrid(*coords, indexing="ij")
        return cls(func(*mesh), axes)


class CubicSampler:
    """Separable cubic-spline interpolation with zero extension off the grid.

    The samples are padded with zeros before the spline prefilter, so the
    interpolant passes through every node (including the boundary ones) and
    continues smoothly into the zero extension.
    """

    PAD = 8  # spline coefficients decay by ~0.27 per cell into the padding

    def __init__(self, f: GridFunction):
        self.lo = np.array([lo for lo, _, _ in f.axes])
        self.h = f.spacing
        padded = np.pad(f.values, self.PAD)
        self._re = ndimage.spline_filter(padded.real, order=3, mode="mirror")
        self._im = ndimage.spline_filter(padded.imag, order=3, mode="mirror")
        self._real_only = not np.any(f.values.imag)

    def __call__(self, *coords) -> np.ndarray:
        """Sample at physical coordinates (one broadcastable array per axis)."""
        coords = np.broadcast_arrays(*coords)
        shape = coords[0].shape
        idx = np.stack([((c - lo) / h).ravel() + self.PAD for c, lo, h in zip(coords, self.lo, self.h)])
        kw = dict(order=3, mode="grid-constant", cval=0.0, prefilter=False)
        re = ndimage.map_coordinates(self._re, idx, **kw)
        if self._real_only:
            return re.reshape(shape).astype(complex)
        im = ndimage.map_coordinates(self._im, idx, **kw)
        return (re + 1j * im).reshape(shape)


def save_grid(path: str | Path, f: GridFunction, meta: dict | None = None) -> None:
    header = {"axes": [list(a) for a in f.axes], "meta": {**f.meta, **(meta or {})}}
    data = np.empty(f.values.shape + (2,), dtype="<f8")
    data[..., 0] = f.values.real
    data[..., 1] = f.values.imag
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(data.tobytes(order="C"))


def load_grid(path: str | Path) -> GridFunction:
    with open(path, "rb") as fh:
        if fh.readline() != MAGIC:
            raise ValueError(f"{path}: not a grid file")
        header = json.loads(fh.readline())
        raw = fh.read()
    axes = tuple(tuple(a) for a in header["axes"])
    shape = tuple(int(a[2]) for a in axes)
    data = np.frombuffer(raw, dtype="<f8")
    if data.size != 2 * int(np.prod(shape)):
        raise ValueError(f"{path}: payload size {data.size} does not match axes {shape}")
    data = data.reshape(shape + (2,))
    return GridFunction(data[..., 0] + 1j * data[..., 1], axes, header.get("meta", {}))


@lru_cache(maxsize=8)
def trapezoid_weights(axes: tuple[tuple[float, float, int], ...]) -> np.ndarray:
    """Tensor trapezoid weights for a uniform grid (read-only, cached)."""
    w = np.ones(())
    for lo, hi, c in axes:
        wa = np.full(c, (hi - lo) / (c - 1))
        wa[0] *= 0.5
        wa[-1] *= 0.5
        w = np.multiply.outer(w, wa)
    w.setflags(write=False)
    return w


def lp_norm(f: GridFunction, p: float, periodic_eta: bool = False) -> float:
    """L^p norm of the grid samples.

    Trapezoid weights on every axis by default.  With ``periodic_eta`` the
    last axis is treated as one full period of length count * spacing and gets
    equal weights, which is exact for trigonometric content in eta.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    w = trapezoid_weights(f.axes)
    if periodic_eta:
        lo, hi, c = f.axes[-1]
        w = np.multiply.outer(trapezoid_weights(f.axes[:-1]), np.full(c, (hi - lo) / (c - 1)))
    return float(np.sum(w * np.abs(f.values) ** p) ** (1.0 / p))
