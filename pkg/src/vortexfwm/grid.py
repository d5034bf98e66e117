"""Sampled complex field on a square grid, plus the raw binary dump format.

Array layout is ``field[row, col]`` with rows along y and columns along x.
The physical coordinate of index ``j`` is ``(j - N // 2) * pitch`` so the
origin sits on a pixel, which keeps FFT-based propagation free of half-pixel
shifts.

A grid may carry a *pending* quadratic phase
``exp(-i*pi*(cx*x**2 + cy*y**2)/wavelength)`` in ``curvature = (cx, cy)``.
This is how lenses are represented: the phase is exact and analytic, so it is
never aliased by the sampling. ``materialize`` bakes it into the samples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path

import numpy as np

__all__ = [
    "ComplexFieldGrid",
    "GridParams",
    "coordinates",
    "write_grid_dump",
    "read_grid_dump",
]

DUMP_MAGIC = b"OFGD"
# magic, N, pitch, wavelength, z
_HEADER = struct.Struct("<4sIddd")


@dataclass(frozen=True)
class GridParams:
    """Square sampling geometry: ``n`` samples per side at ``pitch`` metres."""

    n: int = 2048
    pitch: float = 4e-6

    def __post_init__(self):
        if self.n < 256 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 256, got {self.n}")
        if not self.pitch > 0:
            raise ValueError(f"grid pitch must be positive, got {self.pitch}")

    @property
    def extent(self) -> float:
        """Full side length N * pitch."""
        return self.n * self.pitch

    @property
    def half_extent(self) -> float:
        return self.n * self.pitch / 2


def coordinates(n: int, pitch: float) -> np.ndarray:
    """1D sample positions, origin at index ``n // 2``."""
    return (np.arange(n) - n // 2) * pitch


@dataclass(frozen=True, eq=False)
class ComplexFieldGrid:
    """N x N complex amplitudes in sqrt(W)/m.

    Parameters
    ----------
    field : ndarray
        Complex samples, shape (N, N).
    pitch : float
        Sample spacing along x in metres.
    wavelength : float
        Vacuum wavelength in metres.
    z : float
        Longitudinal position in metres.
    pitch_y : float, optional
        Sample spacing along y; defaults to ``pitch``. Differs from ``pitch``
        only after propagating through an astigmatic lens.
    curvature : (float, float)
        Pending quadratic phase coefficients (cx, cy) in 1/m.
    """

    field: np.ndarray
    pitch: float
    wavelength: float
    z: float = 0.0
    pitch_y: float | None = None
    curvature: tuple[float, float] = dc_field(default=(0.0, 0.0))

    def __post_init__(self):
        a = np.asarray(self.field)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"field must be square 2D, got shape {a.shape}")
        n = a.shape[0]
        if n < 256 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 256, got {n}")
        if not (self.pitch > 0 and self.wavelength > 0):
            raise ValueError("pitch and wavelength must be positive")
        if self.pitch_y is None:
            object.__setattr__(self, "pitch_y", float(self.pitch))
        elif not self.pitch_y > 0:
            raise ValueError("pitch_y must be positive")
        object.__setattr__(self, "field", a.astype(np.complex128, copy=False))
        object.__setattr__(self, "curvature", (float(self.curvature[0]), float(self.curvature[1])))

    @property
    def n(self) -> int:
        return self.field.shape[0]

    @property
    def isotropic(self) -> bool:
        return np.isclose(self.pitch, self.pitch_y, rtol=1e-12, atol=0.0)

    @property
    def has_curvature(self) -> bool:
        return self.curvature != (0.0, 0.0)

    @property
    def x(self) -> np.ndarray:
        return coordinates(self.n, self.pitch)

    @property
    def y(self) -> np.ndarray:
        return coordinates(self.n, self.pitch_y)

    def mesh(self):
        """Return (X, Y) coordinate arrays matching ``field``."""
        return np.meshgrid(self.x, self.y)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    def power(self) -> float:
        """Discrete power sum |E|^2 dx dy in watts."""
        return float(np.sum(self.intensity) * self.pitch * self.pitch_y)

    def replace(self, **changes) -> "ComplexFieldGrid":
        return replace(self, **changes)

    def materialize(self) -> "ComplexFieldGrid":
        """Return the same field with any pending curvature applied to the samples."""
        if not self.has_curvature:
            return self
        cx, cy = self.curvature
        x, y = self.x, self.y
        phase = np.exp(-1j * np.pi * cy * y**2 / self.wavelength)[:, None] * np.exp(
            -1j * np.pi * cx * x**2 / self.wavelength
        )[None, :]
        return replace(self, field=self.field * phase, curvature=(0.0, 0.0))

    def same_geometry(self, other: "ComplexFieldGrid") -> bool:
        return (
            self.n == other.n
            and np.isclose(self.pitch, other.pitch, rtol=1e-12, atol=0.0)
            and np.isclose(self.pitch_y, other.pitch_y, rtol=1e-12, atol=0.0)
        )


def write_grid_dump(grid: ComplexFieldGrid, path) -> Path:
    """Write ``grid`` in the little-endian OFGD raw format.

    Header (32 bytes): magic ``b"OFGD"``, N as uint32, pitch (m) as float64,
    wavelength (m) as float64, z (m) as float64. Body: N*N interleaved
    (re, im) float64 pairs in row-major order. Pending curvature is applied
    before writing; anisotropic grids are rejected.
    """
    if not grid.isotropic:
        raise ValueError("dump format stores a single pitch; resample the grid first")
    g = grid.materialize()
    path = Path(path)
    body = np.ascontiguousarray(g.field, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DUMP_MAGIC, g.n, g.pitch, g.wavelength, g.z))
        fh.write(body.tobytes(order="C"))
    return path


def read_grid_dump(path) -> ComplexFieldGrid:
    """Read a grid written by ``write_grid_dump``."""
    raw = Path(path).read_bytes()
    magic, n, pitch, wavelength, z = _HEADER.unpack_from(raw, 0)
    if magic != DUMP_MAGIC:
        raise ValueError(f"not an OFGD dump: magic {magic!r}")
    expected = _HEADER.size + 16 * n * n
    if len(raw) != expected:
        raise ValueError(f"dump length {len(raw)} does not match N={n} (expected {expected})")
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(n, n)
    return ComplexFieldGrid(data.astype(np.complex128), pitch, wavelength, z)
