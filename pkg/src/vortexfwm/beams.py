"""Closed-form Gaussian and one-ring Laguerre-Gaussian beams.

Conventions
-----------
* SI units throughout (m, W, Hz).
* Fields carry ``exp(i(kz - wt))``: propagation phase ``+k z``, curvature
  phase ``+k r^2 / 2R(z)`` and Gouy phase ``-(|l| + 1) atan(z / z_R)``.
* Positive ``ell`` means the phase ``ell * theta`` grows counterclockwise,
  with ``theta = atan2(y, x)`` and y along the array rows.
* Modes are normalised so that the transverse integral of |E|^2 equals the
  beam power.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import NoRingError, ResonanceError, UndersampledGridError, UnsupportedModeError
from .grid import ComplexFieldGrid, GridParams, coordinates

__all__ = [
    "BeamSpec",
    "RadiusModel",
    "RabiBudget",
    "RabiReport",
    "lg_field_amplitude",
    "intensity_radial",
    "beam_width",
    "ring_radius",
    "waist_from_ring",
    "rayleigh_range",
    "radius_model",
    "rasterize",
    "sampling_limits",
    "auto_grid",
    "rabi_at_radius",
    "effective_two_photon_rabi",
]


@dataclass(frozen=True)
class BeamSpec:
    """One paraxial beam.

    Parameters
    ----------
    wavelength : float
        Vacuum wavelength [m].
    waist : float
        1/e^2 Gaussian waist w0 of the mode [m]. For a vortex the ring
        radius at the waist is ``waist * sqrt(|ell| / 2)``.
    ell : int
        Signed azimuthal index.
    power : float
        Beam power [W].
    z0 : float
        Longitudinal position of the waist [m].
    p : int
        Radial index; only 0 is supported.
    """

    wavelength: float
    waist: float
    ell: int = 0
    power: float = 1.0
    z0: float = 0.0
    p: int = 0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not self.waist > 0:
            raise ValueError(f"waist must be positive, got {self.waist}")
        if not self.power >= 0:
            raise ValueError(f"power must be non-negative, got {self.power}")
        if int(self.ell) != self.ell:
            raise ValueError(f"ell must be an integer, got {self.ell}")
        object.__setattr__(self, "ell", int(self.ell))
        if self.p != 0:
            raise UnsupportedModeError(f"only one-ring modes (p = 0) are supported, got p = {self.p}")

    @classmethod
    def from_ring_radius(cls, wavelength, ring, ell, power=1.0, z0=0.0):
        """Build a vortex from its ring radius at the waist."""
        return cls(wavelength, waist_from_ring(ring, ell), ell, power, z0)

    @property
    def wavenumber(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def rayleigh_range(self) -> float:
        return rayleigh_range(self)


@dataclass(frozen=True)
class RadiusModel:
    """Linear ring-radius law ``R(l) = r0 * (1 + beta * |l|)``."""

    r0: float = 0.045e-3
    beta: float = 0.51

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")


@dataclass(frozen=True)
class RabiBudget:
    """Inputs for the two-photon Rabi estimate; all frequencies in one unit."""

    omega1_peak: float
    omega2_peak: float
    detuning: float
    radius: float
    waist1: float

    def __post_init__(self):
        if self.detuning == 0:
            raise ResonanceError("detuning must be non-zero")
        if not self.waist1 > 0:
            raise ValueError("waist1 must be positive")


class RabiReport(NamedTuple):
    omega1: float
    effective: float
    adiabaticity: float


def rayleigh_range(spec: BeamSpec) -> float:
    """pi w0^2 / lambda."""
    return np.pi * spec.waist**2 / spec.wavelength


def beam_width(spec: BeamSpec, z=None):
    """Gaussian width w(z) of the mode at absolute position ``z``."""
    if z is None:
        z = spec.z0
    dz = np.asarray(z, dtype=float) - spec.z0
    return spec.waist * np.sqrt(1 + (dz / rayleigh_range(spec)) ** 2)


def ring_radius(spec: BeamSpec) -> float:
    """Radius of peak intensity at the waist, w0 sqrt(|l|/2)."""
    if spec.ell == 0:
        raise NoRingError("a Gaussian (ell = 0) has no ring")
    return spec.waist * np.sqrt(abs(spec.ell) / 2)


def waist_from_ring(ring: float, ell: int) -> float:
    """Inverse of ``ring_radius``."""
    if ell == 0:
        raise NoRingError("a Gaussian (ell = 0) has no ring")
    if not ring > 0:
        raise ValueError(f"ring radius must be positive, got {ring}")
    return ring / np.sqrt(abs(ell) / 2)


def radius_model(ell: int, model: RadiusModel) -> float:
    """Ring radius of the input vortex for index ``ell``; even in ``ell``."""
    if ell == 0:
        raise NoRingError("the radius model is undefined for ell = 0")
    return model.r0 * (1 + model.beta * abs(ell))


def _log_radial_amplitude(spec, r, w):
    # log of |E| for the p = 0 mode; the l = 0 limit of l*log(...) is 0
    a = abs(spec.ell)
    r = np.asarray(r, dtype=float)
    log_pref = 0.5 * (np.log(2 * spec.power / np.pi) - 2 * np.log(w) - gammaln(a + 1))
    with np.errstate(divide="ignore"):
        log_r = np.log(np.sqrt(2) * r / w) if a else 0.0
    return log_pref + a * log_r - (r / w) ** 2


def lg_field_amplitude(spec: BeamSpec, r, theta, z=None):
    """Complex amplitude [sqrt(W)/m] of the one-ring LG mode.

    Parameters
    ----------
    spec : BeamSpec
    r, theta : array_like
        Polar transverse coordinates.
    z : float or array_like, optional
        Absolute longitudinal position; defaults to the waist.
    """
    if z is None:
        z = spec.z0
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    dz = np.asarray(z, dtype=float) - spec.z0
    zr = rayleigh_range(spec)
    w = spec.waist * np.sqrt(1 + (dz / zr) ** 2)
    if spec.power == 0:
        return np.zeros(np.broadcast(r, theta, dz).shape, dtype=complex)
    amp = np.exp(_log_radial_amplitude(spec, r, w))
    k = spec.wavenumber
    # k r^2 / 2R(z) written without R so the waist gives a flat front
    curvature = k * r**2 * dz / (2 * (dz**2 + zr**2))
    gouy = (abs(spec.ell) + 1) * np.arctan(dz / zr)
    phase = k * dz + spec.ell * theta + curvature - gouy
    return amp * np.exp(1j * phase)


def intensity_radial(spec: BeamSpec, r, z=None):
    """Intensity [W/m^2] of the mode at radius ``r`` and position ``z``."""
    if spec.power == 0:
        return np.zeros_like(np.asarray(r, dtype=float))
    w = beam_width(spec, z)
    return np.exp(2 * _log_radial_amplitude(spec, r, w))


def sampling_limits(spec: BeamSpec, z=None):
    """Largest admissible pitch and smallest admissible full extent at ``z``.

    The pitch must resolve the Gaussian width (w/8) and, for a vortex, the
    azimuthal winding at the ring (R/(4|l|)). The grid must span six times the
    larger of width and ring radius.
    """
    w = float(beam_width(spec, z))
    size = w
    max_pitch = w / 8
    if spec.ell:
        ring = w * np.sqrt(abs(spec.ell) / 2)
        size = max(size, ring)
        max_pitch = min(max_pitch, ring / (4 * abs(spec.ell)))
    return max_pitch, 6 * size


def auto_grid(spec: BeamSpec, expansion: float = 1.0, guard: float = 3.0, n_min: int = 256) -> GridParams:
    """Smallest power-of-two grid that samples ``spec`` at its waist and still
    holds the beam after it has expanded by ``expansion``.

    The half-extent is ``guard`` times the expanded second-moment radius
    ``w * sqrt(|l| + 1)``, with a 5 % margin.
    """
    max_pitch, min_extent = sampling_limits(spec)
    half = max(1.05 * guard * expansion * spec.waist * np.sqrt(abs(spec.ell) + 1), min_extent / 2)
    n = n_min
    while 2 * half / n > max_pitch:
        n *= 2
    return GridParams(n, 2 * half / n)


def rasterize(spec: BeamSpec, grid: GridParams, z=None, check=True) -> ComplexFieldGrid:
    """Sample ``lg_field_amplitude`` on a centred square grid."""
    if z is None:
        z = spec.z0
    if check:
        max_pitch, min_extent = sampling_limits(spec, z)
        if grid.pitch > max_pitch * (1 + 1e-12):
            raise UndersampledGridError(
                f"pitch {grid.pitch:.4g} m exceeds sampling limit {max_pitch:.4g} m for ell={spec.ell}"
            )
        if grid.extent < min_extent * (1 - 1e-12):
            raise UndersampledGridError(
                f"grid extent {grid.extent:.4g} m is below the required {min_extent:.4g} m"
            )
    x = coordinates(grid.n, grid.pitch)
    X, Y = np.meshgrid(x, x)
    field = lg_field_amplitude(spec, np.hypot(X, Y), np.arctan2(Y, X), z)
    return ComplexFieldGrid(field, grid.pitch, spec.wavelength, float(z))


def rabi_at_radius(omega_peak, r, w):
    """Rabi frequency of a Gaussian beam of waist ``w`` at radius ``r``.

    The Rabi frequency follows the field amplitude, exp(-r^2/w^2).
    """
    if not w > 0:
        raise ValueError("waist must be positive")
    return omega_peak * np.exp(-((np.asarray(r, dtype=float) / w) ** 2))


def effective_two_photon_rabi(b: RabiBudget) -> RabiReport:
    """Two-photon Rabi frequency Omega1(r) Omega2 / (2 delta).

    Also returns the adiabaticity ratio Omega1(r)^2 / delta^2 that controls the
    intermediate-level population.
    """
    if b.detuning == 0:
        raise ResonanceError("detuning must be non-zero")
    omega1 = float(rabi_at_radius(b.omega1_peak, b.radius, b.waist1))
    effective = omega1 * b.omega2_peak / (2 * b.detuning)
    return RabiReport(omega1, effective, (omega1 / b.detuning) ** 2)
