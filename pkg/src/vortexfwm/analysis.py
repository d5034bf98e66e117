"""Measurements and fits on simulated fields and width data.

The fitting routines share the Levenberg-Marquardt core in :mod:`vortexfwm.lm`
and report JSON-ready dictionaries through ``to_dict``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.signal import find_peaks
from scipy.special import eval_genlaguerre, gammaln

from .beams import BeamSpec, auto_grid, rasterize
from .errors import FitError, LowContrastError, RankError, UndersampledGridError
from .fwm import LAMBDA_BLUE, blue_ring_radius, observed_blue_radius, product_waist
from .grid import ComplexFieldGrid
from .lm import FitResult, levenberg_marquardt
from .propagation import WidthScan, converter_waist, second_moment_radii, tilted_lens_image

__all__ = [
    "RingRadius",
    "FringeCount",
    "HyperbolaFit",
    "ModalSpectrum",
    "measure_ring_radius",
    "winding_number",
    "count_dark_fringes",
    "simulate_tilted_lens",
    "hyperbola",
    "fit_hyperbola",
    "fit_hyperbola_axis",
    "fit_radius_model",
    "blue_radius_model",
    "fit_blue_radius_model",
    "lg_basis_mode",
    "lg_decompose",
]


class RingRadius(NamedTuple):
    radius: float
    uncertainty: float
    is_ring: bool


class FringeCount(NamedTuple):
    count: int
    sign: int


def _centroid(field: ComplexFieldGrid):
    inten = field.intensity
    p = inten.sum()
    if p == 0:
        raise ValueError("field is identically zero")
    cx = inten.sum(axis=0) @ field.x / p
    cy = inten.sum(axis=1) @ field.y / p
    return float(cx), float(cy)


# -- ring radius ----------------------------------------------------------------


def measure_ring_radius(field: ComplexFieldGrid) -> RingRadius:
    """Ring radius from the peak of the azimuthally averaged intensity.

    Radii are taken about the intensity centroid, binned one pixel wide, and
    the peak bin is refined with a 3-point parabola. A profile that peaks in
    the central bin (a Gaussian) is returned as radius 0 with ``is_ring`` false.

    Returns
    -------
    RingRadius
        ``uncertainty`` combines half a pixel with the spread between 3-point
        and 5-point peak estimates.
    """
    if not field.isotropic:
        raise ValueError("ring radius needs square pixels; use resample_isotropic first")
    cx, cy = _centroid(field)
    half = field.n * field.pitch / 2
    if max(abs(cx), abs(cy)) > half / 4:
        raise ValueError("beam centroid is more than N/8 pixels from the grid centre")
    X, Y = field.mesh()
    r = np.hypot(X - cx, Y - cy).ravel()
    inten = field.intensity.ravel()
    dr = field.pitch
    nbins = field.n // 2
    idx = np.minimum((r / dr).astype(int), nbins)
    counts = np.bincount(idx, minlength=nbins + 1)[:nbins]
    s_i = np.bincount(idx, inten, minlength=nbins + 1)[:nbins]
    s_r = np.bincount(idx, r, minlength=nbins + 1)[:nbins]
    ok = counts > 0
    rb = s_r[ok] / counts[ok]
    prof = s_i[ok] / counts[ok]
    i = int(np.argmax(prof))
    if i == 0:
        return RingRadius(0.0, dr / 2, False)
    if i >= len(prof) - 1:
        raise ValueError("ring peak lies at the grid edge")
    # vertex of the parabola through three (possibly non-uniform) points
    c3 = np.polyfit(rb[i - 1 : i + 2], prof[i - 1 : i + 2], 2)
    r3 = -c3[1] / (2 * c3[0]) if c3[0] < 0 else rb[i]
    lo, hi = max(i - 2, 0), min(i + 3, len(prof))
    c5 = np.polyfit(rb[lo:hi], prof[lo:hi], 2)
    r5 = -c5[1] / (2 * c5[0]) if c5[0] < 0 else r3
    return RingRadius(float(r3), float(np.hypot(dr / 2, r3 - r5)), True)


def winding_number(field: ComplexFieldGrid, radius: float, samples: int | None = None) -> int:
    """Net phase winding of the field around a circle about the centroid."""
    cx, cy = _centroid(field)
    if samples is None:
        samples = max(256, 8 * int(2 * np.pi * radius / min(field.pitch, field.pitch_y)))
    t = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    xs, ys = cx + radius * np.cos(t), cy + radius * np.sin(t)
    coords = [ys / field.pitch_y + field.n // 2, xs / field.pitch + field.n // 2]
    e = map_coordinates(field.field.real, coords, order=1) + 1j * map_coordinates(field.field.imag, coords, order=1)
    dphi = np.angle(np.roll(e, -1) * np.conj(e))
    return int(round(dphi.sum() / (2 * np.pi)))


# -- tilted-lens fringes --------------------------------------------------------


def _diagonal_profile(field, inten, centre, angle, nsamp):
    c, s = np.cos(angle), np.sin(angle)
    hx = field.n // 2 * field.pitch
    hy = field.n // 2 * field.pitch_y
    umax = 0.98 * min(hx / abs(c), hy / abs(s))
    u = np.linspace(-umax, umax, nsamp)
    xs, ys = centre[0] + u * c, centre[1] + u * s
    coords = [ys / field.pitch_y + field.n // 2, xs / field.pitch + field.n // 2]
    return u, map_coordinates(inten, coords, order=1, cval=0.0)


def _projected_variance(field, inten, centre, angle):
    X, Y = field.mesh()
    u = (X - centre[0]) * np.cos(angle) + (Y - centre[1]) * np.sin(angle)
    return float(np.sum(inten * u**2) / inten.sum())


def count_dark_fringes(
    field: ComplexFieldGrid,
    lens_axes: float = 0.0,
    prominence: float = 0.2,
    anisotropy: float = 1.5,
) -> FringeCount:
    """Count the dark fringes of a tilted-lens vortex pattern.

    The pattern is a chain of lobes along one diagonal of the lens axes. The
    intensity (normalised to its maximum) is sampled along both diagonals
    through the centroid; the one with the larger second moment carries the
    chain, and its local minima with a relative prominence of at least
    ``prominence`` against the lower neighbouring maximum are counted.

    Parameters
    ----------
    field : ComplexFieldGrid
        Field near the observation plane of the tilted lens.
    lens_axes : float
        Orientation [rad] of the lens focal axes relative to the grid x axis.
    prominence : float
        Minimum fringe depth relative to the lower of its two neighbouring maxima.
    anisotropy : float
        Minimum ratio of the diagonal second moments for a pattern to count as
        a fringe chain. Round patterns (Gaussian, unconverted ring) give 0.

    Returns
    -------
    FringeCount
        ``sign`` is +1 when the chain lies along ``lens_axes - 45 deg``
        (positive ``ell`` with the lens conventions of this package), -1 on the
        other diagonal and 0 when no chain is found.

    Raises
    ------
    LowContrastError
        Elongated pattern with no minimum above the prominence threshold.
    """
    if field.has_curvature:
        field = field.replace(curvature=(0.0, 0.0))  # phase only, intensity unchanged
    inten = field.intensity
    inten = inten / inten.max()
    centre = _centroid(field)
    angles = (lens_axes - np.pi / 4, lens_axes + np.pi / 4)
    var = [_projected_variance(field, inten, centre, a) for a in angles]
    if max(var) / min(var) < anisotropy:
        return FringeCount(0, 0)
    k = int(np.argmax(var))
    sign = 1 if k == 0 else -1
    u, prof = _diagonal_profile(field, inten, centre, angles[k], 4 * field.n)
    prof = prof / prof.max()
    support = np.flatnonzero(prof > 0.05)
    prof = prof[support[0] : support[-1] + 1]
    maxima, _ = find_peaks(np.concatenate(([0.0], prof, [0.0])))
    maxima -= 1
    count = 0
    for a, b in zip(maxima[:-1], maxima[1:]):
        floor = prof[a : b + 1].min()
        top = min(prof[a], prof[b])
        if top > 0 and (top - floor) / top >= prominence:
            count += 1
    if count == 0:
        raise LowContrastError(f"no dark fringe reaches the {prominence:.0%} prominence threshold")
    return FringeCount(count, sign)


def simulate_tilted_lens(ell: int, wavelength: float = LAMBDA_BLUE, f: float = 0.5, tilt: float = np.radians(25), **kw):
    """Pure LG beam through a tilted lens, sized so the line foci are one
    Rayleigh range either side of the observation plane.

    Returns the same ``(grid, distance)`` pair as ``tilted_lens_image``.
    """
    w = converter_waist(f, tilt, wavelength)
    spec = BeamSpec(wavelength, w, ell)
    g = rasterize(spec, auto_grid(spec, expansion=2.2))
    return tilted_lens_image(g, f, tilt, **kw)


# -- hyperbola fits -------------------------------------------------------------


def _ring_factor(ell):
    return np.sqrt(abs(ell) / 2) if ell else 1.0


def hyperbola(z, w0, z0, zr, ell=0):
    """Ring (or Gaussian) radius versus z for a mode of waist ``w0`` at ``z0``."""
    z = np.asarray(z, dtype=float)
    return _ring_factor(ell) * w0 * np.sqrt(1 + ((z - z0) / zr) ** 2)


@dataclass
class HyperbolaFit:
    """Fitted waist, waist position, Rayleigh range and beam quality of one axis."""

    w0: float
    z0: float
    zr: float
    m2: float
    covariance: np.ndarray
    rms: float
    converged: bool
    iterations: int
    n_points: int
    axis: str = ""

    @property
    def sigmas(self) -> dict:
        s = np.sqrt(np.clip(np.diag(self.covariance), 0, None))
        # delta method for M^2 = pi w0^2 / (lambda zR)
        g = np.array([2 * self.m2 / self.w0, 0.0, -self.m2 / self.zr])
        sm2 = float(np.sqrt(max(g @ self.covariance @ g, 0.0)))
        return {"w0": float(s[0]), "z0": float(s[1]), "zR": float(s[2]), "M2": sm2}

    def to_dict(self) -> dict:
        return {
            "model": f"hyperbola-{self.axis}" if self.axis else "hyperbola",
            "params": {"w0": self.w0, "z0": self.z0, "zR": self.zr, "M2": self.m2},
            "sigmas": self.sigmas,
            "rms": self.rms,
            "converged": self.converged,
            "n_points": self.n_points,
        }


def fit_hyperbola_axis(z, radius, wavelength: float, ell: int, axis: str = "") -> HyperbolaFit:
    """Least-squares hyperbola for one set of radii.

    Seeded from the narrowest point and a two-point Rayleigh-range estimate
    using the point farthest from it.
    """
    z = np.asarray(z, dtype=float)
    rad = np.asarray(radius, dtype=float)
    if z.size < 5:
        raise ValueError(f"need at least 5 scan points, got {z.size}")
    if z.shape != rad.shape:
        raise ValueError("z and radius must have equal shapes")
    fac = _ring_factor(ell)
    i = int(np.argmin(rad))
    w0, z0 = rad[i] / fac, z[i]
    j = int(np.argmax(np.abs(z - z0)))
    ratio = rad[j] / rad[i]
    zr = abs(z[j] - z0) / np.sqrt(ratio**2 - 1) if ratio > 1 + 1e-9 else np.ptp(z)
    span = np.ptp(z)

    def resid(p):
        return hyperbola(z, p[0], p[1], p[2], ell) - rad

    try:
        res = levenberg_marquardt(
            resid,
            [w0, z0, zr],
            names=("w0", "z0", "zR"),
            model="hyperbola",
            positive=[True, False, True],
            scale=[w0, max(zr, span), zr],
            data_scale=float(np.max(np.abs(rad))),
        )
    except FitError as exc:
        exc.best = _to_hyperbola(exc.best, wavelength, axis)
        raise
    out = _to_hyperbola(res, wavelength, axis)
    if span < out.zr:
        raise FitError(
            f"scan span {span:.4g} m is shorter than the fitted Rayleigh range {out.zr:.4g} m", best=out
        )
    return out


def _to_hyperbola(res: FitResult, wavelength, axis):
    w0, z0, zr = (float(v) for v in res.params)
    w0 = abs(w0)
    zr = abs(zr)
    return HyperbolaFit(
        w0, z0, zr, np.pi * w0**2 / (wavelength * zr), res.covariance, res.rms, res.converged,
        res.iterations, res.n_points, axis,
    )


def fit_hyperbola(scan: WidthScan, wavelength: float, ell: int):
    """Fit both axes of a width scan; returns ``(vertical, horizontal)``."""
    return (
        fit_hyperbola_axis(scan.z, scan.vertical, wavelength, ell, "vertical"),
        fit_hyperbola_axis(scan.z, scan.horizontal, wavelength, ell, "horizontal"),
    )


# -- radius-model fits -----------------------------------------------------------


def fit_radius_model(data) -> FitResult:
    """Linear fit of ``R = R0 (1 + beta |l|)`` to ``(ell, R)`` pairs."""
    arr = np.asarray(data, dtype=float).reshape(-1, 2)
    ells = np.abs(arr[:, 0])
    rad = arr[:, 1]
    if np.any(ells == 0):
        raise ValueError("the radius model has no ell = 0 point")
    if np.unique(ells).size < 3:
        raise RankError(f"need at least 3 distinct |ell|, got {np.unique(ells).size}")
    A = np.column_stack([np.ones_like(ells), ells])
    (a, b), *_ = np.linalg.lstsq(A, rad, rcond=None)
    resid = A @ np.array([a, b]) - rad
    dof = len(rad) - 2
    s2 = resid @ resid / dof if dof > 0 else 0.0
    cov_ab = s2 * np.linalg.inv(A.T @ A)
    J = np.array([[1.0, 0.0], [-b / a**2, 1 / a]])
    return FitResult(
        "radius-linear", ("R0", "beta"), np.array([a, b / a]), J @ cov_ab @ J.T,
        float(np.sqrt(np.mean(resid**2))), 1, True, len(rad),
    )


def blue_radius_model(ells, w1, r0, beta, z_b, lambda_b=LAMBDA_BLUE):
    """Observed blue ring radius at distance ``z_b`` from the product-field waist."""
    out = []
    for ell in np.atleast_1d(ells):
        a = abs(int(ell))
        ring = r0 * (1 + beta * a)
        w2 = ring / np.sqrt(a / 2)
        out.append(observed_blue_radius(blue_ring_radius(ring, a, w1), a, product_waist(w1, w2), z_b, lambda_b))
    return np.array(out)


def fit_blue_radius_model(data, z_b: float, beta: float, lambda_b: float = LAMBDA_BLUE, initial=None) -> FitResult:
    """Fit ``(w1, R0)`` to blue ring radii measured at ``z_b``.

    Without ``initial`` the fit starts from the best point of a coarse
    logarithmic grid over w1 in [10 um, 3 mm] and R0 in [5 um, 1 mm].
    """
    arr = np.asarray(data, dtype=float).reshape(-1, 2)
    ells = np.abs(arr[:, 0]).astype(int)
    rad = arr[:, 1]
    if np.any(ells == 0):
        raise ValueError("the blue radius model has no ell = 0 point")
    if np.unique(ells).size < 4:
        raise RankError(f"need at least 4 distinct |ell|, got {np.unique(ells).size}")

    def resid(p):
        return blue_radius_model(ells, p[0], p[1], beta, z_b, lambda_b) - rad

    if initial is None:
        best = None
        for w1 in np.geomspace(10e-6, 3e-3, 36):
            for r0 in np.geomspace(5e-6, 1e-3, 36):
                c = float(np.sum(resid((w1, r0)) ** 2))
                if best is None or c < best[0]:
                    best = (c, w1, r0)
        initial = best[1:]
    return levenberg_marquardt(resid, initial, names=("w1", "R0"), model="blue-radius", positive=[True, True],
        data_scale=float(np.max(np.abs(rad))),
    )


# -- modal decomposition --------------------------------------------------------


@dataclass
class ModalSpectrum:
    """LG_{p,l} expansion coefficients of a field at a stated basis waist."""

    ell: int
    basis_waist: float
    coefficients: np.ndarray
    total_power: float

    @property
    def mode_powers(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def purity(self) -> float:
        pw = self.mode_powers
        return float(pw[0] / pw.sum()) if pw.sum() > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "basis_waist": self.basis_waist,
            "mode_powers": [float(v) for v in self.mode_powers],
            "purity": self.purity,
            "total_power": self.total_power,
        }


def lg_basis_mode(p: int, ell: int, w: float, X, Y):
    """Unit-power LG_{p,l} mode at its waist on coordinates ``X, Y``."""
    a = abs(ell)
    r2 = (X**2 + Y**2) / w**2
    log_norm = 0.5 * (np.log(2 / np.pi) + gammaln(p + 1) - gammaln(p + a + 1)) - np.log(w)
    with np.errstate(divide="ignore"):
        radial = np.exp(log_norm + 0.5 * a * np.log(2 * r2) - r2) if a else np.exp(log_norm - r2)
    return radial * eval_genlaguerre(p, a, 2 * r2) * np.exp(1j * ell * np.arctan2(Y, X))


def _project(field, ell, w, p_max, X, Y, da):
    return np.array(
        [np.vdot(lg_basis_mode(p, ell, w, X, Y), field.field) * da for p in range(p_max + 1)]
    )


def _golden_max(f, lo, hi, tol=1e-5, iters=80):
    g = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if (b - a) <= tol * (b + a) / 2:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2


def lg_decompose(field: ComplexFieldGrid, ell: int, basis_waist: float | None = None, p_max: int = 10) -> ModalSpectrum:
    """Project a field onto LG_{p,l} modes, p = 0..p_max, centred on the grid.

    Parameters
    ----------
    basis_waist : float, optional
        Basis waist [m]. When omitted it is the waist maximising |c_0|^2,
        found by golden-section search around the second-moment estimate.

    Raises
    ------
    UndersampledGridError
        If the grid cannot represent the highest basis mode.
    """
    if p_max < 5:
        raise ValueError("p_max must be at least 5")
    if field.has_curvature:
        field = field.materialize()
    X, Y = field.mesh()
    da = field.pitch * field.pitch_y
    a = abs(ell)
    if basis_waist is None:
        rx, ry = second_moment_radii(field)
        guess = np.sqrt((rx**2 + ry**2) / 2) / np.sqrt(a + 1)
        basis_waist = _golden_max(lambda w: abs(_project(field, ell, w, 0, X, Y, da)[0]) ** 2, guess / 2, guess * 2)
    # the highest mode reaches r ~ w sqrt(2 p + |l| + 1) with ~p radial zeros
    reach = basis_waist * np.sqrt(2 * p_max + a + 1)
    if max(field.pitch, field.pitch_y) > reach / (4 * (p_max + 1) ** 0.5 * np.sqrt(2)) or min(
        field.n * field.pitch, field.n * field.pitch_y
    ) / 2 < 1.5 * reach:
        raise UndersampledGridError(f"grid cannot resolve LG modes up to p = {p_max} at waist {basis_waist:.4g} m")
    coeffs = _project(field, ell, basis_waist, p_max, X, Y, da)
    return ModalSpectrum(int(ell), float(basis_waist), coeffs, field.power())
