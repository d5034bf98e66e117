"""Analytic and grid-based paraxial propagation.

Grid propagation uses the angular-spectrum transfer function. Fields that
carry a pending lens phase (see ``ComplexFieldGrid.curvature``) are either
materialised and propagated directly, when the lens chirp is resolved by the
grid, or propagated in the lens frame: the converging field is rewritten as a
diverging-free field propagated over ``dz / M`` with ``M = 1 - dz * c`` and
magnified by ``M`` per axis. The second route is exact in the paraxial limit
and is what makes the focal region of a long-focal-length lens reachable on a
modest grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .beams import BeamSpec, rayleigh_range
from .errors import ApertureOverflowError
from .grid import ComplexFieldGrid

__all__ = [
    "AnalyticState",
    "WidthScan",
    "propagate_analytic",
    "propagate_grid",
    "apply_thin_lens",
    "apply_tilted_lens",
    "tilted_lens_foci",
    "converter_waist",
    "find_observation_plane",
    "tilted_lens_image",
    "second_moment_radii",
    "peak_radii",
    "width_scan",
    "resample_isotropic",
]

# largest chirp frequency (cycles per pixel) accepted when materialising a lens
_CHIRP_LIMIT = 0.25


class AnalyticState(NamedTuple):
    width: float
    curvature_radius: float
    gouy: float
    ring_radius: float


def propagate_analytic(spec: BeamSpec, z) -> AnalyticState:
    """Width, wavefront radius, Gouy phase and ring radius at absolute ``z``.

    The wavefront radius is ``inf`` at the waist.
    """
    dz = float(z) - spec.z0
    zr = rayleigh_range(spec)
    w = spec.waist * np.sqrt(1 + (dz / zr) ** 2)
    curv = np.inf if dz == 0 else dz * (1 + (zr / dz) ** 2)
    gouy = (abs(spec.ell) + 1) * np.arctan(dz / zr)
    return AnalyticState(w, curv, gouy, w * np.sqrt(abs(spec.ell) / 2))


@dataclass(frozen=True)
class WidthScan:
    """Beam radii along z; ``vertical`` is measured along y, ``horizontal`` along x."""

    z: np.ndarray
    vertical: np.ndarray
    horizontal: np.ndarray
    method: str = "peak"

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        v = np.asarray(self.vertical, dtype=float)
        h = np.asarray(self.horizontal, dtype=float)
        if not (z.shape == v.shape == h.shape and z.ndim == 1):
            raise ValueError("z, vertical and horizontal must be 1D arrays of equal length")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z must be strictly increasing")
        if np.any(v <= 0) or np.any(h <= 0):
            raise ValueError("radii must be positive")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "vertical", v)
        object.__setattr__(self, "horizontal", h)

    def __len__(self):
        return len(self.z)


# -- free-space kernels ------------------------------------------------------


def _freqs(n, dx, dy):
    return np.fft.fftfreq(n, dx), np.fft.fftfreq(n, dy)


def _axis_moments(e, dx, dy, wavelength, spectrum):
    """Per-axis second moments (<x^2>, <x theta>, <theta^2>) about the grid origin."""
    n = e.shape[0]
    inten = np.abs(e) ** 2
    p = inten.sum()
    fx, fy = _freqs(n, dx, dy)
    x = (np.arange(n) - n // 2) * dx
    y = (np.arange(n) - n // 2) * dy
    sp = np.abs(spectrum) ** 2
    sp_sum = sp.sum()
    out = []
    for axis, coord, freq in ((1, x, fx), (0, y, fy)):
        shape = (1, n) if axis == 1 else (n, 1)
        c = coord.reshape(shape)
        f = freq.reshape(shape)
        second = float((inten * c**2).sum() / p)
        deriv = np.fft.ifft2(2j * np.pi * f * spectrum)
        cross = float(wavelength / (2 * np.pi) * np.imag(np.sum(np.conj(e) * c * deriv)) / p)
        angle = float(wavelength**2 * (sp * f**2).sum() / sp_sum)
        out.append((second, cross, angle))
    return out


def _check_aperture(e, dx, dy, wavelength, zx, zy, guard, spectrum):
    if not np.any(e):
        return
    n = e.shape[0]
    (x2, xt, t2), (y2, yt, u2) = _axis_moments(e, dx, dy, wavelength, spectrum)
    rx = np.sqrt(max(2 * (x2 + 2 * zx * xt + zx**2 * t2), 0.0))
    ry = np.sqrt(max(2 * (y2 + 2 * zy * yt + zy**2 * u2), 0.0))
    hx, hy = n * dx / 2, n * dy / 2
    if guard * rx > hx or guard * ry > hy:
        raise ApertureOverflowError(
            f"propagated rms radius ({rx:.3g} m, {ry:.3g} m) times guard {guard} exceeds the "
            f"grid half-extent ({hx:.3g} m, {hy:.3g} m); increase N or the pitch"
        )


def _edge_mask(n, dx, dy):
    band = n // 16
    idx = np.abs(np.arange(n) - n // 2)
    inner = n // 2 - band
    t = np.clip((idx - inner) / band, 0, None)
    m = np.exp(-((3 * t) ** 4))
    return m[:, None] * m[None, :]


def propagate_grid(field: ComplexFieldGrid, dz: float, guard: float = 3.0, absorb: bool = False):
    """Propagate a sampled field by ``dz`` metres.

    Parameters
    ----------
    field : ComplexFieldGrid
    dz : float
        Signed propagation distance.
    guard : float
        Required ratio of grid half-extent to the predicted second-moment beam
        radius after propagation, checked per axis.
    absorb : bool
        Apply a super-Gaussian edge mask (N/16 wide) to the result. This
        breaks exact power conservation and is off by default.

    Returns
    -------
    ComplexFieldGrid
        New grid at ``field.z + dz``.
    """
    dz = float(dz)
    if dz == 0:
        return field
    if field.has_curvature:
        out = _propagate_lensed(field, dz, guard)
    else:
        out = _free(field, dz, dz, guard, exact=True)
    if absorb:
        out = out.replace(field=out.field * _edge_mask(out.n, out.pitch, out.pitch_y))
    return out


def _free(field, zx, zy, guard, exact):
    e = field.field
    n = field.n
    lam = field.wavelength
    spectrum = np.fft.fft2(e)
    _check_aperture(e, field.pitch, field.pitch_y, lam, zx, zy, guard, spectrum)
    fx, fy = _freqs(n, field.pitch, field.pitch_y)
    FX, FY = np.meshgrid(fx, fy)
    if exact:
        arg = 1 / lam**2 - FX**2 - FY**2
        kz = 2 * np.pi * np.sqrt(np.clip(arg, 0, None))
        h = np.where(arg > 0, np.exp(1j * kz * zx), 0)
    else:
        h = np.exp(-1j * np.pi * lam * (zx * FX**2 + zy * FY**2))
    out = np.fft.ifft2(spectrum * h)
    return field.replace(field=out, z=field.z + zx)


def _chirp_resolved(field):
    inten = field.intensity
    mask = inten > inten.max() * 1e-12
    if not mask.any():
        return True
    cx, cy = field.curvature
    xs = np.abs(field.x)[mask.any(axis=0)].max()
    ys = np.abs(field.y)[mask.any(axis=1)].max()
    fx = abs(cx) * xs / field.wavelength * field.pitch
    fy = abs(cy) * ys / field.wavelength * field.pitch_y
    return max(fx, fy) <= _CHIRP_LIMIT


def _propagate_lensed(field, dz, guard):
    if _chirp_resolved(field):
        try:
            return _free(field.materialize(), dz, dz, guard, exact=True)
        except ApertureOverflowError:
            pass
    return _scaled_lens_frame(field, dz, guard)


def _scaled_lens_frame(field, dz, guard):
    # Fresnel propagation in the frame co-moving with the pending curvature:
    # the output grid is magnified by M = 1 - dz * c on each axis
    cx, cy = field.curvature
    mx, my = 1 - dz * cx, 1 - dz * cy
    if mx == 0 or my == 0:
        raise ApertureOverflowError("observation plane coincides with a line focus; shift z slightly")
    v = _free(field.replace(curvature=(0.0, 0.0)), dz / mx, dz / my, guard, exact=False)
    k = 2 * np.pi / field.wavelength
    data = v.field * (np.exp(1j * k * dz) / np.sqrt(complex(mx)) / np.sqrt(complex(my)))
    # x_out = M * x_grid; flip axes with M < 0 so coordinates stay increasing
    if mx < 0:
        data = np.roll(data[:, ::-1], 1, axis=1)
    if my < 0:
        data = np.roll(data[::-1, :], 1, axis=0)
    return ComplexFieldGrid(
        data,
        field.pitch * abs(mx),
        field.wavelength,
        field.z + dz,
        pitch_y=field.pitch_y * abs(my),
        curvature=(cx / mx, cy / my),
    )


# -- lenses -------------------------------------------------------------------


def apply_thin_lens(field: ComplexFieldGrid, f: float) -> ComplexFieldGrid:
    """Thin lens of focal length ``f`` (positive = converging)."""
    return apply_tilted_lens(field, f, 0.0)


def tilted_lens_foci(f: float, tilt: float):
    """Effective focal lengths (f_x, f_y) = (f cos t, f / cos t) of a tilted lens."""
    if not f > 0:
        raise ValueError("focal length must be positive")
    if not 0 <= tilt < np.pi / 2:
        raise ValueError("tilt must lie in [0, pi/2)")
    return f * np.cos(tilt), f / np.cos(tilt)


def apply_tilted_lens(field: ComplexFieldGrid, f: float, tilt: float) -> ComplexFieldGrid:
    """Astigmatic thin lens with focal lengths f cos(tilt) along x and f / cos(tilt) along y.

    The quadratic phase is stored as pending curvature, not sampled.
    """
    fx, fy = tilted_lens_foci(f, tilt)
    cx, cy = field.curvature
    return field.replace(curvature=(cx + 1 / fx, cy + 1 / fy))


def converter_waist(f: float, tilt: float, wavelength: float) -> float:
    """Input waist giving a pi/2 relative Gouy shift midway between the line foci.

    The focused Rayleigh range is matched to half the line-focus separation,
    assuming the waist lies on the lens.
    """
    fx, fy = tilted_lens_foci(f, tilt)
    sep = fy - fx
    if sep <= 0:
        raise ValueError("a tilted lens needs tilt > 0")
    fm = np.sqrt(fx * fy)
    if sep >= fm:
        raise ValueError("tilt too large for a collimated-input converter")
    zr = (fm**2 + fm * np.sqrt(fm**2 - sep**2)) / sep
    return float(np.sqrt(wavelength * zr / np.pi))


def second_moment_radii(field: ComplexFieldGrid):
    """D4-sigma radii (2 sigma) along x and y, about the intensity centroid."""
    inten = field.intensity
    p = inten.sum()
    px = inten.sum(axis=0) / p
    py = inten.sum(axis=1) / p
    x, y = field.x, field.y
    mx, my = px @ x, py @ y
    sx = np.sqrt(px @ (x - mx) ** 2)
    sy = np.sqrt(py @ (y - my) ** 2)
    return 2 * float(sx), 2 * float(sy)


def find_observation_plane(
    field: ComplexFieldGrid, lo: float, hi: float, criterion: str = "round", guard: float = 3.0
) -> float:
    """Absolute z in [lo, hi] used to observe an astigmatic pattern.

    ``criterion="round"`` returns the plane where the x and y D4-sigma radii
    are equal (circle of least confusion); ``"min-product"`` minimises their
    product instead. With unequal line foci the product minimum drifts toward
    the shorter focus, where low-index patterns are only partly converted.
    """

    def radii(z):
        return second_moment_radii(propagate_grid(field, z - field.z, guard))

    if criterion == "round":
        def balance(z):
            rx, ry = radii(z)
            return np.log(rx / ry)

        flo, fhi = balance(lo), balance(hi)
        if np.sign(flo) == np.sign(fhi):
            return float(lo if abs(flo) < abs(fhi) else hi)
        return float(brentq(balance, lo, hi, xtol=(hi - lo) * 1e-4))
    if criterion == "min-product":
        res = minimize_scalar(
            lambda z: np.prod(radii(z)), bounds=(lo, hi), method="bounded", options={"xatol": (hi - lo) * 1e-3}
        )
        return float(res.x)
    raise ValueError(f"unknown criterion {criterion!r}")


def tilted_lens_image(
    field: ComplexFieldGrid,
    f: float,
    tilt: float,
    search: float = 0.25,
    criterion: str = "round",
    guard: float = 3.0,
):
    """Field in the observation plane of a tilted lens placed at ``field.z``.

    The plane is searched between the two line foci, excluding a fraction
    ``search`` of their separation at each end.

    Returns
    -------
    (ComplexFieldGrid, float)
        Observed field and its distance behind the lens.
    """
    fx, fy = tilted_lens_foci(f, tilt)
    if fy - fx <= 0:
        raise ValueError("tilt must be positive to form two line foci")
    lensed = apply_tilted_lens(field, f, tilt)
    sep = fy - fx
    lo = field.z + fx + search * sep
    hi = field.z + fy - search * sep
    z = find_observation_plane(lensed, lo, hi, criterion, guard)
    return propagate_grid(lensed, z - field.z, guard), z - field.z


# -- width measurements -------------------------------------------------------


def _parabolic_peak(xs, ys, i):
    i = int(np.clip(i, 1, len(ys) - 2))
    y0, y1, y2 = ys[i - 1], ys[i], ys[i + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
    shift = float(np.clip(shift, -1, 1))
    step = xs[i + 1] - xs[i]
    return xs[i] + shift * step


def _centroid_index(inten, axis):
    prof = inten.sum(axis=axis)
    idx = np.arange(prof.size)
    return int(round(float(prof @ idx / prof.sum())))


def peak_radii(field: ComplexFieldGrid):
    """Ring radii (vertical, horizontal) from the two peaks of axis cuts through the centroid."""
    inten = field.intensity
    row = _centroid_index(inten, 1)
    col = _centroid_index(inten, 0)
    out = []
    for prof, coord, c in ((inten[:, col], field.y, row), (inten[row, :], field.x, col)):
        left = int(np.argmax(prof[:c])) if c > 1 else 0
        right = c + int(np.argmax(prof[c:]))
        xl = _parabolic_peak(coord, prof, left)
        xr = _parabolic_peak(coord, prof, right)
        out.append((xr - xl) / 2)
    return out[0], out[1]


def width_scan(field: ComplexFieldGrid, z_list, method: str = "peak", guard: float = 3.0) -> WidthScan:
    """Vertical and horizontal radii at each absolute position in ``z_list``.

    ``method`` is ``"peak"`` (ring radius from intensity peaks) or
    ``"d4sigma"`` (second-moment radius, 2 sigma per axis).
    """
    if method not in ("peak", "d4sigma"):
        raise ValueError(f"unknown width method {method!r}")
    zs = np.asarray(z_list, dtype=float)
    vert, horz = [], []
    for z in zs:
        g = propagate_grid(field, z - field.z, guard)
        if method == "peak":
            v, h = peak_radii(g)
        else:
            h, v = second_moment_radii(g)
        vert.append(v)
        horz.append(h)
    return WidthScan(zs, np.array(vert), np.array(horz), method)


def resample_isotropic(field: ComplexFieldGrid, pitch=None) -> ComplexFieldGrid:
    """Interpolate an anisotropic grid onto square pixels of size ``pitch``.

    The pending curvature is analytic and is carried over unchanged.
    """
    from scipy.ndimage import map_coordinates

    if pitch is None:
        pitch = min(field.pitch, field.pitch_y)
    if field.isotropic and np.isclose(pitch, field.pitch):
        return field
    n = field.n
    t = (np.arange(n) - n // 2) * pitch
    X, Y = np.meshgrid(t, t)
    ix = X / field.pitch + n // 2
    iy = Y / field.pitch_y + n // 2
    coords = [iy.ravel(), ix.ravel()]
    re = map_coordinates(field.field.real, coords, order=3, cval=0.0)
    im = map_coordinates(field.field.imag, coords, order=3, cval=0.0)
    return ComplexFieldGrid(
        (re + 1j * im).reshape(n, n), pitch, field.wavelength, field.z, curvature=field.curvature
    )
