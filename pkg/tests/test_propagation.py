import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexfwm.analysis import count_dark_fringes, fit_hyperbola, measure_ring_radius, winding_number
from vortexfwm.beams import BeamSpec, auto_grid, rasterize
from vortexfwm.errors import ApertureOverflowError
from vortexfwm.grid import GridParams
from vortexfwm.propagation import (
    WidthScan,
    _free,
    _scaled_lens_frame,
    apply_thin_lens,
    apply_tilted_lens,
    converter_waist,
    find_observation_plane,
    peak_radii,
    propagate_analytic,
    propagate_grid,
    resample_isotropic,
    second_moment_radii,
    tilted_lens_foci,
    tilted_lens_image,
    width_scan,
)
from vortexfwm.units import MM, NM


@pytest.fixture(scope="module")
def lg4():
    b = BeamSpec(420 * NM, 0.08 * MM, 4)
    return b, rasterize(b, auto_grid(b, expansion=np.sqrt(5)))


def gaussian_after_lens(w0, lam, f, d):
    # complex beam parameter: 1/q' = 1/q - 1/f, then q -> q + d
    q = 1j * np.pi * w0**2 / lam
    q = 1 / (1 / q - 1 / f) + d
    return np.sqrt(-lam / (np.pi * np.imag(1 / q)))


# -- analytic ----------------------------------------------------------------------


def test_analytic_waist_and_rayleigh():
    b = BeamSpec(420 * NM, 0.1 * MM, 3, z0=0.02)
    s = propagate_analytic(b, 0.02)
    assert (s.width, s.gouy, s.curvature_radius) == (b.waist, 0.0, np.inf)
    s = propagate_analytic(b, 0.02 + b.rayleigh_range)
    assert s.width == pytest.approx(b.waist * np.sqrt(2))
    assert s.gouy == pytest.approx(4 * np.pi / 4)
    assert s.curvature_radius == pytest.approx(2 * b.rayleigh_range)
    assert s.ring_radius == pytest.approx(s.width * np.sqrt(1.5))


def test_analytic_blue_expansion():
    b = BeamSpec(420 * NM, 0.095 * MM, 10)
    assert b.rayleigh_range == pytest.approx(0.0675, abs=5e-4)
    assert propagate_analytic(b, 0.4).width / b.waist == pytest.approx(6.0, abs=0.05)


# -- free-space grid propagation ------------------------------------------------------


def test_zero_step_is_identity(lg4):
    _, g = lg4
    assert propagate_grid(g, 0.0) is g


def test_power_and_reversibility(lg4):
    b, g = lg4
    out = propagate_grid(g, 1.5 * b.rayleigh_range)
    assert out.power() == pytest.approx(g.power(), rel=1e-6)
    back = propagate_grid(out, -1.5 * b.rayleigh_range)
    rms = np.sqrt(np.mean(np.abs(back.field - g.field) ** 2))
    assert rms / np.sqrt(np.mean(np.abs(g.field) ** 2)) < 1e-8
    assert back.z == pytest.approx(g.z)


@given(st.floats(-1.0, 1.0).filter(lambda v: abs(v) > 1e-3))
@settings(max_examples=10, deadline=None)
def test_power_conserved_for_any_step(frac):
    b = BeamSpec(780 * NM, 0.1 * MM, 0)
    g = rasterize(b, auto_grid(b, expansion=np.sqrt(2)))
    assert propagate_grid(g, frac * b.rayleigh_range).power() == pytest.approx(g.power(), rel=1e-6)


def test_grid_matches_analytic_field(lg4):
    b, g = lg4
    z = 2 * b.rayleigh_range
    out = propagate_grid(g, z)
    ref = rasterize(b, GridParams(g.n, g.pitch), z=z, check=False).field
    err = np.linalg.norm(out.field - ref) / np.linalg.norm(ref)
    assert err < 1e-4


@pytest.mark.parametrize("ell", [1, 4, -7, 12])
def test_ring_radius_tracks_analytic(ell):
    b = BeamSpec(420 * NM, 0.06 * MM, ell)
    g = rasterize(b, auto_grid(b, expansion=np.sqrt(5)))
    for frac in (0.5, 1.0, 2.0):
        z = frac * b.rayleigh_range
        m = measure_ring_radius(propagate_grid(g, z))
        assert abs(m.radius - propagate_analytic(b, z).ring_radius) <= g.pitch


def test_winding_preserved(lg4):
    b, g = lg4
    out = propagate_grid(g, b.rayleigh_range)
    assert winding_number(out, propagate_analytic(b, b.rayleigh_range).ring_radius) == 4


def test_aperture_overflow(lg4):
    b, g = lg4
    with pytest.raises(ApertureOverflowError):
        propagate_grid(g, 20 * b.rayleigh_range)


def test_absorbing_mask_only_touches_edges(lg4):
    b, g = lg4
    out = propagate_grid(g, b.rayleigh_range, absorb=True)
    assert out.power() == pytest.approx(g.power(), rel=1e-6)
    assert out.power() <= g.power()


# -- lenses ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def lensed_gaussian():
    b = BeamSpec(780 * NM, 0.3 * MM, 0)
    g = rasterize(b, auto_grid(b, expansion=1.0))
    return b, apply_thin_lens(g, 0.2)


@pytest.mark.parametrize("d", [0.05, 0.12, 0.19, 0.21, 0.3])
def test_thin_lens_matches_beam_parameter(lensed_gaussian, d):
    b, g = lensed_gaussian
    rx, ry = second_moment_radii(propagate_grid(g, d))
    w = gaussian_after_lens(b.waist, b.wavelength, 0.2, d)
    assert rx == pytest.approx(w, rel=2e-3)
    assert ry == pytest.approx(w, rel=2e-3)


def test_lens_routes_agree(lensed_gaussian):
    # sampled lens phase + angular spectrum versus the magnified lens frame
    _, g = lensed_gaussian
    d = 0.05
    baked = _free(g.materialize(), d, d, 3.0, exact=True)
    scaled = resample_isotropic(_scaled_lens_frame(g, d, 3.0), g.pitch).materialize()
    err = np.linalg.norm(np.abs(scaled.field) - np.abs(baked.field)) / np.linalg.norm(baked.field)
    assert err < 1e-3
    assert second_moment_radii(scaled)[0] == pytest.approx(second_moment_radii(baked)[0], rel=1e-4)


def test_gaussian_focus_scan_m2():
    b = BeamSpec(780 * NM, 0.5 * MM, 0)
    g = apply_thin_lens(rasterize(b, GridParams(1024, 5e-6)), 0.1)
    q = 1 / (1 / (1j * b.rayleigh_range) - 1 / 0.1)
    z_focus, zr = -q.real, q.imag
    zs = z_focus + np.linspace(-2, 2, 11) * zr
    radii = np.array([second_moment_radii(propagate_grid(g, z)) for z in zs])
    scan = WidthScan(zs, radii[:, 1], radii[:, 0], "d4sigma")
    for fit in fit_hyperbola(scan, b.wavelength, 0):
        assert fit.converged
        assert fit.m2 == pytest.approx(1.0, abs=0.01)
        assert fit.z0 == pytest.approx(z_focus, abs=1e-3 * zr)
        assert fit.zr == pytest.approx(zr, rel=1e-4)


def test_tilted_lens_foci():
    fx, fy = tilted_lens_foci(0.5, np.radians(25))
    assert fx == pytest.approx(0.5 * np.cos(np.radians(25)))
    assert fy == pytest.approx(0.5 / np.cos(np.radians(25)))
    with pytest.raises(ValueError):
        tilted_lens_foci(-1, 0.1)
    with pytest.raises(ValueError):
        converter_waist(0.5, 0.0, 420 * NM)


def test_untilted_lens_refocuses_ring():
    b = BeamSpec(420 * NM, 0.3 * MM, 3)
    g = rasterize(b, auto_grid(b))
    out = propagate_grid(apply_tilted_lens(g, 0.5, 0.0), 0.45)
    assert count_dark_fringes(out) == (0, 0)
    rx, ry = second_moment_radii(out)
    assert rx == pytest.approx(ry, rel=1e-6)


def tilted(ell):
    w = converter_waist(0.5, np.radians(25), 420 * NM)
    b = BeamSpec(420 * NM, w, ell)
    g = rasterize(b, auto_grid(b, expansion=2.2))
    return tilted_lens_image(g, 0.5, np.radians(25))


def test_tilted_lens_three_fringes_and_mirror():
    plus, zp = tilted(3)
    minus, zm = tilted(-3)
    assert zp == pytest.approx(zm)
    fx, fy = tilted_lens_foci(0.5, np.radians(25))
    assert fx < zp < fy
    assert count_dark_fringes(plus) == (3, 1)
    assert count_dark_fringes(minus) == (3, -1)
    # mirroring y -> -y maps +l onto -l: the chain swaps diagonals
    mirrored = np.roll(plus.intensity[::-1, :], 1, axis=0)
    assert np.max(np.abs(mirrored - minus.intensity)) < 1e-9 * plus.intensity.max()


def test_observation_plane_criteria():
    w = converter_waist(0.5, np.radians(25), 420 * NM)
    b = BeamSpec(420 * NM, w, 1)
    lensed = apply_tilted_lens(rasterize(b, auto_grid(b, expansion=2.2)), 0.5, np.radians(25))
    fx, fy = tilted_lens_foci(0.5, np.radians(25))
    lo, hi = fx + 0.25 * (fy - fx), fy - 0.25 * (fy - fx)
    z_round = find_observation_plane(lensed, lo, hi, "round")
    rx, ry = second_moment_radii(propagate_grid(lensed, z_round))
    assert rx == pytest.approx(ry, rel=1e-3)
    z_prod = find_observation_plane(lensed, lo, hi, "min-product")
    assert lo <= z_prod <= hi
    with pytest.raises(ValueError):
        find_observation_plane(lensed, lo, hi, "nearest")


# -- width scans ----------------------------------------------------------------------


def test_width_scan_at_waist_is_round(lg4):
    b, g = lg4
    v, h = peak_radii(g)
    assert abs(v - h) <= g.pitch
    assert abs(v - propagate_analytic(b, 0).ring_radius) <= g.pitch


def test_width_scan_symmetric(lg4):
    b, g = lg4
    zr = b.rayleigh_range
    scan = width_scan(g, [-zr, -0.5 * zr, 0.5 * zr, zr])
    assert np.all(np.abs(scan.vertical - scan.vertical[::-1]) <= g.pitch)
    assert np.all(np.abs(scan.horizontal - scan.horizontal[::-1]) <= g.pitch)


def test_width_scan_d4sigma(lg4):
    b, g = lg4
    scan = width_scan(g, [0.0, b.rayleigh_range], method="d4sigma")
    # D4-sigma radius of a one-ring mode is w sqrt(|l| + 1)
    assert scan.horizontal[1] == pytest.approx(b.waist * np.sqrt(2) * np.sqrt(5), rel=1e-3)
    with pytest.raises(ValueError):
        width_scan(g, [0.0], method="fwhm")


def test_blue_scan_fit_m2():
    b = BeamSpec(420 * NM, 0.09 * MM, 8)
    g = rasterize(b, auto_grid(b, expansion=np.sqrt(10)))
    zs = np.linspace(-3, 3, 11) * b.rayleigh_range
    scan = width_scan(g, zs)
    for fit in fit_hyperbola(scan, b.wavelength, 8):
        assert fit.m2 == pytest.approx(1.0, abs=0.01)


def test_width_scan_validation():
    with pytest.raises(ValueError):
        WidthScan([0.0, 0.0], [1.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        WidthScan([0.0, 1.0], [1.0, -1.0], [1.0, 1.0])


def test_resample_isotropic_keeps_power():
    w = converter_waist(0.5, np.radians(25), 420 * NM)
    b = BeamSpec(420 * NM, w, 2)
    g = apply_tilted_lens(rasterize(b, auto_grid(b, expansion=2.2)), 0.5, np.radians(25))
    out = propagate_grid(g, 0.49)
    assert not out.isotropic
    iso = resample_isotropic(out)
    assert iso.isotropic
    assert iso.power() == pytest.approx(out.power(), rel=1e-3)
