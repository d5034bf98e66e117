"""
Propagation and beam quality
============================

The product field is propagated through its focus on the grid; the ring
radius along z fits a hyperbola whose M^2 measures how close the blue beam
is to a pure LG mode.
"""

# %%
import numpy as np

from vortexfwm.analysis import fit_hyperbola
from vortexfwm.beams import BeamSpec, rasterize
from vortexfwm.fwm import product_field, product_waist
from vortexfwm.grid import GridParams
from vortexfwm.propagation import width_scan
from vortexfwm.units import MM, NM

w1, ell = 0.15 * MM, 4
vortex = BeamSpec.from_ring_radius(776 * NM, 0.045 * MM * (1 + 0.51 * ell), ell)
grid = GridParams(2048, 3e-6)
blue = product_field(rasterize(BeamSpec(780 * NM, w1, 0), grid), rasterize(vortex, grid))

w12 = product_waist(w1, vortex.waist)
zr = np.pi * w12**2 / blue.wavelength
print(f"w12 = {w12 / MM:.4f} mm, blue Rayleigh range {zr * 1000:.1f} mm")

# %%
zs = np.linspace(-3, 3, 13) * zr
scan = width_scan(blue, zs)
for fit in fit_hyperbola(scan, blue.wavelength, ell):
    print(f"{fit.axis:10s} w0={fit.w0 / MM:.5f} mm  zR={fit.zr * 1000:.2f} mm  M2={fit.m2:.4f} +- {fit.sigmas['M2']:.1e}")
