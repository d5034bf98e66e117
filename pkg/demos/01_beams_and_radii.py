"""
Input beams and their ring radii
================================

Builds the pump and vortex beams, checks the Rayleigh-range arithmetic and
the linear ring-radius model, then measures ring radii on rasterized grids.
"""

# %%
from vortexfwm.analysis import fit_radius_model, measure_ring_radius
from vortexfwm.beams import BeamSpec, RadiusModel, auto_grid, radius_model, rasterize
from vortexfwm.units import MM, NM

model = RadiusModel(0.045 * MM, 0.51)
pump = BeamSpec(780 * NM, 0.17 * MM, 0)
print(f"pump Rayleigh range: {pump.rayleigh_range * 100:.2f} cm")

# %%
# The ring radius grows linearly with |l|; the waist of each vortex follows
# from R = w sqrt(|l| / 2), so its Rayleigh range grows too.
for ell in (1, 5, 10, 30):
    b = BeamSpec.from_ring_radius(776 * NM, radius_model(ell, model), ell)
    print(f"l={ell:2d}  R={radius_model(ell, model) / MM:.4f} mm  w={b.waist / MM:.4f} mm  zR={b.rayleigh_range * 100:.2f} cm")

# %%
# Measured radii from sampled fields, then the linear fit back to (R0, beta).
rows = []
for ell in range(1, 31):
    b = BeamSpec.from_ring_radius(776 * NM, radius_model(ell, model), ell)
    g = rasterize(b, auto_grid(b, n_min=256))
    rows.append((ell, measure_ring_radius(g).radius))
fit = fit_radius_model(rows)
print(f"R0 = {fit['R0'] / MM:.5f} +- {fit.sigmas[0] / MM:.5f} mm, beta = {fit['beta']:.4f} +- {fit.sigmas[1]:.4f}")
print("max |measured - model| =", f"{max(abs(r - radius_model(l, model)) for l, r in rows) * 1e6:.3f} um")
