"""
Blue product field
==================

The weak-gain blue field is proportional to E1 E2. For a Gaussian pump and
a one-ring vortex the product is again a one-ring mode, of smaller radius.
"""

# %%
from vortexfwm.analysis import lg_decompose, measure_ring_radius, winding_number
from vortexfwm.beams import BeamSpec, rasterize
from vortexfwm.fwm import blue_ring_radius, blue_wavelength, product_field, product_waist
from vortexfwm.grid import GridParams
from vortexfwm.units import MM, NM

w1, ring, ell = 0.15 * MM, 0.2745 * MM, 10
pump = BeamSpec(780 * NM, w1, 0)
vortex = BeamSpec.from_ring_radius(776 * NM, ring, ell)
grid = GridParams(1024, 3e-6)

blue = product_field(rasterize(pump, grid), rasterize(vortex, grid))
print(f"blue wavelength from k matching: {blue_wavelength() / NM:.3f} nm")

# %%
r12 = blue_ring_radius(ring, ell, w1)
m = measure_ring_radius(blue)
print(f"ring radius: closed form {r12 / MM:.5f} mm, grid {m.radius / MM:.5f} +- {m.uncertainty / MM:.5f} mm")
print("winding number:", winding_number(blue, r12))

# %%
# Modal content: the basis waist maximising the LG_0 weight should be w12.
spec = lg_decompose(blue, ell)
print(f"basis waist {spec.basis_waist / MM:.5f} mm vs w12 {product_waist(w1, vortex.waist) / MM:.5f} mm")
print(f"purity {spec.purity:.6f}")
