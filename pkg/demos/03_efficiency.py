"""
Conversion efficiency versus l
==============================

The blue power follows the pump-vortex overlap K_l; with the vortex waist
set by the ring model it falls steeply with |l|.
"""

# %%
from vortexfwm.beams import BeamSpec
from vortexfwm.fwm import efficiency_curve, overlap_Kl, overlap_Kl_numeric
from vortexfwm.units import MM, NM

w1 = 0.15 * MM

# %%
# Closed form against direct radial quadrature of I1 I2.
for ell, ratio in ((1, 0.3), (10, 1.0), (30, 4.0)):
    w2 = ratio * w1
    k = overlap_Kl(1, 1, w1, w2, ell)
    q = overlap_Kl_numeric(BeamSpec(780 * NM, w1, 0), BeamSpec(776 * NM, w2, ell))
    print(f"l={ell:2d} w2/w1={ratio}: K={k:.6e}  relative difference {abs(k / q - 1):.1e}")

# %%
for a in (0.15, 0.26):
    pts = {p.ell: p.eta for p in efficiency_curve(range(1, 31), a, 0.51, w1)}
    print(f"a={a}: eta(1)={pts[1]:.3f} eta(10)={pts[10]:.4f} eta(30)={pts[30]:.2e} ratio(1/10)={pts[1] / pts[10]:.3f}")
