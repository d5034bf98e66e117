"""
Gouy phase matching
===================

Azimuthal matching fixes l_b + l_IR = l. The Gouy condition then decides
which split is allowed for given waists. With equal Rayleigh ranges only
splits with |l_b| + |l_IR| = |l| survive; with free waists the blue vortex
channel (l, 0) needs a very wide infrared mode.
"""

# %%
import numpy as np

from vortexfwm.beams import radius_model, RadiusModel, waist_from_ring
from vortexfwm.fwm import gouy_candidates
from vortexfwm.units import MM

w1, ell = 0.15 * MM, 10
w2_boyd = w1 * np.sqrt(776 / 780)
boyd = gouy_candidates(w1, w2_boyd, ell, equal_rayleigh=True)
print("equal Rayleigh ranges:", [(c.ell_b, c.ell_ir) for c in boyd])

# %%
w2 = waist_from_ring(radius_model(ell, RadiusModel(0.045 * MM, 0.51)), ell)
cands = gouy_candidates(w1, w2, ell)
chan = [c for c in cands if (c.ell_b, c.ell_ir) == (ell, 0)]
print(f"(l, 0) family: {len(chan)} solutions, w_b {min(c.w_b for c in chan) / MM:.4f}..{max(c.w_b for c in chan) / MM:.4f} mm,"
      f" largest w_IR / w1 = {max(c.w_ir for c in chan) / w1:.1f}")
