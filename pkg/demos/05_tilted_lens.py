"""
Tilted-lens diagnostic
======================

A tilted lens turns a vortex into a chain of |l| + 1 lobes separated by |l|
dark fringes; the diagonal carrying the chain gives the sign of l.
"""

# %%
from vortexfwm.analysis import count_dark_fringes, simulate_tilted_lens
from vortexfwm.propagation import tilted_lens_foci
import numpy as np

fx, fy = tilted_lens_foci(0.5, np.radians(25))
print(f"line foci at {fx:.4f} m and {fy:.4f} m")

# %%
for ell in (0, 1, -3, 7, -11, 15):
    image, z = simulate_tilted_lens(ell)
    fc = count_dark_fringes(image)
    print(f"l={ell:+3d}: plane {z:.4f} m, {fc.count} fringes, sign {fc.sign:+d}")
