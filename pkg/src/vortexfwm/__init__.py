"""Wave-optics model of red-to-blue optical-vortex conversion by four-wave mixing.

Submodules
----------
beams        Laguerre-Gaussian and Gaussian beams, radius model, Rabi budget.
grid         Sampled complex fields and the OFGD binary dump.
propagation  Analytic and FFT propagation, lenses, width scans.
fwm          Product field, overlap integral, efficiency curve, Gouy matching.
analysis     Ring radius, fringe counting, hyperbola and radius fits, LG purity.
cli          Command-line experiment drivers.
"""

__version__ = "1.0.0"

from .beams import (
    BeamSpec,
    RabiBudget,
    RadiusModel,
    auto_grid,
    beam_width,
    effective_two_photon_rabi,
    intensity_radial,
    lg_field_amplitude,
    rabi_at_radius,
    radius_model,
    rasterize,
    rayleigh_range,
    ring_radius,
    waist_from_ring,
)
from .grid import ComplexFieldGrid, GridParams, read_grid_dump, write_grid_dump
from .propagation import (
    WidthScan,
    apply_thin_lens,
    apply_tilted_lens,
    propagate_analytic,
    propagate_grid,
    tilted_lens_image,
    width_scan,
)
from .fwm import (
    EfficiencyPoint,
    FwmConfig,
    PhaseMatchCandidate,
    blue_ring_radius,
    blue_wavelength,
    efficiency_curve,
    gouy_candidates,
    observed_blue_radius,
    overlap_Kl,
    overlap_Kl_numeric,
    product_field,
    product_waist,
)
from .analysis import (
    HyperbolaFit,
    ModalSpectrum,
    count_dark_fringes,
    fit_blue_radius_model,
    fit_hyperbola,
    fit_radius_model,
    lg_decompose,
    measure_ring_radius,
    simulate_tilted_lens,
)
from .lm import FitResult, levenberg_marquardt
