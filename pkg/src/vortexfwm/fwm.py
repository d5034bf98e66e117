"""Weak-gain four-wave-mixing model of red-to-blue vortex conversion.

In the weak-gain regime the blue amplitude is proportional to the product of
the two red input fields, so the blue vortex inherits ``l_b = l_1 + l_2``
(the idler is assumed to carry ``l_IR = 0``) and its shape is that of
``E1 * E2``. For a Gaussian pump and a one-ring vortex at their waists the
product is itself a pure one-ring mode of waist ``w1 w2 / sqrt(w1^2 + w2^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .beams import BeamSpec, RadiusModel, beam_width, intensity_radial, radius_model, waist_from_ring
from .errors import GeometryMismatchError, NoRingError, QuadratureError
from .grid import ComplexFieldGrid

__all__ = [
    "LAMBDA_1",
    "LAMBDA_2",
    "LAMBDA_BLUE",
    "LAMBDA_IR",
    "FwmConfig",
    "PhaseMatchCandidate",
    "EfficiencyPoint",
    "blue_wavelength",
    "product_field",
    "product_waist",
    "blue_ring_radius",
    "observed_blue_radius",
    "overlap_Kl",
    "overlap_Kl_numeric",
    "efficiency_curve",
    "gouy_rhs",
    "gouy_residual",
    "gouy_phase_sum",
    "gouy_candidates",
]

LAMBDA_1 = 780e-9
LAMBDA_2 = 776e-9
LAMBDA_BLUE = 420e-9
LAMBDA_IR = 5.23e-6


@dataclass(frozen=True)
class FwmConfig:
    """Coupling of the weak-gain source term.

    ``chi3`` and ``amplification_length`` only ever appear as their product,
    which sets an arbitrary overall scale of the blue field.
    """

    chi3: float = 1.0
    amplification_length: float = 0.1
    detuning: float = 1.5e9
    cell_length: float = 0.1

    def __post_init__(self):
        if not self.amplification_length > 0:
            raise ValueError("amplification length must be positive")
        if self.amplification_length > self.cell_length:
            raise ValueError("amplification length cannot exceed the cell length")

    @property
    def coupling(self) -> float:
        return self.chi3 * self.amplification_length


@dataclass(frozen=True)
class PhaseMatchCandidate:
    """One solution of the Gouy matching condition.

    ``gouy_residual`` is |LHS - RHS| of the matching condition in 1/m.
    """

    ell_b: int
    ell_ir: int
    w_b: float
    w_ir: float
    gouy_residual: float
    ell_in: int

    def __post_init__(self):
        if self.ell_b + self.ell_ir != self.ell_in:
            raise ValueError(
                f"azimuthal matching violated: {self.ell_b} + {self.ell_ir} != {self.ell_in}"
            )


@dataclass(frozen=True)
class EfficiencyPoint:
    ell: int
    K: float
    eta: float

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("overlap must be positive")


def blue_wavelength(lambda1=LAMBDA_1, lambda2=LAMBDA_2, lambda_ir=LAMBDA_IR) -> float:
    """Blue wavelength from k_b + k_IR = k_1 + k_2 with unit refractive indices."""
    inv = 1 / lambda1 + 1 / lambda2 - 1 / lambda_ir
    if inv <= 0:
        raise ValueError("no positive blue wavelength satisfies propagation matching")
    return 1 / inv


def product_field(
    e1: ComplexFieldGrid, e2: ComplexFieldGrid, cfg: FwmConfig | None = None, lambda_ir: float = LAMBDA_IR
) -> ComplexFieldGrid:
    """Blue source field ``coupling * E1 * E2`` on the common grid of the inputs.

    The result is tagged with the propagation-matched blue wavelength. With
    ``cfg=None`` the coupling is 1.
    """
    if not e1.same_geometry(e2):
        raise GeometryMismatchError("input fields must share grid size and pitch")
    if not np.isclose(e1.z, e2.z, rtol=0, atol=1e-12):
        raise GeometryMismatchError("input fields must be sampled at the same z")
    a, b = e1.materialize(), e2.materialize()
    coupling = 1.0 if cfg is None else cfg.coupling
    lam_b = blue_wavelength(e1.wavelength, e2.wavelength, lambda_ir)
    return ComplexFieldGrid(coupling * a.field * b.field, a.pitch, lam_b, a.z, pitch_y=a.pitch_y)


def product_waist(w1: float, w2: float) -> float:
    """Waist of the product of two modes, w1 w2 / sqrt(w1^2 + w2^2)."""
    return w1 * w2 / np.hypot(w1, w2)


def blue_ring_radius(ring: float, ell: int, w1: float) -> float:
    """Ring radius of |E1 E2|^2 for a Gaussian pump of waist ``w1`` and an input ring ``ring``."""
    if ell == 0:
        raise NoRingError("the product of two Gaussians has no ring")
    if not (ring > 0 and w1 > 0):
        raise ValueError("ring radius and pump waist must be positive")
    return ring / np.sqrt(1 + 2 * ring**2 / (abs(ell) * w1**2))


def observed_blue_radius(r12: float, ell: int, w12: float, z_b: float, lambda_b: float = LAMBDA_BLUE) -> float:
    """Blue ring radius after free propagation over ``z_b`` from the cell."""
    if ell == 0:
        raise NoRingError("ell = 0 has no ring")
    if z_b < 0:
        raise ValueError("z_b must be non-negative")
    zr = np.pi * w12**2 / lambda_b
    return r12 * np.sqrt(1 + (z_b / zr) ** 2)


def overlap_Kl(P1: float, P2: float, w1: float, w2: float, ell: int) -> float:
    """Closed-form overlap of a Gaussian (w1) and a one-ring vortex (w2), W^2/m^2."""
    return (2 * P1 * P2 / (np.pi * w1**2)) / (1 + w2**2 / w1**2) ** (abs(ell) + 1)


def overlap_Kl_numeric(beam1: BeamSpec, beam2: BeamSpec, z=None, rtol: float = 1e-12) -> float:
    """Adaptive radial quadrature of  int I1(r) I2(r) 2 pi r dr.

    Independent of ``overlap_Kl``: it integrates the sampled intensity
    profiles directly. Raises ``QuadratureError`` when the reported error
    estimate exceeds ``rtol`` times the result by more than a factor 10.
    """
    if beam1.power == 0 or beam2.power == 0:
        return 0.0
    if z is None:
        z = beam1.z0

    def integrand(r):
        return intensity_radial(beam1, r, z) * intensity_radial(beam2, r, z) * 2 * np.pi * r

    wmax = max(float(beam_width(beam1, z)), float(beam_width(beam2, z)))
    span = 12 * wmax * np.sqrt(abs(beam1.ell) + abs(beam2.ell) + 1)
    r = np.linspace(0, span, 4001)
    with np.errstate(divide="ignore"):
        logf = np.log(integrand(r))
    peak = int(np.nanargmax(logf))
    above = np.nonzero(logf > logf[peak] - 80)[0]
    lo, hi = r[max(above[0] - 1, 0)], r[min(above[-1] + 1, r.size - 1)]
    # normalise to O(1) so the absolute tolerance is meaningful
    scale = np.exp(logf[peak])
    val, err = quad(
        lambda t: integrand(t) / scale, lo, hi, points=[r[peak]], epsabs=0.0, epsrel=rtol, limit=500
    )
    if not np.isfinite(val) or err > 10 * rtol * abs(val):
        raise QuadratureError(f"overlap quadrature error {err:.3g} exceeds tolerance for {val:.6g}")
    return float(val * scale)


def efficiency_curve(ells, a: float, beta: float, w1: float, P1: float = 1.0, P2: float = 1.0, normalize_at: int = 5):
    """Overlap-driven conversion efficiency versus ``ell``.

    The vortex waist follows the ring model ``R0 (1 + beta |l|)`` with
    ``R0 = a * w1``; every point is divided by the value at
    ``|l| = normalize_at``.

    Returns
    -------
    list of EfficiencyPoint
    """
    ells = [int(l) for l in ells]
    if any(l == 0 for l in ells):
        raise NoRingError("ell = 0 is not a vortex; exclude it from the range")
    if not (a > 0 and beta > 0 and w1 > 0):
        raise ValueError("a, beta and w1 must be positive")
    model = RadiusModel(a * w1, beta)

    def K(ell):
        w2 = waist_from_ring(radius_model(ell, model), ell)
        return overlap_Kl(P1, P2, w1, w2, ell)

    ref = K(normalize_at)
    return [EfficiencyPoint(l, K(l), K(l) / ref) for l in ells]


# -- Gouy phase matching -------------------------------------------------------


def gouy_rhs(w1, w2, ell, lambda1=LAMBDA_1, lambda2=LAMBDA_2, ell1=0):
    """Input side of the Gouy matching condition, sum of lambda (|l| + 1) / w^2 [1/m]."""
    return lambda1 * (abs(ell1) + 1) / w1**2 + lambda2 * (abs(ell) + 1) / w2**2


def gouy_residual(ell_b, ell_ir, w_b, w_ir, w1, w2, ell, wavelengths=None, ell1=0):
    """Signed output-minus-input mismatch of the Gouy matching condition [1/m]."""
    l1, l2, lb, lir = wavelengths or (LAMBDA_1, LAMBDA_2, LAMBDA_BLUE, LAMBDA_IR)
    lhs = lb * (abs(ell_b) + 1) / w_b**2 + lir * (abs(ell_ir) + 1) / w_ir**2
    return lhs - gouy_rhs(w1, w2, ell, l1, l2, ell1)


def gouy_phase_sum(z, waists, ells, wavelengths, signs):
    """Sum of signed Gouy phases  sum_i s_i (|l_i| + 1) atan(z / z_Ri)."""
    total = 0.0
    for w, l, lam, s in zip(waists, ells, wavelengths, signs):
        total += s * (abs(l) + 1) * np.arctan(z * lam / (np.pi * w**2))
    return total


def gouy_candidates(
    w1,
    w2,
    ell,
    wavelengths=None,
    ell_b_range=None,
    waist_bounds=None,
    points_per_decade=200,
    equal_rayleigh=False,
    ell1=0,
    rtol=1e-9,
):
    """Enumerate (l_b, l_IR) pairs and waists that satisfy Gouy phase matching.

    Parameters
    ----------
    w1, w2 : float
        Pump and vortex waists [m].
    ell : int
        Vortex index; the pump carries ``ell1`` (0 by default).
    wavelengths : tuple, optional
        (lambda1, lambda2, lambda_b, lambda_IR); defaults to 780, 776, 420, 5230 nm.
    ell_b_range : iterable of int, optional
        Blue indices to try; default covers |l_b|, |l_IR| <= |l1 + l| + 5.
    waist_bounds : (float, float), optional
        Search interval for w_b and w_IR; default is three decades centred on w1.
    points_per_decade : int
        Density of the logarithmic w_b grid. For every w_b the matching w_IR
        follows in closed form. The two ends of each family, where w_IR
        meets a bound, are added exactly.
    equal_rayleigh : bool
        Boyd configuration: all four Rayleigh ranges equal that of the pump, so
        w_b and w_IR are fixed and only (l_b, l_IR) is searched. ``w2`` must
        share the pump Rayleigh range.
    rtol : float
        Candidates are kept when |residual| <= rtol * RHS.

    Returns
    -------
    list of PhaseMatchCandidate
        Sorted by residual, then |l_IR|, then l_b, then w_b. Empty when nothing
        in the bounds matches.
    """
    lam1, lam2, lamb, lamir = wavelengths or (LAMBDA_1, LAMBDA_2, LAMBDA_BLUE, LAMBDA_IR)
    total = ell1 + ell
    rhs = gouy_rhs(w1, w2, ell, lam1, lam2, ell1)
    if ell_b_range is None:
        span = abs(total) + 5
        ell_b_range = [lb for lb in range(total - span, total + span + 1) if abs(lb) <= span and abs(total - lb) <= span]
    if waist_bounds is None:
        waist_bounds = (w1 / 10**1.5, w1 * 10**1.5)
    lo, hi = waist_bounds
    out = []
    if equal_rayleigh:
        zr = np.pi * w1**2 / lam1
        if not np.isclose(np.pi * w2**2 / lam2, zr, rtol=1e-9):
            raise ValueError("equal_rayleigh requires w2 to share the pump Rayleigh range")
        w_b = np.sqrt(lamb * zr / np.pi)
        w_ir = np.sqrt(lamir * zr / np.pi)
        for lb in ell_b_range:
            lir = total - lb
            res = abs(gouy_residual(lb, lir, w_b, w_ir, w1, w2, ell, (lam1, lam2, lamb, lamir), ell1))
            if res <= rtol * rhs:
                out.append(PhaseMatchCandidate(lb, lir, w_b, w_ir, res, total))
    else:
        n = int(round(np.log10(hi / lo) * points_per_decade)) + 1
        wb_grid = np.geomspace(lo, hi, n)
        for lb in ell_b_range:
            lir = total - lb
            rem = rhs - lamb * (abs(lb) + 1) / wb_grid**2
            ok = rem > 0
            w_ir = np.full_like(wb_grid, np.nan)
            w_ir[ok] = np.sqrt(lamir * (abs(lir) + 1) / rem[ok])
            keep = ok & (w_ir >= lo) & (w_ir <= hi)
            wbs, wis = list(wb_grid[keep]), list(w_ir[keep])
            # exact ends of the family where w_IR reaches a bound
            for wi in (lo, hi):
                rest = rhs - lamir * (abs(lir) + 1) / wi**2
                if rest > 0:
                    wb = np.sqrt(lamb * (abs(lb) + 1) / rest)
                    if lo <= wb <= hi:
                        wbs.append(wb)
                        wis.append(wi)
            for wb, wi in zip(wbs, wis):
                res = abs(gouy_residual(lb, lir, wb, wi, w1, w2, ell, (lam1, lam2, lamb, lamir), ell1))
                if res <= rtol * rhs:
                    out.append(PhaseMatchCandidate(lb, lir, float(wb), float(wi), float(res), total))
    out.sort(key=lambda c: (round(c.gouy_residual / rhs, 12), abs(c.ell_ir), c.ell_b, c.w_b))
    return out
