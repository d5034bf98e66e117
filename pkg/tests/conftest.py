import numpy as np
import pytest

from vortexfwm.beams import BeamSpec, RadiusModel, radius_model
from vortexfwm.units import MM, NM

W1 = 0.15 * MM
MODEL = RadiusModel(0.045 * MM, 0.51)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def vortex(ell, wavelength=776 * NM, power=1.0, model=MODEL):
    """Input vortex with its ring radius from the linear model."""
    return BeamSpec.from_ring_radius(wavelength, radius_model(ell, model), ell, power)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if "test_acceptance.py::test_criterion_" not in getattr(rep, "nodeid", "") or rep.when != "call":
                continue
            props = dict(rep.user_properties)
            lines.append((props.get("criterion", 0), rep.outcome.upper(), props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num, outcome, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if outcome == 'PASSED' else 'FAIL'}  {detail}")
