"""Run configuration for the command-line experiments.

A configuration is one JSON object. Keys carry their unit as a suffix
(``w1_mm``, ``zb_mm``); every key is optional and unknown keys are rejected.
Command-line flags override the file, which overrides the defaults.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import VortexError

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_ell_range", "DEFAULT_ELLS"]


class ConfigError(VortexError, ValueError):
    """Invalid configuration; the message names the offending key and line."""


# per-command default ell selections
DEFAULT_ELLS = {
    "radius-sweep": "1:30",
    "efficiency-sweep": "-30:30",
    "propagation-scan": "4,8",
    "tilted-lens": "-11:11",
    "phase-match": "10",
    "rabi-budget": "10",
}


@dataclass
class ExperimentConfig:
    experiment: str = ""
    # beams
    lambda1_nm: float = 780.0
    lambda2_nm: float = 776.0
    lambda_b_nm: float = 420.0
    lambda_ir_nm: float = 5230.0
    w1_mm: float = 0.15
    R0_mm: float = 0.045
    beta: float = 0.51
    P1_W: float = 0.1
    P2_W: float = 0.1
    ell: object = None
    # grid
    grid_n: int = 2048
    grid_pitch_um: float | None = None
    # radius sweep
    zb_mm: float = 400.0
    # efficiency sweep
    a_values: list = field(default_factory=lambda: [0.15, 0.26])
    normalize_at: int = 5
    # propagation scan
    scan_source: str = "both"
    scan_span_zr: float = 3.0
    scan_points: int = 21
    width_method: str = "peak"
    noise_rel: float = 0.0
    fit: bool = True
    # tilted lens
    lens_f_mm: float = 500.0
    tilt_deg: float = 25.0
    tilted_ell_max: int = 11
    prominence: float = 0.2
    dump_fields: bool = True
    # phase matching
    boyd: bool = True
    points_per_decade: int = 200
    # Rabi budget
    omega1_peak_GHz: float = 1.6
    omega2_peak_GHz: float = 0.2
    detuning_GHz: float = 1.5
    linewidth_MHz: float = 0.4
    rabi_w1_mm: float = 0.17
    radius_mm: float | None = None
    # run control
    seed: int = 0
    workers: int = 0
    svg: bool = True

    # -- derived values -----------------------------------------------------

    def ells(self, command: str) -> list[int]:
        spec = DEFAULT_ELLS[command] if self.ell is None else self.ell
        return parse_ell_range(spec)

    @property
    def n_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self, command: str, lines: dict | None = None):
        """Check every precondition a command relies on before any compute."""
        lines = lines or {}

        def fail(key, msg):
            where = f" (line {lines[key]})" if key in lines else ""
            raise ConfigError(f"{key}{where}: {msg}")

        for key in ("lambda1_nm", "lambda2_nm", "lambda_b_nm", "lambda_ir_nm", "w1_mm", "R0_mm", "zb_mm",
                    "lens_f_mm", "rabi_w1_mm", "scan_span_zr"):
            val = getattr(self, key)
            if not val > 0 and not (key == "zb_mm" and val == 0):
                fail(key, f"must be positive, got {val}")
        for key in ("P1_W", "P2_W", "beta", "noise_rel"):
            if getattr(self, key) < 0:
                fail(key, "must be non-negative")
        n = self.grid_n
        if n < 256 or n & (n - 1):
            fail("grid_n", f"must be a power of two >= 256, got {n}")
        if self.grid_pitch_um is not None and not self.grid_pitch_um > 0:
            fail("grid_pitch_um", "must be positive")
        if not 0 < self.tilt_deg < 90:
            fail("tilt_deg", "must lie in (0, 90) degrees")
        if not 0 < self.prominence < 1:
            fail("prominence", "must lie in (0, 1)")
        if self.scan_source not in ("analytic", "grid", "both"):
            fail("scan_source", "must be 'analytic', 'grid' or 'both'")
        if self.width_method not in ("peak", "d4sigma"):
            fail("width_method", "must be 'peak' or 'd4sigma'")
        if self.scan_points < 5:
            fail("scan_points", f"a hyperbola fit needs at least 5 points, got {self.scan_points}")
        if not self.a_values or any(not a > 0 for a in self.a_values):
            fail("a_values", "must be a non-empty list of positive numbers")
        if self.normalize_at == 0:
            fail("normalize_at", "must be non-zero")
        if self.detuning_GHz == 0:
            fail("detuning_GHz", "must be non-zero (resonant excitation)")
        if self.linewidth_MHz <= 0:
            fail("linewidth_MHz", "must be positive")
        if self.radius_mm is not None and self.radius_mm < 0:
            fail("radius_mm", "must be non-negative")
        if self.seed < 0 or self.seed >= 2**64:
            fail("seed", "must be an unsigned 64-bit integer")
        if self.workers < 0:
            fail("workers", "must be >= 0 (0 uses every core)")
        if 1 / (self.lambda1_nm) + 1 / self.lambda2_nm <= 1 / self.lambda_ir_nm:
            fail("lambda_ir_nm", "leaves no positive blue wavelength")
        try:
            ells = self.ells(command)
        except ValueError as exc:
            fail("ell", str(exc))
        if not ells:
            fail("ell", "selects no azimuthal index")
        if command in ("radius-sweep", "efficiency-sweep", "propagation-scan") and 0 in ells:
            fail("ell", "ell = 0 has no ring; exclude it from vortex sweeps")
        if command == "rabi-budget" and self.radius_mm is None and 0 in ells:
            fail("ell", "ell = 0 has no ring radius; set radius_mm instead")
        if command == "tilted-lens":
            big = [l for l in ells if abs(l) > self.tilted_ell_max]
            if big:
                fail("ell", f"|ell| = {abs(big[0])} exceeds tilted_ell_max = {self.tilted_ell_max}")
        return self


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_ell_range(spec) -> list[int]:
    """Expand an ell selection: ``"1:30"`` (inclusive, 0 skipped when the range
    crosses it), ``"1,2,5"``, ``"5"``, an int, or a list of ints."""
    if isinstance(spec, bool):
        raise ValueError("ell must be an integer, a list or a range string")
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in spec):
            raise ValueError("ell list must hold integers")
        return list(spec)
    if not isinstance(spec, str):
        raise ValueError("ell must be an integer, a list or a range string")
    s = spec.strip()
    m = re.fullmatch(r"(-?\d+):(-?\d+)", s)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise ValueError(f"empty ell range {s!r}")
        vals = list(range(lo, hi + 1))
        return [v for v in vals if v != 0] if lo < 0 < hi else vals
    if re.fullmatch(r"-?\d+(\s*,\s*-?\d+)*", s):
        return [int(v) for v in s.split(",")]
    raise ValueError(f"cannot parse ell selection {s!r}")


def _key_lines(text: str) -> dict:
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        for m in re.finditer(r'"([^"\\]+)"\s*:', line):
            out.setdefault(m.group(1), i)
    return out


def _check_type(key, val, line):
    where = f" (line {line})" if line else ""
    expected = _TYPES[key]
    if key == "ell":
        return val
    if key in ("experiment", "scan_source", "width_method"):
        ok = isinstance(val, str)
    elif expected in ("bool",):
        ok = isinstance(val, bool)
    elif expected == "int":
        ok = isinstance(val, int) and not isinstance(val, bool)
    elif key == "a_values":
        ok = isinstance(val, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)
    elif "None" in str(expected):
        ok = val is None or (isinstance(val, (int, float)) and not isinstance(val, bool))
    else:
        ok = isinstance(val, (int, float)) and not isinstance(val, bool)
    if not ok:
        raise ConfigError(f"{key}{where}: expected {expected}, got {type(val).__name__} {val!r}")
    if expected == "float" and isinstance(val, int):
        val = float(val)
    return val


def load_config(path=None, overrides: dict | None = None):
    """Read a JSON config (or defaults when ``path`` is None) and apply overrides.

    Returns
    -------
    (ExperimentConfig, dict)
        The config and a map from key to its line in the file, for messages.
    """
    data, lines = {}, {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}:{exc.lineno}:{exc.colno}: invalid JSON, {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{p}: top level must be a JSON object")
        lines = _key_lines(text)
    for key in data:
        if key not in _TYPES:
            where = f" (line {lines[key]})" if key in lines else ""
            raise ConfigError(f"unknown config key {key!r}{where}")
    merged = {k: _check_type(k, v, lines.get(k)) for k, v in data.items()}
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
    return ExperimentConfig(**merged), lines
