"""Command-line drivers for the figure pipelines.

Usage::

    vortexfwm <command> [--config PATH] [--out DIR] [--ell RANGE] [--grid-n N] [--seed S]

Exit status is 0 on success, 2 on invalid input and 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy.ndimage import map_coordinates

from . import __version__
from .analysis import (
    count_dark_fringes,
    fit_blue_radius_model,
    fit_hyperbola_axis,
    fit_radius_model,
    measure_ring_radius,
    simulate_tilted_lens,
)
from .beams import BeamSpec, RabiBudget, RadiusModel, effective_two_photon_rabi, radius_model, rasterize, sampling_limits
from .config import ConfigError, ExperimentConfig, load_config
from .errors import ApertureOverflowError, FitError, LowContrastError, NumericalError
from .fwm import (
    blue_ring_radius,
    blue_wavelength,
    efficiency_curve,
    gouy_candidates,
    gouy_rhs,
    observed_blue_radius,
    product_field,
    product_waist,
)
from .grid import ComplexFieldGrid, GridParams, write_grid_dump
from .propagation import propagate_analytic, propagate_grid, second_moment_radii, width_scan
from .svgplot import Series, svg_plot
from .units import GHZ, MHZ, MM, NM, UM

COMMANDS = ("radius-sweep", "efficiency-sweep", "propagation-scan", "tilted-lens", "phase-match", "rabi-budget")
GUARD = 3.0


# -- output helpers -------------------------------------------------------------


class RunDir:
    """Collects the files of one run; writes are serialised by the caller."""

    def __init__(self, path: Path):
        self.path = path
        path.mkdir(parents=True, exist_ok=True)
        self.files = []

    def text(self, name, content):
        (self.path / name).write_text(content, encoding="utf-8", newline="\n")
        self.files.append(name)

    def json(self, name, obj):
        self.text(name, json.dumps(obj, indent=2, allow_nan=False) + "\n")

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
        self.text(name, buf.getvalue())


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _pmap(cfg: ExperimentConfig, fn, items):
    items = list(items)
    if cfg.n_workers == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=cfg.n_workers) as pool:
        return list(pool.map(fn, items))


def _square_grid(n, half, max_pitch, what, pitch=None):
    """GridParams of size ``n``; check sampling when the pitch is given."""
    if pitch is None:
        pitch = 2 * half / n
    if pitch > max_pitch * (1 + 1e-12):
        raise ConfigError(
            f"grid_n = {n} cannot sample {what}: pitch {pitch / UM:.3g} um exceeds {max_pitch / UM:.3g} um; "
            f"increase grid_n to at least {_next_pow2(2 * half / max_pitch)}"
        )
    if n * pitch < 2 * half * (1 - 1e-12):
        raise ConfigError(
            f"grid of {n} x {pitch / UM:.3g} um is smaller than the {2 * half / MM:.3g} mm needed for {what}; "
            "increase grid_n or grid_pitch_um"
        )
    return GridParams(n, pitch)


def _next_pow2(x):
    n = 256
    while n < x:
        n *= 2
    return n


# -- radius sweep -----------------------------------------------------------------


def _beams(cfg: ExperimentConfig, ell: int):
    model = RadiusModel(cfg.R0_mm * MM, cfg.beta)
    ring = radius_model(ell, model)
    b1 = BeamSpec(cfg.lambda1_nm * NM, cfg.w1_mm * MM, 0, cfg.P1_W)
    b2 = BeamSpec.from_ring_radius(cfg.lambda2_nm * NM, ring, ell, cfg.P2_W)
    return b1, b2, ring


def _product_max_pitch(blue: BeamSpec) -> float:
    # the product is never rasterized: require 8 samples per 2 pi of winding at the ring
    p = blue.waist / 8
    if blue.ell:
        p = min(p, 2 * np.pi * blue.waist * np.sqrt(abs(blue.ell) / 2) / (8 * abs(blue.ell)))
    return p


def _radius_plan(cfg: ExperimentConfig, ells):
    lam_b = blue_wavelength(cfg.lambda1_nm * NM, cfg.lambda2_nm * NM, cfg.lambda_ir_nm * NM)
    zb = cfg.zb_mm * MM
    half, max_pitch = 0.0, np.inf
    for ell in ells:
        b1, b2, _ = _beams(cfg, ell)
        w12 = product_waist(b1.waist, b2.waist)
        blue = BeamSpec(lam_b, w12, ell)
        for b in (b1, b2):
            p, ext = sampling_limits(b)
            max_pitch = min(max_pitch, p)
            half = max(half, ext / 2)
        max_pitch = min(max_pitch, _product_max_pitch(blue))
        # second-moment radius of the blue ring after zb, times the guard
        wz = float(propagate_analytic(blue, zb).width)
        half = max(half, 1.02 * GUARD * wz * np.sqrt((abs(ell) + 1) / 2))
    pitch = cfg.grid_pitch_um * UM if cfg.grid_pitch_um else None
    return _square_grid(cfg.grid_n, half, max_pitch, f"ell up to {max(map(abs, ells))}", pitch), lam_b


def cmd_radius_sweep(cfg: ExperimentConfig, out: RunDir):
    ells = cfg.ells("radius-sweep")
    grid, lam_b = _radius_plan(cfg, ells)
    zb = cfg.zb_mm * MM
    w1 = cfg.w1_mm * MM

    def row(ell):
        b1, b2, ring = _beams(cfg, ell)
        r12 = blue_ring_radius(ring, ell, w1)
        w12 = product_waist(w1, b2.waist)
        rb = observed_blue_radius(r12, ell, w12, zb, lam_b)
        e = product_field(rasterize(b1, grid), rasterize(b2, grid))
        if zb:
            e = propagate_grid(e, zb, GUARD)
        measured = measure_ring_radius(e)
        return (ell, ring, r12, rb, measured.radius)

    rows = _pmap(cfg, row, ells)
    out.csv("radius-sweep.csv", ["ell", "R_ell_input_m", "R12_m", "R_b_at_zb_m", "R_b_grid_measured_m"], rows)
    diff = max(abs(r[3] - r[4]) for r in rows)
    summary = {
        "grid_n": grid.n,
        "grid_pitch_m": grid.pitch,
        "lambda_b_m": lam_b,
        "zb_m": zb,
        "max_abs_grid_minus_closed_m": diff,
        "within_one_pixel": bool(diff <= grid.pitch),
    }
    if cfg.fit:
        fits = {}
        if len({abs(r[0]) for r in rows}) >= 3:
            fits["input"] = fit_radius_model([(r[0], r[1]) for r in rows]).to_dict()
        if len({abs(r[0]) for r in rows}) >= 4:
            try:
                fits["blue"] = fit_blue_radius_model([(r[0], r[4]) for r in rows], zb, cfg.beta, lam_b).to_dict()
            except FitError as exc:
                fits["blue"] = dict(exc.best.to_dict(), error=str(exc))
        summary["fits"] = fits
    out.json("radius-sweep.json", summary)
    if cfg.svg:
        x = [r[0] for r in rows]
        out.text(
            "radius-sweep.svg",
            svg_plot(
                [
                    Series(x, [r[1] / MM for r in rows], "input R_l", "both"),
                    Series(x, [r[3] / MM for r in rows], "blue at z_b (closed form)", "line"),
                    Series(x, [r[4] / MM for r in rows], "blue at z_b (grid)", "points"),
                ],
                "Ring radii versus ell",
                "ell",
                "radius [mm]",
            ),
        )
    return f"{len(rows)} rows, grid vs closed form max |diff| = {diff / UM:.3f} um (pitch {grid.pitch / UM:.3f} um)"


# -- efficiency sweep ---------------------------------------------------------------


def cmd_efficiency_sweep(cfg: ExperimentConfig, out: RunDir):
    ells = cfg.ells("efficiency-sweep")
    w1 = cfg.w1_mm * MM
    rows, curves = [], {}
    for a in cfg.a_values:
        pts = efficiency_curve(ells, a, cfg.beta, w1, cfg.P1_W, cfg.P2_W, cfg.normalize_at)
        curves[a] = pts
        rows += [(p.ell, a, p.K, p.eta) for p in pts]
    out.csv("efficiency.csv", ["ell", "a", "K_ell_W2_per_m2", "eta_normalized"], rows)
    summary = {"normalize_at": cfg.normalize_at, "ratios": []}
    for a in cfg.a_values:
        e1 = efficiency_curve([1, 10], a, cfg.beta, w1, cfg.P1_W, cfg.P2_W, cfg.normalize_at)
        summary["ratios"].append({"a": a, "eta1_over_eta10": e1[0].eta / e1[1].eta})
    out.json("efficiency.json", summary)
    if cfg.svg:
        series = [Series([p.ell for p in pts], [p.eta for p in pts], f"a = {a:g}") for a, pts in curves.items()]
        out.text("efficiency.svg", svg_plot(series, "Normalised conversion efficiency", "ell", "eta", logy=True))
    return ", ".join(f"a={r['a']:g}: eta(1)/eta(10) = {r['eta1_over_eta10']:.4g}" for r in summary["ratios"])


# -- propagation scan -------------------------------------------------------------


def _scan_z(cfg, zr):
    return np.linspace(-cfg.scan_span_zr * zr, cfg.scan_span_zr * zr, cfg.scan_points)


def _scan_one(cfg: ExperimentConfig, ell: int, source: str, rng_seed):
    lam_b = blue_wavelength(cfg.lambda1_nm * NM, cfg.lambda2_nm * NM, cfg.lambda_ir_nm * NM)
    b1, b2, _ = _beams(cfg, ell)
    w12 = product_waist(b1.waist, b2.waist)
    blue = BeamSpec(lam_b, w12, ell)
    zs = _scan_z(cfg, blue.rayleigh_range)
    if source == "analytic":
        w = np.array([propagate_analytic(blue, z).width for z in zs])
        r = w * (np.sqrt(abs(ell) / 2) if cfg.width_method == "peak" else np.sqrt(abs(ell) + 1))
        vert, horz = r.copy(), r.copy()
    else:
        expansion = np.sqrt(1 + cfg.scan_span_zr**2)
        max_pitch = min(sampling_limits(b1)[0], sampling_limits(b2)[0], _product_max_pitch(blue))
        half = max(
            1.05 * GUARD * expansion * w12 * np.sqrt(abs(ell) + 1),
            max(sampling_limits(b)[1] for b in (b1, b2)) / 2,
        )
        pitch = cfg.grid_pitch_um * UM if cfg.grid_pitch_um else None
        grid = _square_grid(cfg.grid_n, half, max_pitch, f"the ell = {ell} scan", pitch)
        e = product_field(rasterize(b1, grid), rasterize(b2, grid))
        try:
            scan = width_scan(e, zs, cfg.width_method, GUARD)
        except ApertureOverflowError as exc:
            raise ApertureOverflowError(f"{exc}; increase grid_n or grid_pitch_um, or reduce scan_span_zr") from None
        vert, horz = scan.vertical, scan.horizontal
    if cfg.noise_rel:
        rng = np.random.default_rng(rng_seed)
        vert = vert * (1 + cfg.noise_rel * rng.standard_normal(vert.size))
        horz = horz * (1 + cfg.noise_rel * rng.standard_normal(horz.size))
    fits = {}
    if cfg.fit:
        fac = ell if cfg.width_method == "peak" else 0
        for name, data in (("vertical", vert), ("horizontal", horz)):
            # a D4-sigma width is w sqrt(|l| + 1); fold it into the fitted waist
            y = data if cfg.width_method == "peak" else data / np.sqrt(abs(ell) + 1)
            try:
                fits[name] = fit_hyperbola_axis(zs, y, lam_b, fac, name).to_dict()
            except FitError as exc:
                fits[name] = dict(exc.best.to_dict(), error=str(exc))
    return zs, vert, horz, fits, lam_b


def cmd_propagation_scan(cfg: ExperimentConfig, out: RunDir):
    ells = cfg.ells("propagation-scan")
    sources = ["analytic", "grid"] if cfg.scan_source == "both" else [cfg.scan_source]
    jobs = [(ell, s, [cfg.seed, i]) for i, (ell, s) in enumerate((e, s) for e in ells for s in sources)]
    results = _pmap(cfg, lambda j: _scan_one(cfg, *j), jobs)
    lines = []
    for (ell, source, _), (zs, vert, horz, fits, lam_b) in zip(jobs, results):
        stem = f"propagation_ell{ell:+d}_{source}"
        out.csv(f"{stem}.csv", ["z_m", "vertical_m", "horizontal_m"], zip(zs, vert, horz))
        if cfg.fit:
            out.json(
                f"{stem}_fit.json",
                {"ell": ell, "source": source, "width_method": cfg.width_method, "lambda_m": lam_b, **fits},
            )
            m2 = [fits[a]["params"]["M2"] for a in ("vertical", "horizontal")]
            lines.append(f"ell={ell:+d} {source}: M2 vertical {m2[0]:.4f}, horizontal {m2[1]:.4f}")
        if cfg.svg:
            series = [
                Series(zs / MM, vert / MM, "vertical", "points"),
                Series(zs / MM, horz / MM, "horizontal", "points"),
            ]
            out.text(f"{stem}.svg", svg_plot(series, f"Blue vortex ell = {ell} ({source})", "z [mm]", "radius [mm]"))
    return "; ".join(lines) or f"{len(jobs)} scans"


# -- tilted lens ------------------------------------------------------------------


def _snapshot(field: ComplexFieldGrid, n=256) -> ComplexFieldGrid:
    """Square-pixel copy of the central pattern on an ``n`` x ``n`` grid."""
    rx, ry = second_moment_radii(field)
    pitch = 2 * 1.6 * max(rx, ry) / n
    t = (np.arange(n) - n // 2) * pitch
    X, Y = np.meshgrid(t, t)
    f = field.materialize()
    coords = [(Y / f.pitch_y + f.n // 2).ravel(), (X / f.pitch + f.n // 2).ravel()]
    re = map_coordinates(f.field.real, coords, order=1)
    im = map_coordinates(f.field.imag, coords, order=1)
    return ComplexFieldGrid((re + 1j * im).reshape(n, n), pitch, f.wavelength, f.z)


def cmd_tilted_lens(cfg: ExperimentConfig, out: RunDir):
    ells = cfg.ells("tilted-lens")
    lam = cfg.lambda_b_nm * NM
    f = cfg.lens_f_mm * MM
    tilt = np.radians(cfg.tilt_deg)

    def one(ell):
        field, dist = simulate_tilted_lens(ell, lam, f, tilt)
        rec = {"ell_true": ell, "count": None, "sign": None, "agree": False,
               "high_ell": abs(ell) > 11, "low_contrast": False, "plane_m": dist}
        try:
            c = count_dark_fringes(field, 0.0, cfg.prominence)
            rec["count"], rec["sign"] = c.count, c.sign
            want_sign = int(np.sign(ell))
            rec["agree"] = c.count == abs(ell) and c.sign == want_sign
        except LowContrastError:
            rec["low_contrast"] = True
        snap = _snapshot(field) if cfg.dump_fields else None
        return rec, snap

    results = _pmap(cfg, one, ells)
    records = []
    for rec, snap in results:
        if snap is not None:
            name = f"tilted_ell{rec['ell_true']:+d}.ofgd"
            write_grid_dump(snap, out.path / name)
            out.files.append(name)
            rec["dump"] = name
        records.append(rec)
    n_ok = sum(r["agree"] for r in records)
    report = {
        "lens_f_m": f,
        "tilt_rad": tilt,
        "wavelength_m": lam,
        "prominence": cfg.prominence,
        "records": records,
        "summary": {"cases": len(records), "agree": n_ok, "accuracy": n_ok / len(records)},
    }
    out.json("tilted-lens.json", report)
    return f"fringe counts agree for {n_ok}/{len(records)} cases ({100 * n_ok / len(records):.1f} %)"


# -- phase matching -----------------------------------------------------------------


def _cand(c, rhs):
    return {
        "ell_b": c.ell_b,
        "ell_ir": c.ell_ir,
        "w_b_m": c.w_b,
        "w_ir_m": c.w_ir,
        "residual_per_m": c.gouy_residual,
        "relative_residual": c.gouy_residual / rhs,
    }


def cmd_phase_match(cfg: ExperimentConfig, out: RunDir):
    lams = tuple(v * NM for v in (cfg.lambda1_nm, cfg.lambda2_nm, cfg.lambda_b_nm, cfg.lambda_ir_nm))
    w1 = cfg.w1_mm * MM
    tables, warnings = [], []
    for ell in cfg.ells("phase-match"):
        w2 = w1 if ell == 0 else _beams(cfg, ell)[1].waist
        entry = {"ell": ell, "w1_m": w1, "w2_m": w2}
        rhs = gouy_rhs(w1, w2, ell, lams[0], lams[1])
        cands = gouy_candidates(w1, w2, ell, lams, points_per_decade=cfg.points_per_decade)
        if not cands:
            warnings.append(f"ell={ell}: no candidate inside the waist bounds")
        w12 = product_waist(w1, w2)
        pairs = {}
        for c in cands:
            pairs.setdefault((c.ell_b, c.ell_ir), []).append(c)
        summary = []
        for (lb, lir), cs in pairs.items():
            rep = min(cs, key=lambda c: abs(np.log(c.w_b / w12)))
            summary.append({
                "ell_b": lb,
                "ell_ir": lir,
                "n_solutions": len(cs),
                "w_b_range_m": [min(c.w_b for c in cs), max(c.w_b for c in cs)],
                "w_ir_range_m": [min(c.w_ir for c in cs), max(c.w_ir for c in cs)],
                "max_w_ir_over_w1": max(c.w_ir for c in cs) / w1,
                "representative": _cand(rep, rhs),
            })
        entry["free_waists"] = summary
        if cfg.boyd:
            w2b = w1 * np.sqrt(lams[1] / lams[0])
            rhs_b = gouy_rhs(w1, w2b, ell, lams[0], lams[1])
            boyd = gouy_candidates(w1, w2b, ell, lams, equal_rayleigh=True)
            entry["boyd"] = {
                "w2_m": w2b,
                "candidates": [_cand(c, rhs_b) for c in boyd],
                "verified": bool(boyd) and all(abs(c.ell_b) + abs(c.ell_ir) == abs(ell) for c in boyd),
            }
            if not boyd:
                warnings.append(f"ell={ell}: no Boyd-case candidate")
        tables.append(entry)
    out.json("phase-match.json", {"wavelengths_m": list(lams), "results": tables, "warnings": warnings})
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return f"{sum(len(t['free_waists']) for t in tables)} (l_b, l_IR) pairs over {len(tables)} ell values"


# -- Rabi budget ------------------------------------------------------------------


def cmd_rabi_budget(cfg: ExperimentConfig, out: RunDir):
    reports = []
    model = RadiusModel(cfg.R0_mm * MM, cfg.beta)
    for ell in cfg.ells("rabi-budget"):
        r = cfg.radius_mm * MM if cfg.radius_mm is not None else radius_model(ell, model)
        b = RabiBudget(cfg.omega1_peak_GHz * GHZ, cfg.omega2_peak_GHz * GHZ, cfg.detuning_GHz * GHZ, r, cfg.rabi_w1_mm * MM)
        rep = effective_two_photon_rabi(b)
        lw = cfg.linewidth_MHz * MHZ
        reports.append({
            "ell": ell,
            "radius_m": r,
            "omega1_Hz": rep.omega1,
            "omega2_Hz": b.omega2_peak,
            "detuning_Hz": b.detuning,
            "effective_Hz": rep.effective,
            "adiabaticity": rep.adiabaticity,
            "linewidth_Hz": lw,
            "effective_over_linewidth": abs(rep.effective) / lw,
            "comparison": (
                f"effective Rabi {abs(rep.effective) / MHZ:.3g} MHz is {abs(rep.effective) / lw:.3g} times "
                f"the {lw / MHZ:g} MHz linewidth"
            ),
        })
    out.json("rabi-budget.json", {"reports": reports})
    return "; ".join(r["comparison"] for r in reports)


HANDLERS = {
    "radius-sweep": cmd_radius_sweep,
    "efficiency-sweep": cmd_efficiency_sweep,
    "propagation-scan": cmd_propagation_scan,
    "tilted-lens": cmd_tilted_lens,
    "phase-match": cmd_phase_match,
    "rabi-budget": cmd_rabi_budget,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="vortexfwm", description="Red-to-blue vortex conversion experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; defaults are used when omitted")
        p.add_argument("--out", help="output directory (default: runs/<command>)")
        p.add_argument("--ell", help='ell selection, e.g. "1:30", "4,8" or "5"')
        p.add_argument("--grid-n", type=int, help="grid size N (power of two)")
        p.add_argument("--seed", type=int, help="random seed for noise studies")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg, lines = load_config(args.config, {"ell": args.ell, "grid_n": args.grid_n, "seed": args.seed})
        if not cfg.experiment:
            cfg.experiment = args.command
        cfg.validate(args.command, lines)
        out = RunDir(Path(args.out or Path("runs") / args.command))
        out.json("config-echo.json", cfg.to_dict())
        message = HANDLERS[args.command](cfg, out)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    # run metadata is the only output allowed to differ between identical runs
    meta = {"tool": "vortexfwm", "version": __version__, "command": args.command,
            "wall_time_s": time.perf_counter() - t0, "files": sorted(out.files)}
    (out.path / "run.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"{args.command}: {message}")
    print(f"outputs in {out.path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
