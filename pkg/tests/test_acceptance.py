"""End-to-end acceptance checks, one test per criterion.

Each test records its criterion number and a one-line result; the terminal
summary (see conftest.py) prints a pass/fail line per criterion.
"""

import csv
import json
import time
from pathlib import Path

import numpy as np
import pytest

from vortexfwm import cli
from vortexfwm.analysis import (
    blue_radius_model,
    count_dark_fringes,
    fit_blue_radius_model,
    fit_hyperbola,
    fit_hyperbola_axis,
    fit_radius_model,
    hyperbola,
    measure_ring_radius,
    simulate_tilted_lens,
)
from vortexfwm.beams import BeamSpec, RadiusModel, radius_model, rasterize, rayleigh_range, sampling_limits, waist_from_ring
from vortexfwm.fwm import (
    blue_ring_radius,
    efficiency_curve,
    gouy_candidates,
    overlap_Kl,
    overlap_Kl_numeric,
    product_field,
)
from vortexfwm.grid import GridParams
from vortexfwm.propagation import WidthScan, propagate_analytic
from vortexfwm.units import MM, NM

MODEL = RadiusModel(0.045 * MM, 0.51)
W1 = 0.15 * MM


class Clock:
    def __init__(self, budget):
        self.budget = budget
        self.t0 = time.perf_counter()

    @property
    def elapsed(self):
        return time.perf_counter() - self.t0

    def check(self):
        assert self.elapsed < self.budget, f"took {self.elapsed:.1f} s, budget {self.budget} s"


def report(record_property, num, detail):
    record_property("detail", detail)
    print(f"criterion {num}: {detail}")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_cli(out, command, *args, config=None):
    argv = [command, "--out", str(out)]
    if config is not None:
        path = Path(str(out) + ".config.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(config, indent=2))
        argv += ["--config", str(path)]
    assert cli.main(argv + list(args)) == 0
    return Path(out)


def test_criterion_01_rayleigh_arithmetic(record_property):
    record_property("criterion", 1)
    clock = Clock(1.0)
    zr1 = rayleigh_range(BeamSpec(780 * NM, 0.17 * MM, 0))
    r1, r30 = radius_model(1, MODEL), radius_model(30, MODEL)
    zv1 = BeamSpec.from_ring_radius(776 * NM, r1, 1).rayleigh_range
    zv30 = BeamSpec.from_ring_radius(776 * NM, r30, 30).rayleigh_range
    report(
        record_property, 1,
        f"zR1 = {zr1 * 100:.2f} cm, R1 = {r1 / MM:.4f} mm, R30 = {r30 / MM:.4f} mm, "
        f"vortex zR = {zv1 * 100:.2f} / {zv30 * 100:.2f} cm",
    )
    assert zr1 == pytest.approx(0.116, abs=0.0005)
    assert zr1 == pytest.approx(0.12, rel=0.05)
    assert r1 == pytest.approx(0.068 * MM, abs=0.0005 * MM) and r1 == pytest.approx(0.07 * MM, rel=0.05)
    assert r30 == pytest.approx(0.734 * MM, abs=0.0005 * MM) and r30 == pytest.approx(0.7 * MM, rel=0.05)
    assert zv1 == pytest.approx(0.04, rel=0.10)
    assert zv30 == pytest.approx(0.14, rel=0.10)
    clock.check()


def test_criterion_02_overlap_oracle(record_property):
    record_property("criterion", 2)
    clock = Clock(10.0)
    worst = 0.0
    for ell in range(0, 31):
        for ratio in np.geomspace(0.1, 10, 9):
            w2 = ratio * W1
            num = overlap_Kl_numeric(BeamSpec(780 * NM, W1, 0, 0.1), BeamSpec(776 * NM, w2, ell, 0.1))
            worst = max(worst, abs(overlap_Kl(0.1, 0.1, W1, w2, ell) / num - 1))
    report(record_property, 2, f"max relative error {worst:.2e} over 31 x 9 cases in {clock.elapsed:.1f} s")
    assert worst < 1e-9
    clock.check()


def test_criterion_03_blue_ring_on_grid(record_property):
    record_property("criterion", 3)
    clock = Clock(120.0)
    worst = []
    for ell in (1, 5, 10, 20, 30):
        b1 = BeamSpec(780 * NM, W1, 0)
        b2 = BeamSpec.from_ring_radius(776 * NM, radius_model(ell, MODEL), ell)
        pitch = min(sampling_limits(b1)[0], sampling_limits(b2)[0])
        grid = GridParams(2048, pitch)
        assert grid.extent >= max(sampling_limits(b)[1] for b in (b1, b2))
        measured = measure_ring_radius(product_field(rasterize(b1, grid), rasterize(b2, grid))).radius
        expected = blue_ring_radius(b2.waist * np.sqrt(ell / 2), ell, W1)
        worst.append(abs(measured - expected) / pitch)
    report(record_property, 3, f"max |grid - closed form| = {max(worst):.3f} px on 2048^2 for |l| in 1,5,10,20,30")
    assert max(worst) <= 1.0
    clock.check()


def test_criterion_04_fig3b_shape(record_property, tmp_path):
    record_property("criterion", 4)
    clock = Clock(300.0)
    out = run_cli(tmp_path / "radius", "radius-sweep")
    rows = read_csv(out / "radius-sweep.csv")
    summary = json.loads((out / "radius-sweep.json").read_text())
    ells = np.array([int(r["ell"]) for r in rows])
    r_in = np.array([float(r["R_ell_input_m"]) for r in rows])
    r_b = np.array([float(r["R_b_at_zb_m"]) for r in rows])
    r_grid = np.array([float(r["R_b_grid_measured_m"]) for r in rows])
    assert list(ells) == list(range(1, 31))
    lin = np.max(np.abs(np.diff(r_in, 2))) / r_in.max()
    d2 = np.diff(r_b, 2)
    diff = np.max(np.abs(r_grid - r_b))
    report(
        record_property, 4,
        f"input 2nd diff {lin:.1e} (relative), blue max 2nd diff {d2.max() / MM:.3e} mm, "
        f"grid vs closed form {diff * 1e6:.3f} um (pitch {summary['grid_pitch_m'] * 1e6:.2f} um), {clock.elapsed:.0f} s",
    )
    assert lin < 1e-12
    assert np.all(d2 < 0)
    assert diff <= summary["grid_pitch_m"]
    assert summary["within_one_pixel"]
    clock.check()


def test_criterion_05_efficiency_curve(record_property):
    record_property("criterion", 5)
    clock = Clock(1.0)
    ells = [l for l in range(-30, 31) if l]
    curves = {a: {p.ell: p.eta for p in efficiency_curve(ells, a, 0.51, W1)} for a in (0.15, 0.26)}

    def direct(a, ell):
        # closed form evaluated without the library: w2 = R0 (1 + beta l) / sqrt(l / 2)
        w2 = a * W1 * (1 + 0.51 * ell) / np.sqrt(ell / 2)
        return (2 / (np.pi * W1**2)) / (1 + w2**2 / W1**2) ** (ell + 1)

    ratios = {}
    for a, eta in curves.items():
        assert eta[5] == 1.0 and eta[-5] == 1.0
        assert all(eta[l] == eta[-l] for l in range(1, 31))
        assert np.all(np.diff([eta[l] for l in range(1, 31)]) < 0)
        ratios[a] = eta[1] / eta[10]
        assert ratios[a] == pytest.approx(direct(a, 1) / direct(a, 10), rel=1e-6)
    assert all(curves[0.26][l] < curves[0.15][l] for l in range(6, 31))
    report(record_property, 5, f"eta(1)/eta(10) = {ratios[0.15]:.4f} (a=0.15), {ratios[0.26]:.3f} (a=0.26)")
    assert ratios[0.15] == pytest.approx(4.5, rel=0.05)
    assert ratios[0.26] == pytest.approx(52, rel=0.05)
    clock.check()


def test_criterion_06_tilted_lens(record_property, tmp_path):
    record_property("criterion", 6)
    clock = Clock(600.0)
    out = run_cli(tmp_path / "tilted", "tilted-lens")
    recs = json.loads((out / "tilted-lens.json").read_text())["records"]
    assert sorted(r["ell_true"] for r in recs) == [l for l in range(-11, 12) if l]
    agree = sum(r["agree"] and r["count"] == abs(r["ell_true"]) and r["sign"] == np.sign(r["ell_true"]) for r in recs)
    high = {}
    for ell in (15, -15):
        fc = count_dark_fringes(simulate_tilted_lens(ell)[0])
        high[ell] = fc.count
    report(record_property, 6, f"{agree}/22 exact for 1 <= |l| <= 11; l = +-15 counted {high[15]} / {high[-15]}")
    assert agree == 22
    assert all(abs(c - 15) <= 1.5 for c in high.values())
    clock.check()


def test_criterion_07_m2(record_property, tmp_path):
    record_property("criterion", 7)
    clock = Clock(300.0)
    analytic = {}
    for ell in (4, 8):
        blue = BeamSpec(420 * NM, 0.09 * MM, ell)
        zs = np.linspace(-3, 3, 21) * blue.rayleigh_range
        r = np.array([propagate_analytic(blue, z).width for z in zs]) * np.sqrt(ell / 2)
        analytic[ell] = [f.m2 for f in fit_hyperbola(WidthScan(zs, r, r), blue.wavelength, ell)]
    out = run_cli(tmp_path / "scan", "propagation-scan", config={"scan_source": "grid"})
    grid = {}
    for ell in (4, 8):
        fit = json.loads((out / f"propagation_ell{ell:+d}_grid_fit.json").read_text())
        grid[ell] = [fit[a]["params"]["M2"] for a in ("vertical", "horizontal")]
        assert all(fit[a]["converged"] for a in ("vertical", "horizontal"))
    report(
        record_property, 7,
        "analytic M2 " + ", ".join(f"l={l}: {v[0]:.4f}/{v[1]:.4f}" for l, v in analytic.items())
        + "; product-field grid M2 " + ", ".join(f"l={l}: {v[0]:.4f}/{v[1]:.4f}" for l, v in grid.items()),
    )
    assert all(abs(m - 1) <= 0.01 for v in analytic.values() for m in v)
    assert all(abs(m - 1) <= 0.05 for v in grid.values() for m in v)
    clock.check()


def test_criterion_08_gouy_boyd(record_property):
    record_property("criterion", 8)
    clock = Clock(30.0)
    w2_boyd = W1 * np.sqrt(776 / 780)
    boyd_total = 0
    for ell in range(-30, 31):
        cands = gouy_candidates(W1, w2_boyd, ell, equal_rayleigh=True)
        assert cands
        assert all(abs(c.ell_b) + abs(c.ell_ir) == abs(ell) for c in cands)
        boyd_total += len(cands)
    ratios = []
    for w1 in (0.15 * MM, 0.17 * MM):
        for ell in (1, 5, 10, 20, 30):
            w2 = waist_from_ring(radius_model(ell, MODEL), ell)
            chan = [c for c in gouy_candidates(w1, w2, ell) if (c.ell_b, c.ell_ir) == (ell, 0)]
            assert chan, f"no (l, 0) candidate for l = {ell}, w1 = {w1}"
            ratios.append(max(c.w_ir for c in chan) / w1)
    report(
        record_property, 8,
        f"{boyd_total} Boyd candidates all with |l_b| + |l_IR| = |l|; (l, 0) channel max w_IR / w1 >= {min(ratios):.1f}",
    )
    assert min(ratios) > 10
    clock.check()


def _mean_within(trials, truth, k=2.0):
    trials = np.asarray(trials)
    sem = trials.std(axis=0, ddof=1) / np.sqrt(len(trials))
    return np.abs(trials.mean(axis=0) - truth) <= k * sem


def test_criterion_09_fit_recovery(record_property):
    record_property("criterion", 9)
    clock = Clock(120.0)
    rng = np.random.default_rng(9)
    lam = 420 * NM
    w0, z0 = 0.09 * MM, 0.01
    zr = np.pi * w0**2 / lam
    z = z0 + np.linspace(-3, 3, 21) * zr
    r = hyperbola(z, w0, z0, zr, 8)
    ells = np.arange(1, 31)
    r_in = np.array([radius_model(l, MODEL) for l in ells])
    blue_truth = np.array([0.15 * MM, 0.06 * MM])
    r_b = blue_radius_model(ells, *blue_truth, 0.51, 0.4)

    # noiseless inverse crimes
    h = fit_hyperbola_axis(z, r, lam, 8)
    errs = [
        max(abs(h.w0 / w0 - 1), abs(h.z0 / z0 - 1), abs(h.zr / zr - 1)),
        np.max(np.abs(fit_radius_model(np.column_stack([ells, r_in])).params / [0.045 * MM, 0.51] - 1)),
        np.max(np.abs(fit_blue_radius_model(np.column_stack([ells, r_b]), 0.4, 0.51).params / blue_truth - 1)),
    ]
    assert max(errs) < 1e-6

    # 1 % multiplicative noise, 100 trials each
    hyp, lin, blue = [], [], []
    for _ in range(100):
        f = fit_hyperbola_axis(z, r * (1 + 0.01 * rng.standard_normal(z.size)), lam, 8)
        hyp.append((f.w0, f.z0, f.zr, f.m2))
        lin.append(fit_radius_model(np.column_stack([ells, r_in * (1 + 0.01 * rng.standard_normal(30))])).params)
        blue.append(
            fit_blue_radius_model(
                np.column_stack([ells, r_b * (1 + 0.01 * rng.standard_normal(30))]), 0.4, 0.51, initial=blue_truth
            ).params
        )
    hyp, lin, blue = np.array(hyp), np.array(lin), np.array(blue)
    ok_mean = (
        _mean_within(hyp, [w0, z0, zr, 1.0]).all()
        and _mean_within(lin, [0.045 * MM, 0.51]).all()
        and _mean_within(blue, blue_truth).all()
    )
    # quoted uncertainty bands: R0 +-0.004 mm, beta +-0.07; w1 +-0.02 mm, R0 +-0.01 mm; M2 "very close to 1" (+-0.05)
    ok_band = (
        np.all(np.abs(lin - [0.045 * MM, 0.51]) <= [0.004 * MM, 0.07])
        and np.all(np.abs(blue - blue_truth) <= [0.02 * MM, 0.01 * MM])
        and np.all(np.abs(hyp[:, 3] - 1) <= 0.05)
    )
    report(
        record_property, 9,
        f"noiseless max rel err {max(errs):.1e}; noisy means within 2 sigma_mean: {ok_mean}; "
        f"all trials inside quoted bands: {ok_band}; M2 mean {hyp[:, 3].mean():.4f} +- {hyp[:, 3].std(ddof=1):.4f}",
    )
    assert ok_mean and ok_band
    clock.check()


DETERMINISM_RUNS = [
    ("radius-sweep", {"ell": [2, 5, 9, 14]}),
    ("efficiency-sweep", {}),
    ("propagation-scan", {"ell": [4], "scan_points": 9, "noise_rel": 0.01, "seed": 7}),
    ("tilted-lens", {"ell": [-3, 2]}),
    ("phase-match", {"ell": [0, 4]}),
    ("rabi-budget", {"ell": [1, 10]}),
]


def test_criterion_10_determinism(record_property, tmp_path):
    record_property("criterion", 10)
    compared, mismatched = 0, []
    for command, config in DETERMINISM_RUNS:
        dirs = [run_cli(tmp_path / f"{command}-{i}", command, config=config) for i in range(2)]
        names = sorted(p.name for p in dirs[0].iterdir() if p.name != "run.json")
        assert names == sorted(p.name for p in dirs[1].iterdir() if p.name != "run.json")
        for name in names:
            compared += 1
            if (dirs[0] / name).read_bytes() != (dirs[1] / name).read_bytes():
                mismatched.append(f"{command}/{name}")
    report(record_property, 10, f"{compared} output files byte-identical across two runs" if not mismatched
           else f"differing files: {mismatched}")
    assert not mismatched
