"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every sub-check is evaluated and reported before the test asserts, so a
failing criterion shows all of its measured values.  A PASS/FAIL line per
criterion is printed in the terminal summary (see conftest.py).
"""

import csv
import io
import json
import math
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import LAMBDA, phase_diff
from strategies import mirror_stacks, open_stacks, wavelengths
from distpnr import cli
from distpnr.design import (
    build_distributed,
    solve_filling_factor,
    stack_uniformity,
    target_coefficients,
    thin_film_optimal_thickness,
)
from distpnr.materials import NBTIN, VACUUM, EffectiveMedium, Material, MeanderSpec
from distpnr.optics import Coherent, Layer, Stack, power_balance, traveling_response
from distpnr.photostats import (
    DetectorArraySpec,
    click_prob_given_fock,
    click_prob_series_fock,
    oracle_click_prob,
    source_click_distribution,
    squeezed_vacuum_pn,
)
from distpnr.stackfile import parse_stack_spec
from distpnr.tolerance import PerturbationSpec, run_ensemble


class Checks:
    def __init__(self, label):
        self.label = label
        self.items = []

    def __call__(self, name, ok, detail):
        self.items.append((name, bool(ok), detail))
        print(f"  [{'ok' if ok else 'FAIL'}] {self.label}: {name}: {detail}")

    def verify(self):
        failed = [f"{n} ({d})" for n, ok, d in self.items if not ok]
        assert not failed, f"{self.label}: " + "; ".join(failed)


def cli_table(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    assert code == 0, err
    return dict(row for row in csv.reader(io.StringIO(out)))


@pytest.mark.criterion(1, "Salisbury optimum D_opt = 15 +- 1 nm with A >= 0.999")
def test_c01_salisbury_optimum(capsys):
    c = Checks("criterion 1")
    t0 = time.perf_counter()
    table = cli_table(capsys, "design", "--geometry", "salisbury", "--fill", "0.5")
    elapsed = time.perf_counter() - t0
    d_opt, a = float(table["D_opt_nm"]), float(table["A"])
    c("D_opt within 15 +- 1 nm", abs(d_opt - 15.0) <= 1.0, f"D_opt = {d_opt:.2f} nm")
    c("A >= 0.999", a >= 0.999, f"A = {a:.5f}")
    c("runtime < 1 s", elapsed < 1.0, f"{elapsed:.2f} s")
    c.verify()


@pytest.mark.criterion(2, "free-film optimum D_opt = 30 +- 1 nm, A_coh >= 0.999, A_tr = 0.50 +- 0.005")
def test_c02_free_film_optimum(capsys):
    c = Checks("criterion 2")
    t0 = time.perf_counter()
    table = cli_table(capsys, "design", "--geometry", "cp", "--fill", "0.5")
    elapsed = time.perf_counter() - t0
    d_opt, a_coh, a_tr = float(table["D_opt_nm"]), float(table["A_coh"]), float(table["A_tr"])
    oracle = thin_film_optimal_thickness(MeanderSpec(NBTIN, VACUUM, 0.5).medium.permittivity(LAMBDA), LAMBDA)
    c("D_opt within 30 +- 1 nm", abs(d_opt - 30.0) <= 1.0, f"D_opt = {d_opt:.2f} nm")
    c("A_coh >= 0.999", a_coh >= 0.999, f"A_coh = {a_coh:.5f}")
    c("A_tr = 0.50 +- 0.005", abs(a_tr - 0.5) <= 0.005, f"A_tr = {a_tr:.5f}")
    c("thin-film oracle 30.3 nm", abs(oracle - 30.3) < 0.05, f"oracle = {oracle:.3f} nm")
    c("D_opt within 1.5 nm of oracle", abs(d_opt - oracle) <= 1.5, f"|diff| = {abs(d_opt - oracle):.3f} nm")
    c("runtime < 1 s", elapsed < 1.0, f"{elapsed:.2f} s")
    c.verify()


@pytest.mark.criterion(3, "traveling-wave bound max A_tr <= 0.5 + 1e-6 for single layers up to 50 nm")
def test_c03_traveling_wave_bound():
    c = Checks("criterion 3")
    ds = np.arange(0.0, 50.0001, 0.1)
    for slit_eps in (1.0, 2.25):
        slit = Material.constant("slit", slit_eps)
        for f in np.round(np.arange(0.05, 1.0001, 0.05), 2):
            medium = EffectiveMedium(NBTIN, slit, float(f))
            a = [traveling_response(Stack((Layer(medium, float(d)),)), LAMBDA).A for d in ds]
            i = int(np.argmax(a))
            if f in (0.1, 0.5, 1.0) or a[i] > 0.5 + 1e-6:
                c(f"slit eps {slit_eps}, f = {f}", a[i] <= 0.5 + 1e-6, f"max A_tr = {a[i]:.6f} at {ds[i]:.1f} nm")
    c.verify()


@pytest.mark.criterion(4, "filling factors 0.61/0.30/0.20 and sublayer absorption 0.28/0.17/0.12")
def test_c04_filling_factor_solutions():
    c = Checks("criterion 4")
    t0 = time.perf_counter()
    for n_det, f_exp, a_exp in ((5, 0.61, 0.28), (10, 0.30, 0.17), (15, 0.20, 0.12)):
        f = solve_filling_factor(5.0, n_det, LAMBDA)
        a = traveling_response(build_distributed(MeanderSpec(NBTIN, VACUUM, f, 5.0), 1), LAMBDA).A
        target = float(target_coefficients(n_det).A)
        c(f"N={n_det} f = {f_exp} +- 0.01", abs(f - f_exp) <= 0.01, f"f = {f:.4f}")
        c(f"N={n_det} A_tr = {a_exp} +- 0.01", abs(a - a_exp) <= 0.01, f"A_tr = {a:.4f}")
        c(f"N={n_det} A_tr within 0.015 of 2M/(M+1)^2", abs(a - target) <= 0.015, f"target = {target:.4f}")
    elapsed = time.perf_counter() - t0
    c("runtime < 5 s", elapsed < 5.0, f"{elapsed:.2f} s")
    c.verify()


@pytest.mark.criterion(5, "uniformity 0.0008/0.0022/0.0040 +- 0.002 and 15-layer A_coh = 0.98 +- 0.01")
def test_c05_uniformity():
    c = Checks("criterion 5")
    for name, expected in (("fig5b_5layer", 0.0008), ("fig5c_10layer", 0.0022), ("fig5d_15layer", 0.0040)):
        resp, rep = stack_uniformity(parse_stack_spec(name), LAMBDA)
        c(f"{name} delta_norm", abs(rep.delta_norm - expected) <= 0.002, f"delta_norm = {rep.delta_norm:.5f}")
    c("15-layer A_coh = 0.98 +- 0.01", abs(resp.absorption - 0.98) <= 0.01, f"A_coh = {resp.absorption:.4f}")
    c.verify()


@st.composite
def absentee_cases(draw):
    stack = draw(open_stacks())
    n_sp = draw(st.floats(1.2, 3.5))
    return stack, n_sp


@pytest.mark.criterion(6, "absentee half-wave spacer leaves R and A unchanged and shifts arg(t) by pi")
@settings(max_examples=100, deadline=None, database=None, suppress_health_check=[HealthCheck.too_slow])
@given(absentee_cases(), wavelengths)
def test_c06_absentee_invariance(case, wl):
    stack, n_sp = case
    spacer = Layer(Material.from_index("half-wave", n_sp), wl / (2 * n_sp), "spacer")
    before = traveling_response(stack, wl)
    after = traveling_response(stack.with_layers(stack.layers + (spacer,)), wl)
    assert abs(after.R - before.R) < 1e-9
    assert abs(after.A - before.A) < 1e-9
    assert abs(abs(phase_diff(after.t, before.t)) - math.pi) < 1e-6


ILLUMINATIONS = st.one_of(st.sampled_from(["left", "right"]), st.floats(0, 2 * math.pi).map(Coherent))


@pytest.mark.criterion(7, "energy conservation within 1e-9 for randomized stacks and all illuminations")
@settings(max_examples=1000, deadline=None, database=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.one_of(open_stacks(), mirror_stacks()), wavelengths, ILLUMINATIONS)
def test_c07_energy_conservation(stack, wl, illumination):
    if stack.is_mirror:
        illumination = "left"
    bal = power_balance(stack, wl, illumination)
    total = math.fsum(bal.per_layer) + bal.outgoing_left + bal.outgoing_right + bal.leakage
    assert abs(1.0 - total) < 1e-9


@pytest.mark.criterion(8, "click statistics agree with enumeration (1e-12) and with the Fock series (1e-10)")
def test_c08_click_oracles():
    c = Checks("criterion 8")
    worst = 0.0
    for N in range(1, 7):
        for m in range(0, 6):
            for eta in (0.3, 0.7, 1.0):
                for k in range(N + 1):
                    worst = max(worst, abs(click_prob_given_fock(k, m, N, eta) - oracle_click_prob(k, m, N, eta)))
    c("closed form vs enumeration", worst < 1e-12, f"max diff = {worst:.2e}")
    worst = 0.0
    for N in range(1, 21):
        for n in range(0, 13):
            for k in range(N + 1):
                worst = max(worst, abs(click_prob_given_fock(k, n, N, 1.0) - click_prob_series_fock(k, n, N)))
    c("closed form vs Fock series", worst < 1e-10, f"max diff = {worst:.2e}")
    c.verify()


@pytest.mark.criterion(9, "two- and three-photon resolution anchors")
def test_c09_resolution_anchors():
    c = Checks("criterion 9")
    p22 = click_prob_given_fock(2, 2, 10, 1.0)
    p33 = click_prob_given_fock(3, 3, 10, 1.0)
    c("P(2|2; 10, 1) = 0.900", abs(p22 - 0.9) <= 1e-12, f"{p22!r}")
    c("P(3|3; 10, 1) = 0.720 (oracle)", abs(p33 - 0.72) <= 1e-12, f"{p33!r}")
    c("enumeration matches N!/(N-m)!/N^m at N=8", abs(oracle_click_prob(3, 3, 8, 1.0) - 8 * 7 * 6 / 512) < 1e-12, "m=3")
    p22_low = click_prob_given_fock(2, 2, 10, 0.17)
    p33_low = click_prob_given_fock(3, 3, 10, 0.17)
    c("P(2|2; 10, 0.17) = 0.0260 +- 0.0005", abs(p22_low - 0.026) <= 5e-4, f"{p22_low:.5f}")
    c("P(3|3; 10, 0.17) = 0.0034 +- 0.0005", abs(p33_low - 0.0034) <= 5e-4, f"{p33_low:.5f}")
    prose = {(2, 0.95): 0.81, (3, 0.95): 0.64, (2, 0.90): 0.69, (3, 0.90): 0.54}
    for (m, eta), quoted in prose.items():
        v = click_prob_given_fock(m, m, 10, eta)
        c(f"P({m}|{m}; 10, {eta}) ~ {quoted} +- 0.04", abs(v - quoted) <= 0.04, f"{v:.4f}")
    c.verify()


@pytest.mark.criterion(10, "squeezed-vacuum click anchors 0.019/0.174/0.038/0.056 +- 0.002")
def test_c10_squeezed_vacuum_anchors():
    c = Checks("criterion 10")
    t0 = time.perf_counter()
    dist = source_click_distribution(squeezed_vacuum_pn(1.0), DetectorArraySpec(10, 1.0))
    elapsed = time.perf_counter() - t0
    for k, expected in ((1, 0.019), (2, 0.174), (3, 0.038), (4, 0.056)):
        c(f"P({k}) = {expected}", abs(dist[k] - expected) <= 0.002, f"{dist[k]:.4f}")
    c("runtime < 1 s", elapsed < 1.0, f"{elapsed:.3f} s")
    c.verify()


@pytest.mark.criterion(11, "Monte Carlo: 5-layer stack, +-5 %, 1000 samples, seed 42")
def test_c11_monte_carlo():
    c = Checks("criterion 11")
    nominal = parse_stack_spec("fig5b_5layer")
    spec = PerturbationSpec(0.05)
    t0 = time.perf_counter()
    rep = run_ensemble(nominal, spec, 1000, 42, LAMBDA)
    elapsed = time.perf_counter() - t0
    s = rep.summary
    frac = s["fraction_complete_absorption"]
    c("fraction A_coh >= 0.99 in [0.65, 0.85]", 0.65 <= frac <= 0.85, f"{frac:.3f}")
    c("min A_coh >= 0.95", s["min_absorption"] >= 0.95, f"min = {s['min_absorption']:.4f}")
    uniform = s["fraction_delta_norm_below_0.03"]
    c(">= 95 % with delta_norm < 0.03", uniform >= 0.95, f"{uniform:.3f}")
    c("no failed samples", s["n_failed"] == 0, f"{s['n_failed']}")
    c("runtime < 60 s", elapsed < 60.0, f"{elapsed:.1f} s")
    again = run_ensemble(nominal, spec, 1000, 42, LAMBDA)
    threaded = run_ensemble(nominal, spec, 1000, 42, LAMBDA, workers=4)
    c("bit-identical rerun", again == rep, "records and summary compared exactly")
    c("bit-identical across thread counts", threaded == rep, "workers=4 vs workers=1")
    c.verify()


@pytest.mark.criterion(12, "spectrum with a synthetic dispersion table satisfies energy conservation")
def test_c12_dispersive_spectrum(capsys, tmp_path):
    c = Checks("criterion 12")
    stack = parse_stack_spec("fig3_film_dispersive")
    for mode in ("traveling", "coherent"):
        out = tmp_path / mode
        code = cli.main(["spectrum", "--stack", "fig3_film_dispersive", "--from", "600", "--to", "2200",
                         "--points", "161", "--mode", mode, "--out", str(out)])
        capsys.readouterr()
        c(f"{mode}: exit code 0", code == 0, f"{code}")
        summary = json.loads((out / "spectrum_summary.json").read_text())
        c(f"{mode}: reported energy balance < 1e-9", summary["max_energy_balance_error"] < 1e-9,
          f"{summary['max_energy_balance_error']:.2e}")
        with open(out / "spectrum.csv") as fh:
            wls = [float(r["wavelength_nm"]) for r in csv.DictReader(fh)]
        worst = 0.0
        for wl in wls:
            illum = "left" if mode == "traveling" else Coherent()
            bal = power_balance(stack, wl, illum)
            worst = max(worst, abs(1 - (math.fsum(bal.per_layer) + bal.outgoing_left + bal.outgoing_right)))
        c(f"{mode}: independent balance at all {len(wls)} wavelengths", worst < 1e-9, f"{worst:.2e}")
    c.verify()
