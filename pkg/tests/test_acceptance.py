"""The thirteen acceptance criteria, each at its stated tolerance.

Every test records a one-line verdict that is printed in the terminal
summary, then asserts it.
"""

import time

import numpy as np
import pytest

from hybridsim.cavity_dissipation import (
    BathSpec,
    backsolve_resistance,
    charge_decoherence_rate,
    continued_spectral_density,
    effective_impedance,
    effective_spectral_density,
)
from hybridsim.charge_noise import (
    FlipProtocol,
    NoiseModel,
    NoiseTrajectory,
    decoherence_rate,
    load_spectrum_table,
    phase_ensemble,
    stochastic_phase,
)
from hybridsim.circuit_reduction import CircuitParams
from hybridsim.cli import main
from hybridsim.config import load_config
from hybridsim.constants import E_CHARGE, HBAR
from hybridsim.core_algebra import HilbertSpace, fock_state
from hybridsim.gate_engine import (
    IonParams,
    bystander_check,
    canonical_schedule,
    run_gate_displacement,
    run_gate_fock,
)
from hybridsim.runner import compute_scenario

pytestmark = pytest.mark.acceptance

CIRCUIT = CircuitParams()
KAPPA_BARE = E_CHARGE**2 / (HBAR * CIRCUIT.C_r * CIRCUIT.d_i)
COUPLING = CIRCUIT.E_c * CIRCUIT.C_g / (2 * E_CHARGE)


def scenario(name, **overrides):
    sets = [f"{k}={v}" for k, v in overrides.items()]
    return compute_scenario(load_config(None, name, sets, workers=1))


def check(out, fragment):
    matches = [c for c in out.checks if fragment in c.name]
    assert len(matches) == 1, fragment
    return matches[0]


def test_c01_fock_vs_displacement(oracles, verdict):
    ion = IonParams.beryllium9(photon_momentum=oracles["random_schedules_photon_momentum"])
    space = HilbertSpace(64)
    vac = fock_state(64, 0)
    t0 = time.perf_counter()
    worst = 0.0
    for rec in oracles["random_schedules"]:
        s = canonical_schedule(rec["n1"], rec["n2"], rec["tau1"], rec["t1"], rec["t2"])
        fock = run_gate_fock(s, ion, KAPPA_BARE, space, vac).alpha
        disp = run_gate_displacement(s, ion, KAPPA_BARE).alpha
        worst = max(worst, abs(fock - disp), abs(disp - rec["alpha"]))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 10.0
    assert verdict(1, "gate phase cross-validation", ok, f"max |d alpha| = {worst:.2e} rad in {elapsed:.1f} s")


def test_c02_motional_independence(verdict):
    out = scenario("gate_fidelity")
    c = check(out, "alpha spread")
    assert verdict(2, "motional independence", c.passed, f"alpha spread = {c.value:.2e} rad")


def test_c03_fidelity_scaling(verdict):
    t0 = time.perf_counter()
    out = scenario("gate_fidelity")
    elapsed = time.perf_counter() - t0
    c = check(out, "infidelity exponent")
    ok = c.passed and len(out.tables["gate_sweep"][1]) == 10 and elapsed < 60.0
    assert verdict(3, "fidelity scaling", ok, f"exponent = {c.value:.3f} in {elapsed:.1f} s")


def test_c04_gate_time(verdict):
    out = scenario("gate_time")
    bare = [c for c in out.checks if "bare" in c.name]
    conventions = {r[1] for r in out.tables["gate_time"][1]}
    ok = len(bare) == 2 and all(c.passed for c in bare) and conventions == {"bare", "coupled"}
    detail = ", ".join(f"{c.name.split()[0]} {c.value * 1e9:.1f} ns" for c in bare)
    assert verdict(4, "gate time within factor 2.5", ok, detail)


def test_c05_white_noise_closed_form(verdict):
    s0 = 1e-20
    model = NoiseModel("white", s0, 2 * np.pi * 1e3, 2 * np.pi * 20e9, COUPLING)
    protocol = FlipProtocol(1e-9, 20e-9)
    t0 = time.perf_counter()
    phases = phase_ensemble(model, protocol, range(10_000), 2.5e-12, workers=4)
    elapsed = time.perf_counter() - t0
    mc = float(np.mean(phases**2))
    closed = COUPLING**2 * s0 * protocol.total_time / 3
    ratio = mc / closed
    ok = abs(ratio - 1) < 0.05 and elapsed < 120.0
    verdict(5, "white-noise closed form", ok, f"MC / closed form = {ratio:.3f} in {elapsed:.1f} s")
    assert ok, f"Monte Carlo variance {mc:.4g} vs closed form {closed:.4g} (ratio {ratio:.3f})"


def test_c06_echo_suppression(spectra_dir, verdict):
    out = scenario("noise_echo")
    supp = check(out, "suppression")
    protocol = FlipProtocol(1e-9, 20e-9)
    models = [
        NoiseModel("one_over_f", 1e-14, 2 * np.pi * 1e3, 2 * np.pi * 10e9, COUPLING),
        NoiseModel("white", 1e-20, 2 * np.pi * 1e3, 2 * np.pi * 20e9, COUPLING),
    ] + [load_spectrum_table(p, coupling=COUPLING) for p in sorted(spectra_dir.glob("*.csv"))]
    rates = [decoherence_rate(m, protocol) for m in models]
    margin = max(r.rate / r.bound for r in rates)
    ok = supp.passed and margin <= 1.0
    detail = f"suppression = {supp.value:.0f}, worst rate / bound = {margin:.3f} over {len(models)} spectra"
    assert verdict(6, "echo suppression and bound", ok, detail)


def test_c07_dc_rejection(verdict):
    model = NoiseModel("one_over_f", 1e-14, 2 * np.pi * 1e3, 2 * np.pi * 10e9, COUPLING)
    worst = 0.0
    for n_intervals in (2, 4, 20, 64):
        p = FlipProtocol(1e-9, n_intervals * 1e-9)
        n = int(round(p.total_time / 5e-12))
        for offset in (1e-6, 0.37, -12.5):
            traj = NoiseTrajectory(np.arange(n + 1) * 5e-12, np.full(n + 1, offset), 0, 5e-12)
            worst = max(worst, abs(stochastic_phase(traj, p, model)))
    assert verdict(7, "exact DC rejection", worst == 0.0, f"max |phase| = {worst:.1e} rad")


def test_c08_dissipation_closure(verdict):
    bath = BathSpec()
    gamma, j0 = charge_decoherence_rate(bath)
    closure = abs(gamma - j0) / gamma
    z0 = effective_impedance(bath, 1e-4 * bath.omega_r).real
    r_back = backsolve_resistance(5e4, bath)
    rate_back = charge_decoherence_rate(BathSpec(R_r=r_back))[0]
    ok = (
        closure < 1e-6
        and abs(z0 / bath.R_r - 1) < 0.01
        and abs(rate_back / 5e4 - 1) < 0.01
        and round(r_back, 3) == 0.031
    )
    detail = f"closure = {closure:.1e}, Z(0+) / R_r = {z0 / bath.R_r:.4f}, R_r = {r_back:.5f} Ohm"
    assert verdict(8, "dissipation closure", ok, detail)


def test_c09_matsubara_consistency(verdict):
    bath = BathSpec()
    w = np.geomspace(1e-3, 1e-1, 41) * bath.omega_r
    dev = float(np.max(np.abs(continued_spectral_density(bath, w) / effective_spectral_density(bath, w) - 1)))
    assert verdict(9, "Matsubara continuation", dev < 0.02, f"max relative deviation = {dev:.1e}")


def test_c10_switch(verdict):
    on = scenario("switch")
    off = scenario("switch", flux_ratio="0.5")
    ok = all(c.passed for c in on.checks) and all(r[2] == 0.0 for r in off.tables["switch"][1])
    dev = check(on, "E_Ja >= 100").value
    detail = f"zero modes = {on.summary['zero_modes']}, vector dev = {on.summary['zero_mode_vector_deviation']:.1e}, kappa dev = {dev:.1e}"
    assert verdict(10, "switch", ok, detail)


def test_c11_balance(verdict):
    out = scenario("balance")
    ok = all(c.passed for c in out.checks)
    detail = f"balanced residual = {out.summary['max_balanced_residual']:.1e}, imbalance = {out.summary['imbalanced_residual_MHz']:.1f} MHz"
    assert verdict(11, "charge balance", ok, detail)


def test_c12_bystander(verdict):
    ion = IonParams.beryllium9(photon_momentum=1e7)
    t_half = 1e-3 / ion.trap_frequency / 2
    s = canonical_schedule(1, 1, 0.5 / (KAPPA_BARE * ion.x0), t_half, t_half)
    dev = bystander_check(s, HilbertSpace(8), ion, KAPPA_BARE, bystander_fock_dim=8)
    assert verdict(12, "bystander ion", dev < 1e-9, f"deviation = {dev:.1e}")


def test_c13_determinism(tmp_path, verdict, capsys):
    runs = {}
    for label, workers in (("a", "1"), ("b", "1"), ("c", "8")):
        d = tmp_path / label
        main(["report_all", "--seeds", "0-99", "--workers", workers, "--out", str(d)])
        runs[label] = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    capsys.readouterr()
    ok = bool(runs["a"]) and runs["a"] == runs["b"] == runs["c"]
    assert verdict(13, "determinism", ok, f"{len(runs['a'])} files identical across runs and workers 1 / 8")
