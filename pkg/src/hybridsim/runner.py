"""Scenario orchestration and result emission.

Each scenario turns a resolved ``ScenarioConfig`` into a ``ScenarioOutput``:
named tables (fixed columns), a flat summary and a list of checks, each a
reproduced value compared against a target with a tolerance.  Writing is
separate from computing so that outputs are a pure function of the config
and the seed list; timings are returned to the caller and never written.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .cavity_dissipation import BathSpec, charge_decoherence_rate, effective_impedance, spectral_pipeline
from .charge_noise import (
    FlipProtocol,
    NoiseModel,
    NoiseTrajectory,
    decoherence_rate,
    load_spectrum_table,
    phase_ensemble,
    phase_variance,
    stochastic_phase,
)
from .circuit_reduction import (
    CircuitParams,
    RegimeWarning,
    SwitchParams,
    balance_residual,
    build_switch_circuit,
    coupling_energy_readings,
    effective_ion_charge_coupling,
    reduce_switch_coupling,
    secular_modes,
)
from .config import SCENARIOS, ScenarioConfig
from .constants import E_CHARGE, HBAR, TWO_PI
from .gate_engine import (
    IonParams,
    analytic_phase,
    canonical_schedule,
    fidelity_scaling_sweep,
    gate_time_for_phase,
    run_gate_displacement,
    run_gate_fock,
)
from .core_algebra import HilbertSpace, coherent_state, fock_state

__all__ = ["Check", "RunManifest", "ScenarioOutput", "run_scenario", "compute_scenario", "write_outputs"]


@dataclass(frozen=True)
class Check:
    """A reproduced quantity against its target.

    ``kind`` is ``"abs"`` (|value - target| <= tol), ``"rel"`` (relative),
    ``"factor"`` (max(value/target, target/value) <= tol), ``"max"``
    (value <= target) or ``"min"`` (value >= target).
    """

    name: str
    value: float
    target: float
    tolerance: float
    kind: str

    @property
    def passed(self) -> bool:
        v, t, tol = self.value, self.target, self.tolerance
        if not math.isfinite(v):
            return False
        if self.kind == "abs":
            return abs(v - t) <= tol
        if self.kind == "rel":
            return abs(v - t) <= tol * abs(t)
        if self.kind == "factor":
            return v > 0 and t > 0 and max(v / t, t / v) <= tol
        if self.kind == "max":
            return v <= t
        if self.kind == "min":
            return v >= t
        raise ValueError(f"unknown check kind {self.kind!r}")

    def as_row(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "target": self.target,
            "tolerance": self.tolerance,
            "kind": self.kind,
            "passed": self.passed,
        }


@dataclass
class ScenarioOutput:
    scenario: str
    tables: dict[str, tuple[list[str], list[list[Any]]]] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass
class RunManifest:
    config_hash: str
    version: str
    results: dict[str, dict[str, Any]]
    wall_clock: dict[str, float]
    files: list[str]

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.results.values())


# -- construction helpers ----------------------------------------------------


def circuit_from(cfg: ScenarioConfig) -> CircuitParams:
    keys = ("C_r", "L_r", "C_m", "C_J", "C_g", "E_J", "E_c", "d_i", "cavity_length", "C_i", "C_i2", "C_ib")
    return CircuitParams(**{k: cfg[k] for k in keys})


def ion_from(cfg: ScenarioConfig, species: Optional[str] = None) -> IonParams:
    species = species or cfg["ion"]
    kw = dict(trap_frequency=cfg["trap_frequency"], photon_momentum=cfg["photon_momentum"])
    if cfg["ion_mass"] > 0 and species == cfg["ion"]:
        return IonParams(mass=cfg["ion_mass"], **kw)
    if species == "Be9":
        return IonParams.beryllium9(**kw)
    if species == "Ca43":
        return IonParams.calcium43(**kw)
    raise ValueError(f"unknown ion species {species!r}; use Be9 or Ca43")


def kappa_from(cfg: ScenarioConfig, circuit: CircuitParams) -> float:
    conv = cfg["coupling_convention"]
    if conv == "bare":
        return E_CHARGE**2 / (HBAR * circuit.C_r * circuit.d_i)
    if conv == "coupled":
        return effective_ion_charge_coupling(circuit).kappa
    raise ValueError(f"unknown coupling convention {conv!r}; use bare or coupled")


def noise_model_from(cfg: ScenarioConfig) -> NoiseModel:
    c = circuit_from(cfg)
    coupling = c.E_c * c.C_g / (2.0 * E_CHARGE)
    if cfg["spectrum"] == "tabulated":
        if not cfg["spectrum_table"]:
            raise ValueError("spectrum = tabulated needs spectrum_table")
        return load_spectrum_table(cfg["spectrum_table"], coupling=coupling)
    return NoiseModel(cfg["spectrum"], cfg["noise_amplitude"], cfg["omega_min"], cfg["omega_max"], coupling)


def bath_from(cfg: ScenarioConfig) -> BathSpec:
    return BathSpec(cfg["R_r"], cfg["temperature"], cfg["C_r"], cfg["C_m"], cfg["C_t_bath"], cfg["L_r"])


# -- scenarios ---------------------------------------------------------------

REFERENCE_GATE_TIMES = {"Be9": 14e-9, "Ca43": 26e-9}


def scenario_gate_fidelity(cfg: ScenarioConfig) -> ScenarioOutput:
    out = ScenarioOutput("gate_fidelity")
    ion = ion_from(cfg)
    circuit = circuit_from(cfg)
    kappa = kappa_from(cfg, circuit)
    values = np.geomspace(cfg["sweep_min"], cfg["sweep_max"], cfg["sweep_points"])
    sweep = fidelity_scaling_sweep(ion, kappa, values, n_kicks=cfg["sweep_kicks"], alpha_target=cfg["alpha"])
    rows = [
        [float(w), float(f), float(a), float(b)]
        for w, f, a, b in zip(sweep.omega_nu_T, sweep.infidelities, sweep.alpha_numeric, sweep.alpha_analytic)
    ]
    out.tables["gate_sweep"] = (["omega_nu_T", "infidelity", "alpha_numeric", "alpha_analytic"], rows)

    # motional independence on the truncated Fock space; the coupling window
    # displaces by one ladder unit so the excursion stays well inside N levels
    t_half = 1e-3 / ion.trap_frequency / 2.0
    n = cfg["sweep_kicks"]
    tau1 = 1.0 / (kappa * ion.x0)
    sched = canonical_schedule(n, n, tau1, t_half, t_half)
    space = HilbertSpace(cfg["fock_dim"])
    states = {
        "fock0": fock_state(space.fock_dim, 0),
        "fock1": fock_state(space.fock_dim, 1),
        "fock5": fock_state(space.fock_dim, 5),
        "coherent1": coherent_state(space.fock_dim, 1.0),
    }
    ref = run_gate_displacement(sched, ion, kappa)
    alphas = {k: run_gate_fock(sched, ion, kappa, space, v).alpha for k, v in states.items()}
    spread = max(alphas.values()) - min(alphas.values())
    out.tables["motional_states"] = (
        ["state", "alpha_fock", "alpha_displacement"],
        [[k, alphas[k], ref.alpha] for k in sorted(alphas)],
    )
    out.summary.update(
        fitted_exponent=sweep.fitted_exponent,
        fit_intercept=sweep.fit_intercept,
        sweep_kicks=n,
        motional_alpha_spread=spread,
        motional_alpha=ref.alpha,
    )
    out.checks.append(Check("infidelity exponent", sweep.fitted_exponent, 2.0, 0.3, "abs"))
    out.checks.append(Check("alpha spread over motional states (rad)", spread, 1e-6, 0.0, "max"))
    return out


def scenario_gate_time(cfg: ScenarioConfig) -> ScenarioOutput:
    out = ScenarioOutput("gate_time")
    circuit = circuit_from(cfg)
    coupled = effective_ion_charge_coupling(circuit)
    rows = []
    for species in ("Be9", "Ca43"):
        ion = ion_from(cfg, species)
        probe = canonical_schedule(cfg["n_kicks"], None, 1e-12, cfg["t1"], cfg["t2"], cfg["dead_time"])
        ap = analytic_phase(probe, ion, circuit, coupled)
        for conv, kappa in (("bare", ap.kappa_bare), ("coupled", ap.kappa_coupled)):
            clock, sched = gate_time_for_phase(cfg["alpha"], cfg["n_kicks"], cfg["t1"], cfg["t2"], ion, kappa,
                                               cfg["dead_time"])
            res = run_gate_displacement(sched, ion, kappa)
            target = REFERENCE_GATE_TIMES[species]
            tau1 = sched.canonical_parameters()[2]
            rows.append([species, conv, kappa, tau1, sched.free_time, clock, res.alpha, target, clock / target])
            if conv == "bare":
                out.checks.append(Check(f"{species} gate time, bare prefactor (s)", clock, target, 2.5, "factor"))
            out.summary[f"{species}_{conv}_gate_time_s"] = clock
    out.tables["gate_time"] = (
        ["ion", "convention", "kappa_rad_per_s_m", "tau1_s", "free_time_s", "gate_time_s", "alpha_numeric",
         "reference_gate_time_s", "ratio"],
        rows,
    )
    return out


def _noise_protocols(cfg: ScenarioConfig) -> tuple[FlipProtocol, FlipProtocol]:
    on = FlipProtocol(cfg["flip_interval"], cfg["gate_duration"], True, cfg["flip_infidelity"])
    off = FlipProtocol(cfg["flip_interval"], cfg["gate_duration"], False)
    return on, off


def scenario_noise_echo(cfg: ScenarioConfig) -> ScenarioOutput:
    out = ScenarioOutput("noise_echo")
    model = noise_model_from(cfg)
    on, off = _noise_protocols(cfg)
    phases = phase_ensemble(model, on, cfg.seeds, cfg["dt"], workers=cfg.workers)
    out.tables["noise_ensemble"] = (
        ["seed", "phase", "t"],
        [[s, float(p), on.total_time] for s, p in sorted(zip(cfg.seeds, phases))],
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pv_on = phase_variance(model, on)
        rate = decoherence_rate(model, on)
    pv_off = phase_variance(model, off)
    suppression = pv_off.filter_integral / pv_on.filter_integral if pv_on.filter_integral > 0 else math.inf
    n_steps = int(round(on.total_time / cfg["dt"]))
    const = NoiseTrajectory(np.arange(n_steps + 1) * cfg["dt"], np.full(n_steps + 1, 0.37), 0, cfg["dt"])
    dc_phase = stochastic_phase(const, on, model)
    mc_var = float(np.mean(phases**2)) if len(phases) else float("nan")
    out.summary.update(
        n_seeds=len(cfg.seeds),
        variance_monte_carlo=mc_var,
        variance=pv_on.variance,
        harmonic_odd=pv_on.harmonic_odd,
        filter_harmonic=pv_on.filter_harmonic,
        filter_integral=pv_on.filter_integral,
        variance_without_flips=pv_off.filter_integral,
        suppression_ratio=suppression,
        rate=rate.rate,
        rate_filter=rate.rate_filter,
        bound=rate.bound,
        bound_odd=rate.bound_odd,
        contrast=on.contrast,
        dc_offset_phase=dc_phase,
    )
    out.checks.append(Check("dephasing rate <= bound (1/s)", rate.rate, rate.bound, 0.0, "max"))
    out.checks.append(Check("constant-offset phase (rad)", abs(dc_phase), 0.0, 0.0, "max"))
    if model.spectrum_kind == "one_over_f":
        out.checks.append(Check("1/f suppression by flips", suppression, 100.0, 0.0, "min"))
    return out


def scenario_dissipation(cfg: ScenarioConfig) -> ScenarioOutput:
    out = ScenarioOutput("dissipation")
    bath = bath_from(cfg)
    grid = bath.omega_r * np.geomspace(1e-3, 1e-1, cfg["spectrum_points"])
    res = spectral_pipeline(bath, grid)
    out.tables["spectrum"] = (
        ["omega_rad_s", "ReZ_ohm", "ImZ_ohm", "J_eff"],
        [[float(w), float(z.real), float(z.imag), float(j)] for w, z, j in zip(grid, res.Z_eff, res.J_eff)],
    )
    gamma, j0 = charge_decoherence_rate(bath)
    summary = dict(
        gamma_rq=gamma,
        J_eff_0_over_R_k=j0,
        closure_residual=res.closure_residual,
        continuation_residual=res.continuation_residual,
        omega_r=bath.omega_r,
        implied_R_n=bath.R_r * 1e5,
    )
    out.checks.append(Check("continuation vs direct J_eff", res.continuation_residual, 0.02, 0.0, "max"))
    if bath.R_r > 0:
        z0 = effective_impedance(bath, 1e-6 * bath.omega_r)
        summary["Z_eff_low_frequency_ohm"] = z0.real
        out.checks.append(Check("gamma_rq vs J_eff(0+)/R_k", res.closure_residual, 1e-6, 0.0, "max"))
        out.checks.append(Check("Z_eff(omega -> 0) (Ohm)", z0.real, bath.R_r, 0.01, "rel"))
    out.summary.update(summary)
    return out


def scenario_switch(cfg: ScenarioConfig) -> ScenarioOutput:
    out = ScenarioOutput("switch")
    circuit = circuit_from(cfg)
    direct = effective_ion_charge_coupling(circuit).kappa
    flux = cfg["flux_ratio"]
    ratios = sorted({10.0, 30.0, 100.0, 300.0, 1000.0, cfg["E_Ja"] / circuit.E_J})
    rows = []
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        for r in ratios:
            s = SwitchParams(r * circuit.E_J, flux)
            eff = reduce_switch_coupling(circuit, s)
            rel = eff.kappa / direct - 1.0
            rows.append([flux, r, eff.kappa, direct, rel])
            if r >= 100 and not s.is_off:
                worst = max(worst, abs(rel))
    out.tables["switch"] = (["flux_ratio", "E_Ja_over_E_J", "kappa", "kappa_direct", "relative_deviation"], rows)
    on = build_switch_circuit(circuit, SwitchParams(cfg["E_Ja"], 0.0))
    evals, evecs = secular_modes(on)
    zero = int(np.sum(np.abs(evals) <= 1e-12 * np.max(np.abs(evals))))
    vec_dev = float(np.max(np.abs(evecs[:, 0] - 1.0 / np.sqrt(3.0))))
    off = reduce_switch_coupling(circuit, SwitchParams(cfg["E_Ja"], 0.5)).kappa
    out.summary.update(zero_modes=zero, zero_mode_vector_deviation=vec_dev, kappa_off=off, kappa_direct=direct)
    out.checks.append(Check("number of zero modes", zero, 1, 0, "abs"))
    out.checks.append(Check("zero-mode vector deviation", vec_dev, 1e-10, 0.0, "max"))
    out.checks.append(Check("kappa at flux 1/2", abs(off), 0.0, 0.0, "max"))
    if not SwitchParams(1.0, flux).is_off:
        out.checks.append(Check("switch vs direct kappa, E_Ja >= 100 E_J", worst, 1e-3, 0.0, "max"))
    return out


def scenario_balance(cfg: ScenarioConfig) -> ScenarioOutput:
    out = ScenarioOutput("balance")
    base = circuit_from(cfg)
    small_electrode = base.with_(C_i=base.C_t / 10.0, C_ib=base.C_t / 10.0)
    rows = []
    for label, p in (("configured", base), ("C_i=C_t/10", small_electrode)):
        v_i = cfg["V_i"]
        v_ib = -p.C_i * v_i / p.C_ib
        for kind, dv in (("balanced", 0.0), ("imbalanced", cfg["delta_V"])):
            for conv, approx in (("exact_C_sigma", False), ("C_sigma=C_r", True)):
                r = balance_residual(p, v_i + dv, v_ib, approximate_c_sigma=approx)
                rows.append([label, kind, conv, p.C_i, v_i + dv, v_ib, r, r / TWO_PI / 1e6])
    out.tables["balance"] = (
        ["case", "state", "convention", "C_i", "V_i", "V_ib", "residual_rad_s", "residual_over_h_MHz"], rows
    )
    balanced = [abs(r[6]) for r in rows if r[1] == "balanced"]
    ref_row = [r for r in rows if r[0] == "C_i=C_t/10" and r[1] == "imbalanced" and r[2] == "exact_C_sigma"][0]
    out.summary.update(max_balanced_residual=max(balanced), imbalanced_residual_MHz=abs(ref_row[7]))
    out.checks.append(Check("residual at balance (rad/s)", max(balanced), 0.0, 0.0, "max"))
    if cfg["delta_V"] != 0:
        out.checks.append(Check("imbalance residual (MHz) vs 100 MHz", abs(ref_row[7]), 100.0, 2.0, "factor"))
    return out


def scenario_report_all(cfg: ScenarioConfig) -> ScenarioOutput:
    out = ScenarioOutput("report_all")
    rows = []
    for name in SCENARIOS[:-1]:
        sub = compute_scenario(cfg.with_scenario(name))
        for t_name, table in sub.tables.items():
            out.tables[f"{name}.{t_name}"] = table
        for k, v in sub.summary.items():
            out.summary[f"{name}.{k}"] = v
        for c in sub.checks:
            out.checks.append(Check(f"{name}: {c.name}", c.value, c.target, c.tolerance, c.kind))
            rows.append([name, c.name, c.value, c.target, c.tolerance, c.kind, "pass" if c.passed else "FAIL"])
    # coupling energy at the reference displacement, reported only
    circuit = circuit_from(cfg)
    for conv, approx in (("exact_C_sigma", False), ("C_sigma=C_r", True)):
        e = coupling_energy_readings(effective_ion_charge_coupling(circuit, approx), cfg["displacement"])
        out.summary[f"H_int_over_h_MHz.{conv}"] = e["energy_over_h_Hz"] / 1e6
    out.tables["claims"] = (["scenario", "claim", "value", "target", "tolerance", "kind", "verdict"], rows)
    return out


_SCENARIOS: dict[str, Callable[[ScenarioConfig], ScenarioOutput]] = {
    "gate_fidelity": scenario_gate_fidelity,
    "gate_time": scenario_gate_time,
    "noise_echo": scenario_noise_echo,
    "dissipation": scenario_dissipation,
    "switch": scenario_switch,
    "balance": scenario_balance,
    "report_all": scenario_report_all,
}


def compute_scenario(cfg: ScenarioConfig) -> ScenarioOutput:
    try:
        return _SCENARIOS[cfg.scenario](cfg)
    except (ValueError, ArithmeticError) as exc:
        raise RuntimeError(f"scenario {cfg.scenario}: {exc}") from exc


# -- emission ----------------------------------------------------------------


def _fmt(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def _csv_text(columns: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def write_outputs(out: ScenarioOutput, cfg: ScenarioConfig) -> list[Path]:
    """Write tables and summary; returns the paths in a fixed order."""
    d = Path(cfg.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    if cfg.output_format in ("csv", "both"):
        for name in sorted(out.tables):
            cols, rows = out.tables[name]
            p = d / f"{out.scenario}__{name.replace('.', '__')}.csv"
            p.write_text(_csv_text(cols, rows))
            paths.append(p)
    if cfg.output_format in ("json", "both"):
        payload = {
            "scenario": out.scenario,
            "version": __version__,
            "config_hash": cfg.digest(),
            "seeds": list(cfg.seeds),
            "passed": out.passed,
            "summary": {k: _fmt(v) for k, v in sorted(out.summary.items())},
            "checks": [{k: _fmt(v) for k, v in c.as_row().items()} for c in out.checks],
            "tables": {
                name: {"columns": cols, "rows": [[_fmt(x) for x in r] for r in rows]}
                for name, (cols, rows) in sorted(out.tables.items())
            },
        }
        p = d / f"{out.scenario}.json"
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        paths.append(p)
    return paths


def run_scenario(cfg: ScenarioConfig) -> tuple[RunManifest, ScenarioOutput]:
    """Compute and write one scenario; wall-clock time is kept in the manifest only."""
    t0 = time.perf_counter()
    out = compute_scenario(cfg)
    elapsed = time.perf_counter() - t0
    files = write_outputs(out, cfg)
    manifest = RunManifest(
        config_hash=cfg.digest(),
        version=__version__,
        results={out.scenario: {"passed": out.passed, "checks": len(out.checks)}},
        wall_clock={out.scenario: elapsed},
        files=[str(f) for f in files],
    )
    return manifest, out
