import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridsim.circuit_reduction import (
    CircuitParams,
    RegimeWarning,
    SwitchOffError,
    SwitchParams,
    balance_residual,
    build_switch_circuit,
    coupling_energy_readings,
    effective_ion_charge_coupling,
    quasiparticle_resistance,
    reduce_switch_coupling,
    secular_modes,
    thermal_quasiparticle_ratio,
)

P = CircuitParams()


def test_static_coupling_matches_oracle(oracles):
    eff = effective_ion_charge_coupling(P)
    assert eff.C_sigma == pytest.approx(oracles["C_sigma_exact"], rel=1e-12)
    assert eff.kappa == pytest.approx(oracles["kappa_coupled"], rel=1e-12)


def test_approximate_c_sigma_uses_c_r():
    eff = effective_ion_charge_coupling(P, approximate_c_sigma=True)
    assert eff.C_sigma == P.C_r


def test_interaction_energy_is_reported_in_both_readings(oracles):
    e = coupling_energy_readings(effective_ion_charge_coupling(P), 200e-9)
    assert e["energy_over_h_Hz"] == pytest.approx(oracles["H_int_over_h_Hz_200nm"], rel=1e-10)
    assert e["energy_over_hbar_rad_s"] == pytest.approx(2 * np.pi * e["energy_over_h_Hz"])
    # within a factor 4 of 200 MHz only with the C_sigma ~ C_r reading
    approx = coupling_energy_readings(effective_ion_charge_coupling(P, True), 200e-9)["energy_over_h_Hz"]
    assert 200e6 / 4 <= approx <= 200e6 * 4


def test_small_cavity_warns():
    with pytest.warns(RegimeWarning):
        effective_ion_charge_coupling(P.with_(C_r=2e-16))


def test_negative_capacitance_rejected():
    with pytest.raises(ValueError):
        CircuitParams(C_m=-1e-16)


def test_secular_zero_mode():
    circ = build_switch_circuit(P, SwitchParams(100 * P.E_J, 0.1))
    evals, evecs = secular_modes(circ)
    assert abs(evals[0]) < 1e-12 * np.max(np.abs(evals))
    assert np.max(np.abs(evecs[:, 0] - 1 / np.sqrt(3))) < 1e-10
    assert np.all(evals[1:] > 0)


@given(st.floats(0.0, 0.49))
def test_zero_mode_at_any_flux_below_half(flux):
    evals, evecs = secular_modes(build_switch_circuit(P, SwitchParams(100 * P.E_J, flux)))
    assert abs(evals[0]) < 1e-12 * np.max(np.abs(evals))
    assert np.max(np.abs(evecs[:, 0] - 1 / np.sqrt(3))) < 1e-10


def test_switch_off_is_exact_zero():
    s = SwitchParams(100 * P.E_J, 0.5)
    eff = reduce_switch_coupling(P, s)
    assert eff.kappa == 0.0
    assert eff.charge_qubit_capacitance_correction == pytest.approx(P.C_t, rel=1e-12)
    with pytest.raises(SwitchOffError):
        build_switch_circuit(P, s)


@pytest.mark.parametrize("ratio", [100, 1000])
@pytest.mark.parametrize("flux", [0.0, 0.25, 0.4])
def test_switch_coupling_matches_nodal_oracle(oracles, ratio, flux):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        eff = reduce_switch_coupling(P, SwitchParams(ratio * P.E_J, flux))
    assert eff.kappa == pytest.approx(oracles["switch_kappa"][f"{ratio}_{flux}"], rel=1e-9)


def test_switch_coupling_is_flux_independent_in_the_valid_regime():
    direct = effective_ion_charge_coupling(P).kappa
    for flux in (0.0, 0.25, 0.4):
        k = reduce_switch_coupling(P, SwitchParams(100 * P.E_J, flux)).kappa
        assert abs(k / direct - 1) < 1e-3


def test_switch_coupling_is_even_about_half_flux():
    a = reduce_switch_coupling(P, SwitchParams(100 * P.E_J, 0.3)).kappa
    b = reduce_switch_coupling(P, SwitchParams(100 * P.E_J, 0.7)).kappa
    assert a == pytest.approx(b, rel=1e-12)


def test_weak_switch_warns():
    with pytest.warns(RegimeWarning):
        reduce_switch_coupling(P, SwitchParams(0.01 * P.E_J, 0.0))


def test_flux_out_of_range():
    with pytest.raises(ValueError):
        SwitchParams(P.E_J, 1.5)


def test_balance_exact_zero_and_imbalance():
    assert balance_residual(P, 1.0, -P.C_i / P.C_ib) == 0.0
    case = P.with_(C_i=P.C_t / 10, C_ib=P.C_t / 10)
    mhz = abs(balance_residual(case, 1.0 + 1e-4, -1.0)) / (2 * np.pi) / 1e6
    assert 50 <= mhz <= 200


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_balance_is_linear_in_induced_charge(v1, v2):
    r = balance_residual(P, v1, v2)
    scale = balance_residual(P, 1.0, 0.0)
    assert r == pytest.approx(scale * (v1 + v2 * P.C_ib / P.C_i), rel=1e-9, abs=1e-9 * abs(scale))


def test_quasiparticle_helpers(oracles):
    assert quasiparticle_resistance(3100.0, 1e-5) == pytest.approx(0.031)
    assert thermal_quasiparticle_ratio(4.0, 0.1) == pytest.approx(oracles["thermal_ratio_4K_100mK"], rel=1e-12)
    with pytest.raises(ValueError):
        quasiparticle_resistance(1.0, 2.0)
